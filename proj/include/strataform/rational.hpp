#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <sstream>
#include <stdexcept>
#include <string>

namespace strataform {

// Exact rational scalar. Thin value wrapper around mpq_class: gmpxx's
// expression templates interact badly with Eigen's, so we keep plain
// value semantics and always-canonical representation.
class Rat {
 public:
  Rat() : v_(0) {}
  Rat(int n) : v_(n) {}
  Rat(long n) : v_(n) {}
  Rat(long long n) : v_(static_cast<long>(n)) {}
  Rat(long n, long d) : v_(n, d) {
    if (d == 0) throw std::invalid_argument("Rat: zero denominator");
    v_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }

  // Accepts "3/4", "-2", "7".
  static Rat parse(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("Rat: cannot parse '" + s + "'");
    q.canonicalize();
    return Rat(q);
  }

  friend Rat operator+(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ + b.v_)); }
  friend Rat operator-(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ - b.v_)); }
  friend Rat operator*(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ * b.v_)); }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.is_zero()) throw std::domain_error("Rat: division by zero");
    return Rat(mpq_class(a.v_ / b.v_));
  }
  Rat operator-() const { return Rat(mpq_class(-v_)); }
  Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
  Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
  friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

  friend Rat abs(const Rat& a) { return Rat(mpq_class(::abs(a.v_))); }

  bool is_zero() const { return v_ == 0; }
  int sign() const { return sgn(v_); }
  double to_double() const { return v_.get_d(); }

  Rat pow(int e) const {
    if (e < 0) {
      if (is_zero()) throw std::domain_error("Rat: 0^negative");
      return (Rat(1) / *this).pow(-e);
    }
    Rat r(1), b = *this;
    while (e > 0) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  std::string str() const {
    std::ostringstream os;
    os << v_;
    return os.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const Rat& a) { return os << a.v_; }

  // Nearest rational with denominator 2^bits (exact dyadic snap of a double).
  static Rat snap(double x, int bits = 20) {
    double scaled = x * static_cast<double>(1LL << bits);
    long long n = static_cast<long long>(scaled >= 0 ? scaled + 0.5 : scaled - 0.5);
    return Rat(static_cast<long>(n), 1L << bits);
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&h](const mpz_class& z) {
      h ^= static_cast<std::size_t>(z.get_si());
      h *= 1099511628211ull;
    };
    mix(v_.get_num());
    mix(v_.get_den());
    return h;
  }

 private:
  mpq_class v_;
};

}  // namespace strataform

#include <Eigen/Core>

namespace Eigen {

template <>
struct NumTraits<strataform::Rat> : GenericNumTraits<strataform::Rat> {
  typedef strataform::Rat Real;
  typedef strataform::Rat NonInteger;
  typedef strataform::Rat Nested;
  static inline Real epsilon() { return strataform::Rat(0); }
  static inline Real dummy_precision() { return strataform::Rat(0); }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 80,
    MulCost = 80
  };
};

}  // namespace Eigen
