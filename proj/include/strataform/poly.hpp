#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "strataform/chart.hpp"
#include "strataform/dense.hpp"
#include "strataform/rational.hpp"

namespace strataform {

// Exponent vector; size equals the number of variables.
using Mono = std::vector<int>;

inline int mono_degree(const Mono& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

// Graded lexicographic order, used for canonical term ordering.
struct MonoOrder {
  bool operator()(const Mono& a, const Mono& b) const {
    const int da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

// Multivariate polynomial with exact rational coefficients, kept canonical
// (ordered terms, no zero coefficients).
class Poly {
 public:
  Poly() : nvars_(0) {}
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, const Rat& c) {
    Poly p(nvars);
    if (!c.is_zero()) p.terms_[Mono(nvars, 0)] = c;
    return p;
  }
  static Poly variable(int nvars, int i) {
    Poly p(nvars);
    Mono m(nvars, 0);
    m.at(i) = 1;
    p.terms_[m] = Rat(1);
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && mono_degree(terms_.begin()->first) == 0);
  }
  Rat constant_term() const {
    auto it = terms_.find(Mono(nvars_, 0));
    return it == terms_.end() ? Rat(0) : it->second;
  }
  int total_degree() const {
    int d = 0;
    for (auto& [m, c] : terms_) d = std::max(d, mono_degree(m));
    return d;
  }
  // Total degree counted over a subset of variables only.
  int degree_in(const std::vector<int>& vars) const {
    int d = 0;
    for (auto& [m, c] : terms_) {
      int s = 0;
      for (int v : vars) s += m[v];
      d = std::max(d, s);
    }
    return d;
  }

  const std::map<Mono, Rat, MonoOrder>& terms() const { return terms_; }

  void add_term(const Mono& m, const Rat& c) {
    if (static_cast<int>(m.size()) != nvars_) throw std::invalid_argument("Poly: bad monomial size");
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    check(a, b);
    Poly r = a;
    for (auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    check(a, b);
    Poly r = a;
    for (auto& [m, c] : b.terms_) r.add_term(m, -c);
    return r;
  }
  Poly operator-() const {
    Poly r(nvars_);
    for (auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    check(a, b);
    Poly r(a.nvars_);
    for (auto& [ma, ca] : a.terms_)
      for (auto& [mb, cb] : b.terms_) {
        Mono m(a.nvars_);
        for (int i = 0; i < a.nvars_; ++i) m[i] = ma[i] + mb[i];
        r.add_term(m, ca * cb);
      }
    return r;
  }
  friend Poly operator*(const Rat& s, const Poly& p) {
    Poly r(p.nvars_);
    if (s.is_zero()) return r;
    for (auto& [m, c] : p.terms_) r.terms_[m] = s * c;
    return r;
  }
  friend Poly operator*(const Poly& p, const Rat& s) { return s * p; }
  Poly& operator+=(const Poly& o) { *this = *this + o; return *this; }
  Poly& operator-=(const Poly& o) { *this = *this - o; return *this; }
  Poly& operator*=(const Poly& o) { *this = *this * o; return *this; }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly pow(int e) const {
    if (e < 0) throw std::invalid_argument("Poly: negative power");
    Poly r = constant(nvars_, Rat(1));
    for (int i = 0; i < e; ++i) r = r * (*this);
    return r;
  }

  Poly derivative(int var) const {
    Poly r(nvars_);
    for (auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Mono d = m;
      d[var] -= 1;
      r.add_term(d, c * Rat(m[var]));
    }
    return r;
  }

  Rat eval(const RatVec& x) const {
    if (x.size() != nvars_) throw std::invalid_argument("Poly::eval: dimension mismatch");
    Rat sum(0);
    for (auto& [m, c] : terms_) {
      Rat t = c;
      for (int i = 0; i < nvars_; ++i)
        if (m[i] > 0) t *= x(i).pow(m[i]);
      sum += t;
    }
    return sum;
  }

  double eval_d(const Eigen::VectorXd& x) const {
    double sum = 0;
    for (auto& [m, c] : terms_) {
      double t = c.to_double();
      for (int i = 0; i < nvars_; ++i)
        for (int k = 0; k < m[i]; ++k) t *= x(i);
      sum += t;
    }
    return sum;
  }

  // Substitute variable i by images[i]; the images live in a common target
  // variable set (all must have equal nvars).
  Poly substitute(const std::vector<Poly>& images) const {
    if (static_cast<int>(images.size()) != nvars_)
      throw std::invalid_argument("Poly::substitute: wrong image count");
    const int out_vars = images.empty() ? 0 : images[0].nvars();
    Poly r(out_vars);
    for (auto& [m, c] : terms_) {
      Poly t = Poly::constant(out_vars, c);
      for (int i = 0; i < nvars_; ++i)
        if (m[i] > 0) t = t * images[i].pow(m[i]);
      r = r + t;
    }
    return r;
  }

  // Recentre: p(x) -> p(x + x0), i.e. express around the point x0.
  Poly shift(const RatVec& x0) const {
    std::vector<Poly> images;
    images.reserve(nvars_);
    for (int i = 0; i < nvars_; ++i)
      images.push_back(Poly::variable(nvars_, i) + Poly::constant(nvars_, x0(i)));
    return substitute(images);
  }

  // Drop every monomial whose degree in `vars` exceeds `cap`.
  Poly truncate_in(const std::vector<int>& vars, int cap) const {
    Poly r(nvars_);
    for (auto& [m, c] : terms_) {
      int s = 0;
      for (int v : vars) s += m[v];
      if (s <= cap) r.terms_[m] = c;
    }
    return r;
  }

  // Extend to a larger variable set; existing variables keep their index.
  Poly extended(int new_nvars) const {
    if (new_nvars < nvars_) throw std::invalid_argument("Poly::extended: shrinking");
    Poly r(new_nvars);
    for (auto& [m, c] : terms_) {
      Mono e = m;
      e.resize(new_nvars, 0);
      r.terms_[e] = c;
    }
    return r;
  }

  std::string str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    // Highest-degree terms first for readability.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      std::string t;
      const bool neg = c.sign() < 0;
      Rat a = neg ? -c : c;
      std::string mono;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += names.at(i);
        if (m[i] > 1) mono += "^" + std::to_string(m[i]);
      }
      if (mono.empty())
        t = a.str();
      else if (a == Rat(1))
        t = mono;
      else
        t = a.str() + "*" + mono;
      if (first) {
        out += (neg ? "-" : "") + t;
        first = false;
      } else {
        out += (neg ? " - " : " + ") + t;
      }
    }
    return out;
  }

 private:
  static void check(const Poly& a, const Poly& b) {
    if (a.nvars_ != b.nvars_) throw std::invalid_argument("Poly: variable count mismatch");
  }

  int nvars_;
  std::map<Mono, Rat, MonoOrder> terms_;
};

// Polynomial map between charts: one component per destination coordinate,
// each a polynomial in the source coordinates.
struct PolyMap {
  ChartPtr src;
  ChartPtr dst;
  std::vector<Poly> comps;

  RatVec eval(const RatVec& x) const {
    RatVec y(static_cast<int>(comps.size()));
    for (std::size_t j = 0; j < comps.size(); ++j) y(static_cast<int>(j)) = comps[j].eval(x);
    return y;
  }
};

}  // namespace strataform
