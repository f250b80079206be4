#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "strataform/chart.hpp"
#include "strataform/poly.hpp"

namespace strataform {

struct AccuracyExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncation context shared by all jets of one computation: the chart, the
// point the jet is taken at, and the storage caps. Base and fiber variables
// are capped separately; on an unsplit chart the fiber group is empty.
struct JetContext {
  ChartPtr chart;
  RatVec base_point;  // full chart dimension; fiber entries normally 0
  int cap_base = 4;
  int cap_fiber = 3;

  std::vector<int> base_vars() const {
    std::vector<int> v;
    for (int i = 0; i < chart->base_count(); ++i) v.push_back(i);
    return v;
  }
  std::vector<int> fiber_vars() const {
    std::vector<int> v;
    for (int i = chart->base_count(); i < chart->dim(); ++i) v.push_back(i);
    return v;
  }
  friend bool operator==(const JetContext& a, const JetContext& b) {
    if (!(*a.chart == *b.chart) || a.cap_base != b.cap_base || a.cap_fiber != b.cap_fiber)
      return false;
    if (a.base_point.size() != b.base_point.size()) return false;
    for (int i = 0; i < a.base_point.size(); ++i)
      if (a.base_point(i) != b.base_point(i)) return false;
    return true;
  }
};

using JetCtxPtr = std::shared_ptr<const JetContext>;

// Truncated power series at the context's base point. The representative is
// stored in centred coordinates u = x - x0 and truncated at (cap_base,
// cap_fiber). Every jet carries its guaranteed-accuracy orders: coefficients
// of monomials with base-degree <= acc_base and fiber-degree <= acc_fiber are
// exact; derivatives and brackets decrement accuracy.
class Jet {
 public:
  Jet() = default;
  Jet(JetCtxPtr ctx, Poly centred_rep, int acc_base, int acc_fiber)
      : ctx_(std::move(ctx)),
        rep_(std::move(centred_rep)),
        acc_base_(acc_base),
        acc_fiber_(acc_fiber) {
    truncate();
  }

  // Exact polynomial (in chart coordinates) -> jet with full accuracy.
  static Jet from_poly(const JetCtxPtr& ctx, const Poly& p) {
    RatVec x0 = ctx->base_point;
    return Jet(ctx, p.shift(x0), ctx->cap_base, ctx->cap_fiber);
  }
  static Jet constant(const JetCtxPtr& ctx, const Rat& c) {
    return Jet(ctx, Poly::constant(ctx->chart->dim(), c), ctx->cap_base, ctx->cap_fiber);
  }
  static Jet zero_like(const Jet& j) {
    return Jet(j.ctx_, Poly(j.ctx_->chart->dim()), j.acc_base_, j.acc_fiber_);
  }

  const JetCtxPtr& ctx() const { return ctx_; }
  const Poly& rep() const { return rep_; }
  int acc_base() const { return acc_base_; }
  int acc_fiber() const { return acc_fiber_; }

  bool is_zero() const { return rep_.is_zero(); }

  // Zero modulo the tracked accuracy window.
  bool is_zero_to_acc() const {
    if (acc_base_ < 0 || acc_fiber_ < 0)
      throw AccuracyExhausted("jet accuracy exhausted before assertion");
    auto bv = ctx_->base_vars();
    auto fv = ctx_->fiber_vars();
    for (auto& [m, c] : rep_.terms()) {
      int db = 0, df = 0;
      for (int v : bv) db += m[v];
      for (int v : fv) df += m[v];
      if (db <= acc_base_ && df <= acc_fiber_ && !c.is_zero()) return false;
    }
    return true;
  }

  // Value at the base point.
  Rat value() const { return rep_.constant_term(); }

  friend Jet operator+(const Jet& a, const Jet& b) {
    check(a, b);
    return Jet(a.ctx_, a.rep_ + b.rep_, std::min(a.acc_base_, b.acc_base_),
               std::min(a.acc_fiber_, b.acc_fiber_));
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    check(a, b);
    return Jet(a.ctx_, a.rep_ - b.rep_, std::min(a.acc_base_, b.acc_base_),
               std::min(a.acc_fiber_, b.acc_fiber_));
  }
  Jet operator-() const { return Jet(ctx_, -rep_, acc_base_, acc_fiber_); }
  friend Jet operator*(const Jet& a, const Jet& b) {
    check(a, b);
    return Jet(a.ctx_, a.rep_ * b.rep_, std::min(a.acc_base_, b.acc_base_),
               std::min(a.acc_fiber_, b.acc_fiber_));
  }
  friend Jet operator*(const Rat& s, const Jet& j) {
    return Jet(j.ctx_, s * j.rep_, j.acc_base_, j.acc_fiber_);
  }
  friend Jet operator*(const Jet& j, const Rat& s) { return s * j; }
  Jet& operator+=(const Jet& o) { *this = *this + o; return *this; }
  Jet& operator-=(const Jet& o) { *this = *this - o; return *this; }

  // d/dx_var; costs one accuracy order in the variable's group.
  Jet derivative(int var) const {
    const bool fiber = ctx_->chart->is_fiber_index(var);
    return Jet(ctx_, rep_.derivative(var), acc_base_ - (fiber ? 0 : 1),
               acc_fiber_ - (fiber ? 1 : 0));
  }

  // Multiplicative inverse modulo the caps; requires nonzero value at the
  // base point. Geometric series in the zero-constant-term part.
  Jet inverse() const {
    const Rat c0 = value();
    if (c0.is_zero()) throw std::domain_error("Jet::inverse: zero constant term");
    const int n = ctx_->chart->dim();
    Poly delta = rep_ - Poly::constant(n, c0);  // vanishes at base point
    Poly acc = Poly::constant(n, Rat(1));
    Poly pw = Poly::constant(n, Rat(1));
    const Rat inv_c0 = Rat(1) / c0;
    const int tmax = ctx_->cap_base + ctx_->cap_fiber;
    for (int k = 1; k <= tmax; ++k) {
      pw = truncated(pw * delta * (-inv_c0));
      if (pw.is_zero()) break;
      acc = acc + pw;
    }
    return Jet(ctx_, inv_c0 * acc, acc_base_, acc_fiber_);
  }

  friend bool operator==(const Jet& a, const Jet& b) {
    check(a, b);
    return a.rep_ == b.rep_;
  }

  std::string str() const { return rep_.str(centred_names()); }

 private:
  static void check(const Jet& a, const Jet& b) {
    if (a.ctx_ == b.ctx_) return;
    if (a.ctx_ && b.ctx_ && *a.ctx_ == *b.ctx_) return;
    throw std::invalid_argument("Jet: context mismatch");
  }

  std::vector<std::string> centred_names() const {
    std::vector<std::string> n = ctx_->chart->names();
    for (int i = 0; i < ctx_->chart->dim(); ++i)
      if (!ctx_->base_point(i).is_zero()) n[i] = "(" + n[i] + "-" + ctx_->base_point(i).str() + ")";
    return n;
  }

  Poly truncated(const Poly& p) const {
    return p.truncate_in(ctx_->base_vars(), ctx_->cap_base)
        .truncate_in(ctx_->fiber_vars(), ctx_->cap_fiber);
  }
  void truncate() { rep_ = truncated(rep_); }

  JetCtxPtr ctx_;
  Poly rep_;
  int acc_base_ = 0;
  int acc_fiber_ = 0;
};

}  // namespace strataform
