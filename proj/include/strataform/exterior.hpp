#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "strataform/chart.hpp"
#include "strataform/jet.hpp"
#include "strataform/poly.hpp"

namespace strataform {

// Strictly increasing index combination.
using IdxSet = std::vector<int>;

// Sorts raw indices, returns the permutation sign, or 0 on a repeat.
inline int normalize_idx(IdxSet& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

// Sign of merging two disjoint sorted sets (count of transpositions), 0 if
// they intersect. On success `out` is the sorted union.
inline int merge_idx(const IdxSet& a, const IdxSet& b, IdxSet& out) {
  out = a;
  out.insert(out.end(), b.begin(), b.end());
  return normalize_idx(out);
}

struct CovariantTag {};
struct ContravariantTag {};

// Antisymmetric-component container for forms (covariant) and multivector
// fields (contravariant). Coefficient ring C is Poly or Jet.
template <class C, class Tag>
class AltTensor {
 public:
  AltTensor() = default;
  AltTensor(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
    if (degree_ < 0) throw std::invalid_argument("AltTensor: negative degree");
  }

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  bool is_zero() const {
    for (auto& [i, c] : comps_)
      if (!c.is_zero()) return false;
    return true;
  }
  const std::map<IdxSet, C>& comps() const { return comps_; }

  void add_term(IdxSet idx, const C& c) {
    if (static_cast<int>(idx.size()) != degree_)
      throw std::invalid_argument("AltTensor: index arity != degree");
    int sign = normalize_idx(idx);
    if (sign == 0 || c.is_zero()) return;
    C v = sign < 0 ? C(-c) : c;
    auto [it, inserted] = comps_.try_emplace(std::move(idx), v);
    if (!inserted) {
      it->second += v;
      if (it->second.is_zero()) comps_.erase(it);
    }
  }

  C component(const IdxSet& idx, const C& zero) const {
    IdxSet k = idx;
    int sign = normalize_idx(k);
    if (sign == 0) return zero;
    auto it = comps_.find(k);
    if (it == comps_.end()) return zero;
    return sign < 0 ? C(-it->second) : it->second;
  }

  // Empty tensors act as degree-agnostic zeros under + and -.
  friend AltTensor operator+(const AltTensor& a, const AltTensor& b) {
    check(a, b);
    if (a.comps_.empty()) return b;
    if (b.comps_.empty()) return a;
    AltTensor r = a;
    for (auto& [i, c] : b.comps_) r.add_term(i, c);
    return r;
  }
  friend AltTensor operator-(const AltTensor& a, const AltTensor& b) {
    check(a, b);
    if (b.comps_.empty()) return a;
    if (a.comps_.empty()) return -b;
    AltTensor r = a;
    for (auto& [i, c] : b.comps_) r.add_term(i, C(-c));
    return r;
  }
  AltTensor operator-() const {
    AltTensor r(chart_, degree_);
    for (auto& [i, c] : comps_) r.comps_[i] = C(-c);
    return r;
  }
  friend AltTensor operator*(const Rat& s, const AltTensor& t) {
    AltTensor r(t.chart_, t.degree_);
    if (s.is_zero()) return r;
    for (auto& [i, c] : t.comps_) r.comps_[i] = C(s * c);
    return r;
  }
  AltTensor& operator+=(const AltTensor& o) { *this = *this + o; return *this; }
  AltTensor& operator-=(const AltTensor& o) { *this = *this - o; return *this; }

  friend bool operator==(const AltTensor& a, const AltTensor& b) {
    check(a, b);
    if (a.is_zero() && b.is_zero()) return true;  // zeros of any formal degree
    if (a.degree_ != b.degree_) return false;
    return (a - b).is_zero();
  }

  static void check(const AltTensor& a, const AltTensor& b) {
    require_same_chart(a.chart_, b.chart_, "AltTensor");
  }

 private:
  ChartPtr chart_;
  int degree_ = 0;
  std::map<IdxSet, C> comps_;
};

// Differential k-form.
template <class C>
using Form = AltTensor<C, CovariantTag>;

// k-vector field.
template <class C>
using MVec = AltTensor<C, ContravariantTag>;

using PolyForm = Form<Poly>;
using PolyMVec = MVec<Poly>;
using JetForm = Form<Jet>;
using JetMVec = MVec<Jet>;

// --- coefficient-ring helpers -------------------------------------------

inline Poly coeff_derivative(const Poly& p, int var) { return p.derivative(var); }
inline Jet coeff_derivative(const Jet& j, int var) { return j.derivative(var); }

// --- wedge ----------------------------------------------------------------

template <class C, class Tag>
AltTensor<C, Tag> wedge(const AltTensor<C, Tag>& a, const AltTensor<C, Tag>& b) {
  AltTensor<C, Tag>::check(a, b);
  AltTensor<C, Tag> r(a.chart(), a.degree() + b.degree());
  if (r.degree() > a.chart()->dim()) return r;
  for (auto& [ia, ca] : a.comps())
    for (auto& [ib, cb] : b.comps()) {
      IdxSet m;
      int sign = merge_idx(ia, ib, m);
      if (sign == 0) continue;
      C prod = ca * cb;
      r.add_term(m, sign < 0 ? C(-prod) : prod);
    }
  return r;
}

// --- exterior derivative ----------------------------------------------------

template <class C>
Form<C> exterior_d(const Form<C>& a) {
  Form<C> r(a.chart(), a.degree() + 1);
  const int n = a.chart()->dim();
  for (auto& [idx, c] : a.comps())
    for (int i = 0; i < n; ++i) {
      C dc = coeff_derivative(c, i);
      if (dc.is_zero()) continue;
      IdxSet m = idx;
      m.insert(m.begin(), i);
      int sign = normalize_idx(m);
      if (sign == 0) continue;
      r.add_term(m, sign < 0 ? C(-dc) : dc);
    }
  return r;
}

// --- interior product (contraction with the first slot) --------------------

template <class C>
Form<C> interior(const MVec<C>& v, const Form<C>& a) {
  if (v.degree() != 1) throw std::invalid_argument("interior: vector field expected");
  require_same_chart(v.chart(), a.chart(), "interior");
  if (a.degree() == 0) return Form<C>(a.chart(), 0);
  Form<C> r(a.chart(), a.degree() - 1);
  for (auto& [idx, c] : a.comps())
    for (std::size_t t = 0; t < idx.size(); ++t) {
      auto it = v.comps().find(IdxSet{idx[t]});
      if (it == v.comps().end() || it->second.is_zero()) continue;
      C prod = it->second * c;
      if (t % 2 == 1) prod = C(-prod);
      IdxSet m;
      m.reserve(idx.size() - 1);
      for (std::size_t s = 0; s < idx.size(); ++s)
        if (s != t) m.push_back(idx[s]);
      r.add_term(m, prod);
    }
  return r;
}

// --- Schouten-Nijenhuis bracket --------------------------------------------
//
// Multivectors are treated as functions in odd coordinates xi_i ("dual" to
// dx_i): a term c * xi_{i1}...xi_{ik} with i1 < ... < ik. The bracket is the
// canonical odd Poisson bracket on these odd functions,
//   [P,Q] = sum_i ( -(dP/dx_i)(dP...dQ/dxi_i) - (-1)^p (dP/dxi_i)(dQ/dx_i) ),
// with left odd derivatives and p the Lambda-degree of P. The overall sign is
// fixed so that [v, f] = v(f) for a vector field v and a function f; then
// [X, Y] is the Lie bracket and [P,P] = 0 characterises Poisson bivectors.

namespace detail {

// Left derivative with respect to xi_var of each component.
template <class C>
MVec<C> odd_derivative(const MVec<C>& p, int var) {
  MVec<C> r(p.chart(), p.degree() > 0 ? p.degree() - 1 : 0);
  if (p.degree() == 0) return r;
  for (auto& [idx, c] : p.comps()) {
    auto pos = std::find(idx.begin(), idx.end(), var);
    if (pos == idx.end()) continue;
    const int t = static_cast<int>(pos - idx.begin());
    IdxSet m;
    m.reserve(idx.size() - 1);
    for (std::size_t s = 0; s < idx.size(); ++s)
      if (static_cast<int>(s) != t) m.push_back(idx[s]);
    r.add_term(m, t % 2 == 1 ? C(-c) : c);
  }
  return r;
}

template <class C>
MVec<C> coeff_derivative_mv(const MVec<C>& p, int var) {
  MVec<C> r(p.chart(), p.degree());
  for (auto& [idx, c] : p.comps()) {
    C dc = coeff_derivative(c, var);
    if (!dc.is_zero()) r.add_term(idx, dc);
  }
  return r;
}

}  // namespace detail

template <class C>
MVec<C> schouten(const MVec<C>& a, const MVec<C>& b) {
  MVec<C>::check(a, b);
  const int p = a.degree(), q = b.degree();
  const int deg = p + q - 1;
  MVec<C> r(a.chart(), std::max(deg, 0));
  if (deg < 0) return r;  // [f, g] = 0 for functions
  const int n = a.chart()->dim();
  const bool p_even = p % 2 == 0;
  for (int i = 0; i < n; ++i) {
    MVec<C> t1 = wedge(detail::coeff_derivative_mv(a, i), detail::odd_derivative(b, i));
    MVec<C> t2 = wedge(detail::odd_derivative(a, i), detail::coeff_derivative_mv(b, i));
    r -= t1;
    if (p_even)
      r -= t2;
    else
      r += t2;
  }
  return r;
}

// --- pullback / pushforward -------------------------------------------------

// phi: src -> dst polynomial map; pulls a form on dst back to src.
inline PolyForm pullback(const PolyMap& phi, const PolyForm& a) {
  if (!(*a.chart() == *phi.dst)) throw std::invalid_argument("pullback: form not on target chart");
  if (static_cast<int>(phi.comps.size()) != phi.dst->dim())
    throw std::invalid_argument("pullback: component count != target dimension");
  const int ns = phi.src->dim();
  // Differentials of the components as 1-forms on the source.
  std::vector<PolyForm> dphi;
  dphi.reserve(phi.comps.size());
  for (const Poly& comp : phi.comps) {
    PolyForm df(phi.src, 1);
    for (int i = 0; i < ns; ++i) {
      Poly d = comp.derivative(i);
      if (!d.is_zero()) df.add_term(IdxSet{i}, d);
    }
    dphi.push_back(std::move(df));
  }
  PolyForm r(phi.src, a.degree());
  for (auto& [idx, c] : a.comps()) {
    Poly cc = c.substitute(phi.comps);
    if (cc.is_zero()) continue;
    PolyForm w(phi.src, 0);
    w.add_term(IdxSet{}, Poly::constant(ns, Rat(1)));
    bool dead = false;
    for (int j : idx) {
      w = wedge(w, dphi[j]);
      if (w.is_zero()) {
        dead = true;
        break;
      }
    }
    if (dead) continue;
    for (auto& [wi, wc] : w.comps()) r.add_term(wi, cc * wc);
  }
  return r;
}

// Pushforward of a multivector field under an invertible constant linear map
// L between charts of equal dimension: components by Lambda^k L, coefficients
// composed with L^{-1}.
inline PolyMVec pushforward_linear(const RatMat& L, const ChartPtr& dst, const PolyMVec& v) {
  const int n = v.chart()->dim();
  if (L.rows() != n || L.cols() != n || dst->dim() != n)
    throw std::invalid_argument("pushforward_linear: dimension mismatch");
  RatMat Linv = exact_inverse(L);
  std::vector<Poly> linv_images;
  linv_images.reserve(n);
  for (int i = 0; i < n; ++i) {
    Poly img(n);
    for (int j = 0; j < n; ++j)
      if (!Linv(i, j).is_zero()) img += Linv(i, j) * Poly::variable(n, j);
    linv_images.push_back(img);
  }
  PolyMVec r(dst, v.degree());
  for (auto& [idx, c] : v.comps()) {
    Poly cc = c.substitute(linv_images);
    if (cc.is_zero()) continue;
    // Expand each basis direction through L and wedge the columns.
    MVec<Poly> acc(dst, 0);
    acc.add_term(IdxSet{}, Poly::constant(n, Rat(1)));
    for (int i : idx) {
      MVec<Poly> col(dst, 1);
      for (int j = 0; j < n; ++j)
        if (!L(j, i).is_zero()) col.add_term(IdxSet{j}, Poly::constant(n, L(j, i)));
      acc = wedge(acc, col);
      if (acc.is_zero()) break;
    }
    for (auto& [ai, ac] : acc.comps()) r.add_term(ai, cc * ac);
  }
  return r;
}

// --- evaluation -------------------------------------------------------------

// Value of a 2-form at a point as a skew matrix M(i,j) = a(e_i, e_j).
inline RatMat eval_two_form(const PolyForm& a, const RatVec& x) {
  if (a.degree() != 2) throw std::invalid_argument("eval_two_form: degree != 2");
  const int n = a.chart()->dim();
  RatMat m = rat_zero(n, n);
  for (auto& [idx, c] : a.comps()) {
    Rat v = c.eval(x);
    m(idx[0], idx[1]) = v;
    m(idx[1], idx[0]) = -v;
  }
  return m;
}

inline Eigen::MatrixXd eval_two_form_d(const PolyForm& a, const Eigen::VectorXd& x) {
  if (a.degree() != 2) throw std::invalid_argument("eval_two_form_d: degree != 2");
  const int n = a.chart()->dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (auto& [idx, c] : a.comps()) {
    double v = c.eval_d(x);
    m(idx[0], idx[1]) = v;
    m(idx[1], idx[0]) = -v;
  }
  return m;
}

// --- conversions -------------------------------------------------------------

template <class Tag>
AltTensor<Jet, Tag> to_jets(const AltTensor<Poly, Tag>& a, const JetCtxPtr& ctx) {
  if (!(*a.chart() == *ctx->chart)) throw std::invalid_argument("to_jets: chart mismatch");
  AltTensor<Jet, Tag> r(ctx->chart, a.degree());
  for (auto& [idx, c] : a.comps()) r.add_term(idx, Jet::from_poly(ctx, c));
  return r;
}

// --- printing ----------------------------------------------------------------

inline std::string idx_str(const IdxSet& idx, const ChartPtr& chart, bool covariant) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += "^";
    s += (covariant ? "d" : "d/d") + chart->name(idx[i]);
  }
  return s;
}

template <class C, class Tag>
std::string tensor_str(const AltTensor<C, Tag>& t, bool covariant) {
  if (t.comps().empty()) return "0";
  std::string out;
  bool first = true;
  for (auto& [idx, c] : t.comps()) {
    std::string coeff;
    if constexpr (std::is_same_v<C, Poly>)
      coeff = c.str(t.chart()->names());
    else
      coeff = c.str();
    std::string term;
    if (idx.empty())
      term = coeff;
    else if (coeff == "1")
      term = idx_str(idx, t.chart(), covariant);
    else
      term = "(" + coeff + ")*" + idx_str(idx, t.chart(), covariant);
    out += (first ? "" : " + ") + term;
    first = false;
  }
  return out;
}

}  // namespace strataform
