#include "strataform/linf.hpp"

#include <algorithm>
#include <functional>

namespace strataform {
namespace linf {

FoliationForm foliation_zero(const ChartPtr& chart, const std::vector<int>& f_coords, int degree) {
  return FoliationForm{chart, f_coords, PolyForm(chart, degree)};
}

FoliationForm foliation_d(const FoliationForm& a) {
  PolyForm full = exterior_d(a.form);
  PolyForm leaf(a.chart, full.degree());
  for (auto& [idx, c] : full.comps()) {
    bool inside = true;
    for (int i : idx)
      if (std::find(a.f_coords.begin(), a.f_coords.end(), i) == a.f_coords.end()) inside = false;
    if (inside) leaf.add_term(idx, c);
  }
  return FoliationForm{a.chart, a.f_coords, std::move(leaf)};
}

JetMVec invert_two_form_jet(const JetForm& w, const std::vector<int>& block) {
  if (w.degree() != 2) throw std::invalid_argument("invert_two_form_jet: degree != 2");
  if (w.comps().empty()) throw std::invalid_argument("invert_two_form_jet: empty form");
  const JetCtxPtr ctx = w.comps().begin()->second.ctx();
  const int b = static_cast<int>(block.size());

  // Jet entries of the block and their values at the base point.
  std::vector<std::vector<Jet>> W(b, std::vector<Jet>(b, Jet::constant(ctx, Rat(0))));
  RatMat W0 = rat_zero(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      if (block[i] == block[j]) continue;
      IdxSet idx{std::min(block[i], block[j]), std::max(block[i], block[j])};
      auto it = w.comps().find(idx);
      if (it == w.comps().end()) continue;
      W[i][j] = block[i] < block[j] ? it->second : Jet(-it->second);
      W0(i, j) = W[i][j].value();
    }
  if (exact_det(W0).is_zero())
    throw NondegenerateError(
        "invert_two_form_jet: block value degenerate at the base point (block size " +
        std::to_string(b) + ")");
  RatMat W0inv = exact_inverse(W0);

  auto jconst = [&](const Rat& c) { return Jet::constant(ctx, c); };
  auto mat_mul = [&](const std::vector<std::vector<Jet>>& A,
                     const std::vector<std::vector<Jet>>& B) {
    std::vector<std::vector<Jet>> C(b, std::vector<Jet>(b, jconst(Rat(0))));
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) {
        Jet sum = jconst(Rat(0));
        for (int k = 0; k < b; ++k) sum += A[i][k] * B[k][j];
        C[i][j] = sum;
      }
    return C;
  };

  // Neumann series: W^{-1} = (sum_k (-W0^{-1} D)^k) W0^{-1}, D = W - W0.
  std::vector<std::vector<Jet>> D(b, std::vector<Jet>(b, jconst(Rat(0))));
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) D[i][j] = W[i][j] - jconst(W0(i, j));
  std::vector<std::vector<Jet>> negW0inv(b, std::vector<Jet>(b, jconst(Rat(0))));
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) negW0inv[i][j] = jconst(-W0inv(i, j));
  std::vector<std::vector<Jet>> M = mat_mul(negW0inv, D);

  std::vector<std::vector<Jet>> acc(b, std::vector<Jet>(b, jconst(Rat(0))));
  for (int i = 0; i < b; ++i) acc[i][i] = jconst(Rat(1));
  std::vector<std::vector<Jet>> pw = acc;
  const int tmax = ctx->cap_base + ctx->cap_fiber;
  for (int k = 1; k <= tmax; ++k) {
    pw = mat_mul(pw, M);
    bool all_zero = true;
    for (int i = 0; i < b && all_zero; ++i)
      for (int j = 0; j < b; ++j)
        if (!pw[i][j].is_zero()) {
          all_zero = false;
          break;
        }
    if (all_zero) break;
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) acc[i][j] += pw[i][j];
  }
  std::vector<std::vector<Jet>> W0invJ(b, std::vector<Jet>(b, jconst(Rat(0))));
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) W0invJ[i][j] = jconst(W0inv(i, j));
  std::vector<std::vector<Jet>> Winv = mat_mul(acc, W0invJ);

  JetMVec out(ctx->chart, 2);
  for (int i = 0; i < b; ++i)
    for (int j = i + 1; j < b; ++j)
      if (!Winv[i][j].is_zero()) out.add_term(IdxSet{block[i], block[j]}, Winv[i][j]);
  return out;
}

bool is_abelian(const VData& V, const JetMVec& a) {
  const int nb = V.chart()->base_count();
  auto fiber_vars = V.ctx->fiber_vars();
  for (auto& [idx, c] : a.comps()) {
    for (int i : idx)
      if (i < nb) return false;  // horizontal component
    for (auto& [mono, coeff] : c.rep().terms())
      for (int f : fiber_vars)
        if (mono[f] > 0) return false;  // fiber-dependent coefficient
  }
  return true;
}

JetMVec project_abelian(const VData& V, const JetMVec& a) {
  const int nb = V.chart()->base_count();
  auto fiber_vars = V.ctx->fiber_vars();
  JetMVec out(V.chart(), a.degree());
  for (auto& [idx, c] : a.comps()) {
    bool vertical = true;
    for (int i : idx)
      if (i < nb) vertical = false;
    if (!vertical) continue;
    // Restrict to the zero section: drop fiber-variable dependence.
    Jet restricted(c.ctx(), c.rep().truncate_in(fiber_vars, 0), c.acc_base(), c.acc_fiber());
    if (!restricted.is_zero()) out.add_term(idx, restricted);
  }
  return out;
}

JetMVec to_abelian(const VData& V, const FoliationForm& s) {
  if (s.f_coords != V.gotay.f_coords)
    throw std::invalid_argument("to_abelian: foliation coordinates do not match the V-data");
  const int nb = V.chart()->base_count();
  JetMVec out(V.chart(), s.degree());
  for (auto& [idx, c] : s.form.comps()) {
    IdxSet vert;
    for (int i : idx) {
      auto pos = std::find(V.gotay.f_coords.begin(), V.gotay.f_coords.end(), i);
      vert.push_back(nb + static_cast<int>(pos - V.gotay.f_coords.begin()));
    }
    out.add_term(vert, Jet::from_poly(V.ctx, c.extended(V.chart()->dim())));
  }
  return out;
}

JetMVec derived_bracket_of(const VData& V, const JetMVec& generator,
                           const std::vector<JetMVec>& args) {
  JetMVec b = generator;
  for (auto& x : args) {
    if (!is_abelian(V, x))
      throw std::invalid_argument("derived_bracket: argument is not an abelian element");
    b = schouten(b, x);
    if (b.is_zero()) break;
  }
  return project_abelian(V, b);
}

JetMVec derived_bracket(const VData& V, const std::vector<JetMVec>& args) {
  return derived_bracket_of(V, V.poisson, args);
}

namespace {

bool zero_to_acc(const JetMVec& a) {
  for (auto& [idx, c] : a.comps())
    if (!c.is_zero_to_acc()) return false;
  return true;
}

}  // namespace

VData build_vdata(const foliation::GotayForm& g, int d_base, int d_fiber) {
  if (d_base < 1 || d_fiber < 1)
    throw AccuracyExhausted(
        "build_vdata: truncation orders too small to certify [P,P] = 0 (need >= 1 each)");
  VData V;
  V.gotay = g;
  auto ctx = std::make_shared<JetContext>();
  ctx->chart = g.split_chart;
  ctx->base_point = g.base_point;
  ctx->cap_base = d_base;
  ctx->cap_fiber = d_fiber;
  V.ctx = ctx;
  V.fiber_count = static_cast<int>(g.f_coords.size());

  JetForm w = to_jets(g.form.form(), ctx);
  std::vector<int> all(g.split_chart->dim());
  for (int i = 0; i < g.split_chart->dim(); ++i) all[i] = i;
  V.poisson = invert_two_form_jet(w, all);

  // [P,P] = 0 to the tracked accuracy.
  JetMVec pp = schouten(V.poisson, V.poisson);
  if (!zero_to_acc(pp))
    throw AccuracyExhausted("build_vdata: [P,P] != 0 within the requested truncation orders");

  // Sign convention self-test: l1 equals d_F on coordinate functions.
  const int nb = g.split_chart->base_count();
  for (int i = 0; i < nb; ++i) {
    JetMVec f(g.split_chart, 0);
    f.add_term(IdxSet{}, Jet::from_poly(ctx, Poly::variable(g.split_chart->dim(), i)));
    JetMVec l1f = derived_bracket(V, {f});
    PolyForm coord(g.form.chart(), 0);
    coord.add_term(IdxSet{}, Poly::variable(nb, i));
    FoliationForm df = foliation_d(FoliationForm{g.form.chart(), g.f_coords, coord});
    JetMVec expect = to_abelian(V, df);
    if (!zero_to_acc(l1f - expect))
      throw std::logic_error("build_vdata: l1 does not equal d_F on coordinate functions");
  }
  return V;
}

JetMVec LinfStructure::l0() const {
  if (curved_l0) return *curved_l0;
  return project_abelian(vdata, vdata.poisson);
}

LinfStructure make_structure(VData v) { return LinfStructure{std::move(v), std::nullopt}; }

namespace {

int shifted_degree(const JetMVec& a) { return a.degree() - 1; }

int koszul_sign(const std::vector<int>& order, const std::vector<int>& degrees) {
  int sign = 1;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (order[i] > order[j] && degrees[order[i]] % 2 != 0 && degrees[order[j]] % 2 != 0)
        sign = -sign;
  return sign;
}

void unshuffles(int n, int p, std::vector<std::vector<int>>& out) {
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == p) {
      std::vector<int> order = pick;
      for (int i = 0; i < n; ++i)
        if (std::find(pick.begin(), pick.end(), i) == pick.end()) order.push_back(i);
      out.push_back(order);
      return;
    }
    for (int i = start; i < n; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
}

// Generalized Jacobi defect of arity n, including the l0 term.
JetMVec jacobi_defect(const LinfStructure& L, const std::vector<JetMVec>& args) {
  const VData& V = L.vdata;
  const int n = static_cast<int>(args.size());
  std::vector<int> degrees;
  for (auto& a : args) degrees.push_back(shifted_degree(a));
  JetMVec total(V.chart(), 0);
  for (int p = 0; p <= n; ++p) {
    std::vector<std::vector<int>> orders;
    unshuffles(n, p, orders);
    for (auto& order : orders) {
      int sign = koszul_sign(order, degrees);
      std::vector<JetMVec> inner_args;
      for (int i = 0; i < p; ++i) inner_args.push_back(args[order[i]]);
      JetMVec inner = p == 0 ? L.l0() : derived_bracket(V, inner_args);
      if (inner.is_zero()) continue;
      std::vector<JetMVec> outer_args;
      outer_args.push_back(inner);
      for (int i = p; i < n; ++i) outer_args.push_back(args[order[i]]);
      JetMVec term = derived_bracket(V, outer_args);
      if (term.is_zero()) continue;
      total = sign > 0 ? total + term : total - term;
    }
  }
  return total;
}

Poly random_base_poly(std::mt19937_64& rng, int nvars, int nb, int max_deg) {
  std::uniform_int_distribution<long> num(-2, 2);
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<int> var(0, nb - 1);
  Poly p(nvars);
  Mono m(nvars, 0);
  int budget = deg(rng);
  for (int i = 0; i < budget; ++i) m[var(rng)] += 1;
  long c = num(rng);
  p.add_term(m, Rat(c == 0 ? 1 : c));
  return p;
}

JetMVec random_abelian(const VData& V, std::mt19937_64& rng, int degree) {
  const int nb = V.chart()->base_count();
  const int nt = V.chart()->dim();
  JetMVec out(V.chart(), degree);
  if (degree > V.fiber_count) return out;
  std::uniform_int_distribution<int> pick(0, std::max(0, V.fiber_count - 1));
  for (int t = 0; t < 2; ++t) {
    IdxSet idx;
    int guard = 0;
    while (static_cast<int>(idx.size()) < degree && guard++ < 64) {
      int i = nb + pick(rng);
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    if (static_cast<int>(idx.size()) < degree) break;
    out.add_term(idx, Jet::from_poly(V.ctx, random_base_poly(rng, nt, nb, 2)));
  }
  return out;
}

}  // namespace

VerifyReport linf_verify(const LinfStructure& L, int K_max, int trials, unsigned seed) {
  VerifyReport rep;
  const VData& V = L.vdata;
  std::mt19937_64 rng(seed);
  const int max_form_degree = std::max(V.fiber_count, 0);

  JetMVec pp_half = Rat(1, 2) * schouten(V.poisson, V.poisson);

  for (int n = 1; n <= K_max && rep.passed; ++n) {
    rep.checked_arities = n;
    for (int t = 0; t < trials && rep.passed; ++t) {
      std::vector<JetMVec> args;
      std::uniform_int_distribution<int> dg(0, max_form_degree);
      for (int i = 0; i < n; ++i) args.push_back(random_abelian(V, rng, dg(rng)));

      JetMVec defect = jacobi_defect(L, args);
      // Independent route: the defect as the derived bracket of [P,P]/2
      // (valid for the uncurved structure, where l0 = pi(P)).
      if (!L.curved_l0) {
        JetMVec via_pp = derived_bracket_of(V, pp_half, args);
        if (!zero_to_acc(defect - via_pp)) {
          rep.jacobiator_matches = false;
          rep.passed = false;
          rep.first_failure_arity = n;
          rep.witness = "jacobiator mismatch at arity " + std::to_string(n) + ", trial " +
                        std::to_string(t);
          break;
        }
      }
      if (!zero_to_acc(defect)) {
        rep.passed = false;
        rep.first_failure_arity = n;
        rep.witness =
            "jacobi identity fails at arity " + std::to_string(n) + ", trial " + std::to_string(t);
        if (n == 1) rep.l1_square_ok = false;
        break;
      }
    }
  }
  return rep;
}

bool strictness_check(const LinfStructure& L) {
  if (L.curved_l0 && !L.curved_l0->is_zero()) return false;
  const VData& V = L.vdata;
  if (!zero_to_acc(project_abelian(V, V.poisson))) return false;
  const int nb = V.chart()->base_count();
  for (int i = 0; i < nb; ++i) {
    PolyForm coord(V.gotay.form.chart(), 0);
    coord.add_term(IdxSet{}, Poly::variable(nb, i));
    FoliationForm f{V.gotay.form.chart(), V.gotay.f_coords, coord};
    JetMVec lhs = derived_bracket(V, {to_abelian(V, f)});
    JetMVec rhs = to_abelian(V, foliation_d(f));
    if (!zero_to_acc(lhs - rhs)) return false;
    // d_F^2 = 0 transported through l1.
    JetMVec l1df = derived_bracket(V, {rhs});
    JetMVec ddf = to_abelian(V, foliation_d(foliation_d(f)));
    if (!zero_to_acc(l1df - ddf)) return false;
  }
  return true;
}

Augmentation curved_augmentation(const stratify::FormField& omega_ref,
                                 const std::vector<int>& f_coords, const PolyMVec& X) {
  require_same_chart(omega_ref.chart(), X.chart(), "curved_augmentation");
  PolyForm eta_full = interior(X, omega_ref.form());
  PolyForm leaf(omega_ref.chart(), 1);
  for (auto& [idx, c] : eta_full.comps())
    if (std::find(f_coords.begin(), f_coords.end(), idx[0]) != f_coords.end())
      leaf.add_term(idx, c);
  FoliationForm eta{omega_ref.chart(), f_coords, std::move(leaf)};
  FoliationForm deta = foliation_d(eta);
  return Augmentation{eta, deta.is_zero()};
}

McResult mc_series(const LinfStructure& L, const JetMVec& sigma, int K) {
  if (sigma.degree() != 1 && !sigma.is_zero())
    throw std::invalid_argument("mc_series: sigma must be a foliation 1-form");
  if (!is_abelian(L.vdata, sigma))
    throw std::invalid_argument("mc_series: sigma is not an abelian element");
  McResult out;
  JetMVec total = L.l0();
  Rat factorial(1);
  std::vector<JetMVec> args;
  for (int k = 1; k <= K; ++k) {
    args.push_back(sigma);
    factorial *= Rat(k);
    JetMVec term = derived_bracket(L.vdata, args);
    if (!term.is_zero()) total = total + (Rat(1) / factorial) * term;
  }
  out.value = total;
  out.coisotropic_to_order = zero_to_acc(total);
  return out;
}

TangentComplexReport tangent_complex(const FoliationForm& l0, const RatVec& p, int dim_y, int m,
                                     bool chi_includes_degree0) {
  TangentComplexReport rep;
  rep.dim_y = dim_y;
  rep.m = m;
  rep.chi_includes_degree0 = chi_includes_degree0;

  for (auto& [idx, c] : l0.form.comps())
    if (!c.eval(p).is_zero())
      throw std::invalid_argument("tangent_complex: the point is not a zero of l0");

  RatMat J = rat_zero(m, dim_y);
  for (std::size_t a = 0; a < l0.f_coords.size(); ++a) {
    auto it = l0.form.comps().find(IdxSet{l0.f_coords[a]});
    if (it == l0.form.comps().end()) continue;
    for (int k = 0; k < dim_y; ++k) J(static_cast<int>(a), k) = it->second.derivative(k).eval(p);
  }
  rep.rank_d0 = exact_rank(J);

  auto binom = [](int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
  };
  for (int k = 1; k <= m; ++k) rep.fiber_dims.push_back(binom(m, k));

  rep.cohomology.push_back(dim_y - rep.rank_d0);
  if (m >= 1) rep.cohomology.push_back(binom(m, 1) - rep.rank_d0);
  for (int k = 2; k <= m; ++k) rep.cohomology.push_back(binom(m, k));

  int chi = 0;
  for (int k = 1; k <= m; ++k) chi += (k % 2 == 1 ? 1 : -1) * binom(m, k);
  if (chi_includes_degree0) chi = 1 - chi;  // alternating sum starting at degree 0
  rep.chi_fiber = chi;
  rep.vir_dim = dim_y - chi;
  rep.convention = chi_includes_degree0
                       ? "chi over fiber degrees >= 0 with sign (-1)^k"
                       : "chi over fiber degrees >= 1 with sign (-1)^(k+1)";
  return rep;
}

}  // namespace linf
}  // namespace strataform
