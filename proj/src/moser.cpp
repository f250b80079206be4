#include "strataform/moser.hpp"

#include <algorithm>
#include <cmath>

namespace strataform {
namespace moser {

PolyMap RadialFlow::map_at(const Rat& t) const {
  const int n = tube.total->dim();
  std::vector<Poly> comps;
  const Rat s = Rat(1) - t;
  for (int i = 0; i < n; ++i) {
    bool fiber = std::find(tube.fibers.begin(), tube.fibers.end(), i) != tube.fibers.end();
    comps.push_back(fiber ? s * Poly::variable(n, i) : Poly::variable(n, i));
  }
  return PolyMap{tube.total, tube.total, comps};
}

Eigen::VectorXd RadialFlow::apply(double t, const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = x;
  for (int f : tube.fibers) y(f) *= (1.0 - t);
  return y;
}

RadialFlow radial_flow(const foliation::TubeSystem& tube) { return RadialFlow{tube}; }

RescalingReport rescaling_check(const foliation::TubeSystem& tube,
                                const stratify::FormField& w) {
  RescalingReport rep;
  std::vector<bool> seen(3, false);
  for (auto& [idx, c] : w.form().comps()) {
    int weight = 0;
    for (int i : idx)
      if (std::find(tube.fibers.begin(), tube.fibers.end(), i) != tube.fibers.end()) ++weight;
    // Exponential fiber scaling multiplies each dx_f by e^t, so a component
    // of fiber weight w rescales by e^{w t} exactly when its coefficient is
    // constant; non-constant fiber-block coefficients break the fit.
    if (weight > 0 && !c.is_constant()) rep.exponential_fit = false;
    if (!seen[weight]) {
      rep.blocks.push_back({weight, weight});
      seen[weight] = true;
      if (weight == 2) rep.differs_from_claimed = true;
    }
  }
  return rep;
}

InterpolationResult interpolate_forms(const stratify::FormField& omega_high,
                                      const foliation::TubeSystem& tube,
                                      const std::vector<int>& g_indices) {
  InterpolationResult out;
  const int n = omega_high.dim();
  const int nt = n + 1;  // chart variables plus t (last)

  // omega_t = (R^{1-t})^* omega_high with R^s the fiber scaling by (1-s):
  // substitute x_f -> t x_f and scale each component by t^{fiber weight of
  // the index pair}. At t = 1 this is omega_high; at t = 0 the retracted
  // pullback pi^* omega_alpha.
  auto is_fiber = [&](int i) {
    return std::find(tube.fibers.begin(), tube.fibers.end(), i) != tube.fibers.end();
  };
  Poly t_var = Poly::variable(nt, n);
  std::vector<Poly> images;
  for (int i = 0; i < n; ++i) {
    Poly xi = Poly::variable(nt, i);
    images.push_back(is_fiber(i) ? t_var * xi : xi);
  }
  images.push_back(t_var);
  auto transport = [&](const Poly& c) { return c.extended(nt).substitute(images); };
  for (auto& [idx, c] : omega_high.form().comps()) {
    Poly cc = transport(c);
    int weight = (is_fiber(idx[0]) ? 1 : 0) + (is_fiber(idx[1]) ? 1 : 0);
    for (int wgt = 0; wgt < weight; ++wgt) cc = cc * t_var;
    if (!cc.is_zero()) out.omega_t[idx] = cc;
  }

  // gamma_t = (1/t) (transported E -| omega), E the fiber Euler field; every
  // transported monomial carries a positive power of t, so dividing by t is
  // exact and gamma_t is polynomial with d omega_t/dt = d gamma_t.
  PolyMVec euler(omega_high.chart(), 1);
  for (int f : tube.fibers) euler.add_term(IdxSet{f}, Poly::variable(n, f));
  PolyForm contraction = interior(euler, omega_high.form());
  std::map<int, Poly> gamma;  // 1-form components over (x, t)
  for (auto& [idx, c] : contraction.comps()) {
    Poly cc = transport(c);
    int weight = is_fiber(idx[0]) ? 1 : 0;
    for (int wgt = 0; wgt < weight; ++wgt) cc = cc * t_var;
    Poly divided(nt);
    for (auto& [m, coeff] : cc.terms()) {
      if (m[n] < 1) throw std::logic_error("interpolate_forms: contraction not divisible by t");
      Mono mx = m;
      mx[n] -= 1;
      divided.add_term(mx, coeff);
    }
    gamma[idx[0]] = gamma.count(idx[0]) ? gamma[idx[0]] + divided : divided;
  }

  // beta_t = integral_0^t gamma_u du, polynomial in t.
  for (auto& [i, g] : gamma) {
    Poly integrated(nt);
    for (auto& [m, coeff] : g.terms()) {
      Mono mi = m;
      mi[n] += 1;
      integrated.add_term(mi, coeff / Rat(mi[n]));
    }
    if (!integrated.is_zero()) out.beta_t[i] = integrated;
  }

  out.beta_vanishes_on_normals = true;
  for (int f : tube.fibers)
    if (out.beta_t.count(f)) out.beta_vanishes_on_normals = false;

  // Family evaluators from the symbolic payloads.
  FormFamily fam;
  fam.chart = omega_high.chart();
  fam.g_indices = g_indices;
  fam.name = "interpolated";
  auto omega_sym = out.omega_t;
  auto gamma_sym = gamma;
  auto lift = [n](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd xt(n + 1);
    xt.head(n) = x;
    xt(n) = t;
    return xt;
  };
  fam.omega = [omega_sym, n, lift](double t, const Eigen::VectorXd& x) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd xt = lift(t, x);
    for (auto& [idx, c] : omega_sym) {
      double v = c.eval_d(xt);
      m(idx[0], idx[1]) = v;
      m(idx[1], idx[0]) = -v;
    }
    return m;
  };
  fam.omega_dx = [omega_sym, n, lift](double t, const Eigen::VectorXd& x, int k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd xt = lift(t, x);
    for (auto& [idx, c] : omega_sym) {
      double v = c.derivative(k).eval_d(xt);
      m(idx[0], idx[1]) = v;
      m(idx[1], idx[0]) = -v;
    }
    return m;
  };
  fam.gamma = [gamma_sym, n, lift](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd xt = lift(t, x);
    for (auto& [i, c] : gamma_sym) g(i) = c.eval_d(xt);
    return g;
  };
  fam.gamma_dx = [gamma_sym, n, lift](double t, const Eigen::VectorXd& x, int k) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd xt = lift(t, x);
    for (auto& [i, c] : gamma_sym) g(i) = c.derivative(k).eval_d(xt);
    return g;
  };
  out.family = fam;

  // Adaptive Simpson quadrature of gamma in t, per component.
  out.beta_quadrature = [fam, n](double t, const Eigen::VectorXd& x, double tol) {
    std::function<Eigen::VectorXd(double, double, const Eigen::VectorXd&, const Eigen::VectorXd&,
                                  const Eigen::VectorXd&, double, int)>
        simpson = [&](double a, double b, const Eigen::VectorXd& fa, const Eigen::VectorXd& fb,
                      const Eigen::VectorXd& fm, double eps, int depth) -> Eigen::VectorXd {
      double m = (a + b) / 2;
      double lm = (a + m) / 2, rm = (m + b) / 2;
      Eigen::VectorXd flm = fam.gamma(lm, x), frm = fam.gamma(rm, x);
      Eigen::VectorXd whole = (b - a) / 6 * (fa + 4 * fm + fb);
      Eigen::VectorXd left = (m - a) / 6 * (fa + 4 * flm + fm);
      Eigen::VectorXd right = (b - m) / 6 * (fm + 4 * frm + fb);
      if (depth <= 0 || (left + right - whole).norm() < 15 * eps)
        return left + right + (left + right - whole) / 15;
      return simpson(a, m, fa, fm, flm, eps / 2, depth - 1) +
             simpson(m, b, fm, fb, frm, eps / 2, depth - 1);
    };
    if (t == 0) return Eigen::VectorXd::Zero(n).eval();
    Eigen::VectorXd fa = fam.gamma(0, x), fb = fam.gamma(t, x), fm = fam.gamma(t / 2, x);
    return simpson(0, t, fa, fb, fm, tol, 28);
  };
  return out;
}

FormFamily analytic_family_2d() {
  FormFamily fam;
  fam.chart = Chart::standard(2);
  fam.g_indices = {0, 1};
  fam.name = "analytic-2d";
  fam.omega = [](double t, const Eigen::VectorXd&) {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1 + t / 2, -(1 + t / 2), 0;
    return m;
  };
  fam.omega_dx = [](double, const Eigen::VectorXd&, int) {
    return Eigen::MatrixXd::Zero(2, 2).eval();
  };
  // d omega/dt = 1/2 dx1^dx2 = d(1/2 x1 dx2).
  fam.gamma = [](double, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g << 0, x(0) / 2;
    return g;
  };
  fam.gamma_dx = [](double, const Eigen::VectorXd&, int k) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2);
    if (k == 0) g(1) = 0.5;
    return g;
  };
  return fam;
}

FormFamily glue_family_4d(double C, double c) {
  FormFamily fam;
  fam.chart = Chart::standard(4);
  fam.g_indices = {0, 1, 2, 3};
  fam.name = "glue-4d";
  fam.omega = [C, c](double t, const Eigen::VectorXd&) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 1) = 1;
    m(1, 0) = -1;
    double s = C * std::exp(c * (t - 1));
    m(2, 3) = s;
    m(3, 2) = -s;
    return m;
  };
  fam.omega_dx = [](double, const Eigen::VectorXd&, int) {
    return Eigen::MatrixXd::Zero(4, 4).eval();
  };
  // d omega/dt = cC e^{c(t-1)} dx3^dx4 = d(cC e^{c(t-1)} x3 dx4).
  fam.gamma = [C, c](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
    g(3) = c * C * std::exp(c * (t - 1)) * x(2);
    return g;
  };
  fam.gamma_dx = [C, c](double t, const Eigen::VectorXd&, int k) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
    if (k == 2) g(3) = c * C * std::exp(c * (t - 1));
    return g;
  };
  return fam;
}

namespace {

struct MoserField {
  const FormFamily& fam;
  int n;
  const std::vector<int>& G;

  // X_t on the G-block from Omega_GG^T X = -gamma_G, plus the off-block
  // consistency residual.
  Eigen::VectorXd velocity(double t, const Eigen::VectorXd& x, double* offblock = nullptr) const {
    Eigen::MatrixXd W = fam.omega(t, x);
    Eigen::VectorXd g = fam.gamma(t, x);
    const int k = static_cast<int>(G.size());
    Eigen::MatrixXd Wgg(k, k);
    Eigen::VectorXd gg(k);
    for (int a = 0; a < k; ++a) {
      gg(a) = g(G[a]);
      for (int b = 0; b < k; ++b) Wgg(a, b) = W(G[b], G[a]);  // transpose indexing
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Wgg);
    if (!lu.isInvertible())
      throw std::runtime_error(fam.name + ": singular G-block at t = " + std::to_string(t));
    Eigen::VectorXd Xg = lu.solve(-gg);
    Eigen::VectorXd X = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < k; ++a) X(G[a]) = Xg(a);
    if (offblock) {
      double worst = 0;
      for (int v = 0; v < n; ++v) {
        if (std::find(G.begin(), G.end(), v) != G.end()) continue;
        double r = g(v);
        for (int a = 0; a < k; ++a) r += Xg(a) * W(G[a], v);
        worst = std::max(worst, std::abs(r));
      }
      *offblock = worst;
    }
    return X;
  }

  // dX/dx_k from the differentiated linear system.
  Eigen::MatrixXd jacobian(double t, const Eigen::VectorXd& x) const {
    Eigen::MatrixXd W = fam.omega(t, x);
    const int k = static_cast<int>(G.size());
    Eigen::MatrixXd Wgg(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) Wgg(a, b) = W(G[b], G[a]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Wgg);
    Eigen::VectorXd X = velocity(t, x);
    Eigen::VectorXd Xg(k);
    for (int a = 0; a < k; ++a) Xg(a) = X(G[a]);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < n; ++col) {
      Eigen::MatrixXd dW = fam.omega_dx(t, x, col);
      Eigen::VectorXd dg = fam.gamma_dx(t, x, col);
      Eigen::VectorXd rhs(k);
      for (int a = 0; a < k; ++a) {
        rhs(a) = -dg(G[a]);
        for (int b = 0; b < k; ++b) rhs(a) -= dW(G[b], G[a]) * Xg(b);
      }
      Eigen::VectorXd dXg = lu.solve(rhs);
      for (int a = 0; a < k; ++a) J(G[a], col) = dXg(a);
    }
    return J;
  }
};

}  // namespace

FlowResult moser_solve(const FormFamily& family, const stratify::Box& box, int sample_count,
                       int steps, unsigned seed, double tolerance) {
  FlowResult out;
  out.steps = steps;
  out.tolerance = tolerance;
  const int n = family.chart->dim();
  MoserField field{family, n, family.g_indices};
  std::mt19937_64 rng(seed);

  const double h = 1.0 / steps;
  for (int j = 0; j <= steps; ++j) out.grid.push_back(j * h);

  for (int s = 0; s < sample_count; ++s) {
    Eigen::VectorXd x = box.sample(rng);
    Eigen::VectorXd x0 = x;
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
    if (s == 0) out.first_trajectory.push_back({0.0, x});
    for (int j = 0; j < steps; ++j) {
      const double t = j * h;
      // Classical RK4 on the coupled (x, J) system.
      double off = 0;
      Eigen::VectorXd k1 = field.velocity(t, x, &off);
      out.max_offblock_residual = std::max(out.max_offblock_residual, off);
      Eigen::MatrixXd A1 = field.jacobian(t, x) * J;
      Eigen::VectorXd k2 = field.velocity(t + h / 2, x + h / 2 * k1);
      Eigen::MatrixXd A2 = field.jacobian(t + h / 2, x + h / 2 * k1) * (J + h / 2 * A1);
      Eigen::VectorXd k3 = field.velocity(t + h / 2, x + h / 2 * k2);
      Eigen::MatrixXd A3 = field.jacobian(t + h / 2, x + h / 2 * k2) * (J + h / 2 * A2);
      Eigen::VectorXd k4 = field.velocity(t + h, x + h * k3);
      Eigen::MatrixXd A4 = field.jacobian(t + h, x + h * k3) * (J + h * A3);
      x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      J += h / 6 * (A1 + 2 * A2 + 2 * A3 + A4);
      if (s == 0) out.first_trajectory.push_back({(j + 1) * h, x});
    }
    Eigen::MatrixXd pulled = J.transpose() * family.omega(1.0, x) * J;
    double res = (pulled - family.omega(0.0, x0)).cwiseAbs().maxCoeff();
    out.start_points.push_back(x0);
    out.end_points.push_back(x);
    out.residuals.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  out.residual_flagged = out.max_residual > tolerance;
  return out;
}

ConvergenceEvidence moser_convergence(const FormFamily& family, const stratify::Box& box,
                                      int sample_count, int steps, unsigned seed) {
  ConvergenceEvidence ev{moser_solve(family, box, sample_count, steps, seed),
                         moser_solve(family, box, sample_count, steps * 2, seed), 0};
  ev.improvement = ev.fine.max_residual > 0 ? ev.coarse.max_residual / ev.fine.max_residual
                                            : std::numeric_limits<double>::infinity();
  return ev;
}

JetMVec gauge_exp_adjoint_rat(const JetMVec& xi, const JetMVec& b, const Rat& t, int max_terms) {
  JetMVec total = b;
  JetMVec term = b;
  Rat factor(1);
  for (int k = 1; k <= max_terms; ++k) {
    term = schouten(term, xi);
    if (term.is_zero()) break;
    factor *= t / Rat(k);
    if (!factor.is_zero()) total = total + factor * term;
    if (t.is_zero()) break;
  }
  return total;
}

JetMVec gauge_exp_adjoint(const JetMVec& xi, const JetMVec& b, double t, int max_terms) {
  return gauge_exp_adjoint_rat(xi, b, Rat::snap(t, 30), max_terms);
}

GaugeResult gauge_flow(const linf::VData& V, const JetMVec& xi, const JetMVec& delta0, int steps) {
  if (!xi.is_zero() && xi.degree() != 1)
    throw std::invalid_argument("gauge_flow: xi must have shifted degree 0 (a vector field)");
  GaugeResult out;

  // Delta' = [xi, Delta]: exact truncated exponential of ad_xi at each grid t.
  for (int j = 0; j <= steps; ++j) {
    Rat t(j, std::max(steps, 1));
    out.ts.push_back(t.to_double());
    JetMVec d = delta0;
    JetMVec term = delta0;
    Rat factor(1);
    for (int k = 1; k <= 16; ++k) {
      term = schouten(xi, term);
      if (term.is_zero()) break;
      factor *= t / Rat(k);
      d = d + factor * term;
      if (t.is_zero()) break;
    }
    out.delta_profile.push_back(std::move(d));
  }

  // a-equation: a' = pi[a, xi], a_0 = 0 integrated with RK4; the profile is
  // identically zero (uniqueness of the trivial solution).
  {
    JetMVec a(V.chart(), 1);
    const double h = 1.0 / std::max(steps, 1);
    auto rhs = [&](const JetMVec& state) {
      return linf::project_abelian(V, schouten(state, xi));
    };
    auto norm_of = [](const JetMVec& v) {
      double worst = 0;
      for (auto& [idx, c] : v.comps())
        for (auto& [m, coeff] : c.rep().terms())
          worst = std::max(worst, std::abs(coeff.to_double()));
      return worst;
    };
    out.a_norm_profile.push_back(norm_of(a));
    for (int j = 0; j < steps; ++j) {
      JetMVec k1 = rhs(a);
      JetMVec k2 = rhs(a + Rat::snap(h / 2, 30) * k1);
      JetMVec k3 = rhs(a + Rat::snap(h / 2, 30) * k2);
      JetMVec k4 = rhs(a + Rat::snap(h, 30) * k3);
      a = a + Rat::snap(h / 6, 30) * (k1 + Rat(2) * k2 + Rat(2) * k3 + k4);
      out.a_norm_profile.push_back(norm_of(a));
    }
  }

  // Kernel preservation: [xi, ker(Pi)] inside ker(Pi) on basis elements of
  // the truncated algebra with low coefficient degree.
  const int nt = V.chart()->dim();
  const int nb = V.chart()->base_count();
  auto in_kernel = [&](const JetMVec& b) { return linf::project_abelian(V, b).is_zero(); };
  for (int deg = 0; deg <= 2 && out.ker_preserved; ++deg) {
    std::vector<IdxSet> sets;
    std::function<void(IdxSet, int)> gen = [&](IdxSet cur, int start) {
      if (static_cast<int>(cur.size()) == deg) {
        sets.push_back(cur);
        return;
      }
      for (int i = start; i < nt; ++i) {
        IdxSet next = cur;
        next.push_back(i);
        gen(next, i + 1);
      }
    };
    gen({}, 0);
    for (auto& idx : sets) {
      for (int v = 0; v < nt && out.ker_preserved; ++v) {
        JetMVec b(V.chart(), deg);
        b.add_term(idx, Jet::from_poly(V.ctx, Poly::variable(nt, v)));
        if (!in_kernel(b)) continue;
        if (!in_kernel(schouten(xi, b))) {
          out.ker_preserved = false;
          out.ker_witness = "basis element of degree " + std::to_string(deg) +
                            " with coefficient " + V.chart()->name(v);
        }
      }
    }
  }
  (void)nb;
  return out;
}

DirectedReport directed_extension_check(const Rat& c, const Rat& C, int samples) {
  DirectedReport rep;
  const double cd = c.to_double(), Cd = C.to_double();
  auto g = [&](double s) { return (1.0 / Cd) * std::exp(-cd / s) / (s * s); };

  rep.forward_value = g(std::pow(0.5, samples));
  rep.backward_value = g(-0.1);

  // One-sided derivative estimates at 0+: forward differences on a fine
  // stencil, Richardson-extrapolated over halved spacings. g(0+) := 0.
  for (int order = 1; order <= 5; ++order) {
    double best = std::numeric_limits<double>::infinity();
    double prev = 0;
    for (int halve = 0; halve < 3; ++halve) {
      double h = 0.002 / (1 << halve);
      // order-th forward difference / h^order.
      double sum = 0;
      for (int i = 0; i <= order; ++i) {
        double node = i * h;
        double val = i == 0 ? 0.0 : g(node);
        double binom = 1;
        for (int b = 1; b <= i; ++b) binom = binom * (order - b + 1) / b;
        sum += ((order - i) % 2 == 0 ? 1 : -1) * binom * val;
      }
      double est = sum / std::pow(h, order);
      if (halve > 0) best = std::min(best, std::abs(2 * est - prev));  // Richardson step
      prev = est;
      best = std::min(best, std::abs(est));
    }
    rep.one_sided_derivatives.push_back(best);
  }

  rep.forward_smooth = true;
  for (double d : rep.one_sided_derivatives)
    if (d > 1e-10) rep.forward_smooth = false;
  if (rep.forward_value > 1e-20) rep.forward_smooth = false;
  rep.backward_divergent = rep.backward_value >= 1e3;
  rep.directed = rep.forward_smooth && rep.backward_divergent;
  return rep;
}

GlueMorphism glue_morphism(const StratumPackage& lower, const StratumPackage& higher,
                           const std::vector<int>& proj_keep, int coeff_degree_cap) {
  if (static_cast<int>(proj_keep.size()) != lower.chart->dim())
    throw std::invalid_argument("glue_morphism: projection must keep one index per lower coord");
  GlueMorphism f;
  f.from = lower;
  f.to = higher;
  f.proj_keep = proj_keep;

  // Z-bivector of the lower stratum: (omega|_G)^{-1} (+) 0.
  if (!lower.g_coords.empty()) {
    auto ctx = std::make_shared<JetContext>();
    ctx->chart = lower.chart;
    ctx->base_point = rat_zero(lower.chart->dim(), 1).col(0);
    ctx->cap_base = 3;
    ctx->cap_fiber = 0;
    // Base point must keep the G-block nondegenerate; nudge until it does.
    for (int attempt = 0; attempt < 4; ++attempt) {
      RatMat gram(static_cast<int>(lower.g_coords.size()),
                  static_cast<int>(lower.g_coords.size()));
      RatMat wx = lower.omega.eval(ctx->base_point);
      for (std::size_t a = 0; a < lower.g_coords.size(); ++a)
        for (std::size_t b = 0; b < lower.g_coords.size(); ++b)
          gram(a, b) = wx(lower.g_coords[a], lower.g_coords[b]);
      if (!exact_det(gram).is_zero()) break;
      for (int i = 0; i < lower.chart->dim(); ++i)
        ctx->base_point(i) = ctx->base_point(i) + Rat(1, 2);
    }
    f.z_lower = linf::invert_two_form_jet(to_jets(lower.omega.form(), ctx), lower.g_coords);
  }

  // Chain-map check l1' f1 = f1 l1 on generators: monomial coefficients up to
  // the degree cap against every leaf index set.
  f.chain_map_ok = true;
  const int nl = lower.chart->dim();
  std::vector<Mono> monos;
  std::function<void(Mono, int, int)> gen = [&](Mono cur, int var, int deg) {
    if (var == nl) {
      monos.push_back(cur);
      return;
    }
    for (int e = 0; e + deg <= coeff_degree_cap; ++e) {
      Mono next = cur;
      next[var] = e;
      gen(next, var + 1, deg + e);
    }
  };
  gen(Mono(nl, 0), 0, 0);

  std::vector<IdxSet> leaf_sets;
  leaf_sets.push_back({});
  for (std::size_t a = 0; a < lower.f_coords.size(); ++a) {
    leaf_sets.push_back({lower.f_coords[a]});
    for (std::size_t b = a + 1; b < lower.f_coords.size(); ++b)
      leaf_sets.push_back({lower.f_coords[a], lower.f_coords[b]});
  }
  for (auto& mono : monos) {
    for (auto& idx : leaf_sets) {
      Poly coeff(nl);
      coeff.add_term(mono, Rat(1));
      PolyForm basis(lower.chart, static_cast<int>(idx.size()));
      basis.add_term(idx, coeff);
      linf::FoliationForm sigma{lower.chart, lower.f_coords, basis};
      linf::FoliationForm lhs = glue_apply(f, linf::foliation_d(sigma));
      linf::FoliationForm rhs = linf::foliation_d(glue_apply(f, sigma));
      if (!(lhs.form == rhs.form)) {
        f.chain_map_ok = false;
        f.witness = "chain map fails on a degree-" + std::to_string(idx.size()) + " generator";
        return f;
      }
    }
  }
  return f;
}

linf::FoliationForm glue_apply(const GlueMorphism& f, const linf::FoliationForm& s) {
  if (!(*s.chart == *f.from.chart))
    throw std::invalid_argument("glue_apply: form not on the source stratum chart");
  const int nh = f.to.chart->dim();
  // Coefficient pullback through the tube projection.
  std::vector<Poly> images;
  for (int j = 0; j < f.from.chart->dim(); ++j)
    images.push_back(Poly::variable(nh, f.proj_keep[j]));
  PolyForm out(f.to.chart, s.degree());
  for (auto& [idx, c] : s.form.comps()) {
    IdxSet mapped;
    bool dies = false;
    for (int i : idx) {
      int target = f.proj_keep[i];
      if (std::find(f.to.f_coords.begin(), f.to.f_coords.end(), target) == f.to.f_coords.end()) {
        dies = true;  // the leaf direction degenerates in the higher stratum
        break;
      }
      mapped.push_back(target);
    }
    if (dies) continue;
    out.add_term(mapped, c.substitute(images));
  }
  return linf::FoliationForm{f.to.chart, f.to.f_coords, std::move(out)};
}

}  // namespace moser
}  // namespace strataform
