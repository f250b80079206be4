#include "strataform/stratify.hpp"

#include <algorithm>
#include <cmath>

namespace strataform {
namespace stratify {

FormField::FormField(PolyForm form, bool require_closed) : form_(std::move(form)) {
  if (form_.degree() != 2) throw std::invalid_argument("FormField: degree != 2");
  closed_ = exterior_d(form_).is_zero();
  if (require_closed && !closed_)
    throw std::invalid_argument("FormField: form is not closed (d omega != 0)");
}

RatMat FormField::eval_derivative(int k, const RatVec& x) const {
  const int n = dim();
  RatMat m = rat_zero(n, n);
  for (auto& [idx, c] : form_.comps()) {
    Rat v = c.derivative(k).eval(x);
    m(idx[0], idx[1]) = v;
    m(idx[1], idx[0]) = -v;
  }
  return m;
}

Eigen::MatrixXd FormField::eval_derivative_d(int k, const Eigen::VectorXd& x) const {
  const int n = dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (auto& [idx, c] : form_.comps()) {
    double v = c.derivative(k).eval_d(x);
    m(idx[0], idx[1]) = v;
    m(idx[1], idx[0]) = -v;
  }
  return m;
}

RankDecision numeric_rank(const Eigen::MatrixXd& skew, double gap_factor) {
  const int n = static_cast<int>(skew.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(skew);
  Eigen::VectorXd s = svd.singularValues();
  RankDecision d;
  const double smax = s.size() ? s(0) : 0.0;
  if (smax < 1e-13) {
    d.rank = 0;
    d.nullity = n;
    d.gap = std::numeric_limits<double>::infinity();
    return d;
  }
  if (s(n - 1) >= smax / gap_factor) {
    d.rank = n;
    d.nullity = 0;
    d.gap = std::numeric_limits<double>::infinity();
    return d;
  }
  int best_r = 0;
  double best_ratio = 0;
  for (int r = 1; r < n; ++r) {
    double hi = s(r - 1);
    double lo = std::max(s(r), 1e-300);
    double ratio = hi / lo;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_r = r;
    }
  }
  d.rank = best_r;
  d.nullity = n - best_r;
  d.gap = best_ratio;
  d.determinate = best_ratio >= gap_factor;
  return d;
}

int pointwise_nullity(const FormField& w, const RatVec& x, NullityMode mode, double gap_factor) {
  if (mode == NullityMode::Exact) {
    return w.dim() - exact_rank(w.eval(x));
  }
  RankDecision d = pointwise_nullity_numeric(w, to_double(x), gap_factor);
  if (!d.determinate)
    throw IndeterminateRank("pointwise_nullity: singular-value gap " + std::to_string(d.gap) +
                            " below the configured factor");
  return d.nullity;
}

RankDecision pointwise_nullity_numeric(const FormField& w, const Eigen::VectorXd& x,
                                       double gap_factor) {
  return numeric_rank(w.eval_d(x), gap_factor);
}

FormField realize_form_at_point(const skew::SkewForm& Q, const RatVec& x0) {
  const int n = Q.dim();
  auto chart = Chart::standard(n);
  // alpha_i = -1/2 sum_k Q_ik (x_k - x0_k); then d(alpha) is constant equal
  // to Q (the orientation of the primitive is fixed by this requirement).
  PolyForm alpha(chart, 1);
  for (int i = 0; i < n; ++i) {
    Poly ai(n);
    for (int k = 0; k < n; ++k) {
      if (Q(i, k).is_zero()) continue;
      ai += Rat(-1, 2) * Q(i, k) * (Poly::variable(n, k) - Poly::constant(n, x0(k)));
    }
    if (!ai.is_zero()) alpha.add_term(IdxSet{i}, ai);
  }
  PolyForm w = exterior_d(alpha);
  if (w.is_zero()) w = PolyForm(chart, 2);
  return FormField(std::move(w));
}

TransversalityReport transversality_check(const FormField& w, const RatVec& x) {
  const int n = w.dim();
  RatMat wx = w.eval(x);
  RatMat K = exact_kernel(wx);
  const int m = static_cast<int>(K.cols());
  TransversalityReport rep;
  rep.nullity = m;
  rep.codim = m * (m - 1) / 2;
  if (rep.codim == 0) {
    rep.transversal = true;
    return rep;
  }
  // Rows: kernel pairs (a < b); columns: chart directions.
  RatMat J = rat_zero(rep.codim, n);
  RatMat Jc = rat_zero(rep.codim, n);
  for (int k = 0; k < n; ++k) {
    RatMat Dk = w.eval_derivative(k, x);
    // Arbitrary connection correction; it cannot change kernel pairings
    // because both correction terms hit omega contracted with a kernel
    // vector. Both ranks are recorded.
    RatMat G = rat_zero(n, n);
    for (int i = 0; i < n; ++i) G(i, (i + k + 1) % n) = Rat(1 + ((i + k) % 3));
    RatMat Dk_corr = Dk - G.transpose() * wx - wx * G;
    int row = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        RatVec va = K.col(a), vb = K.col(b);
        J(row, k) = (va.transpose() * Dk * vb)(0, 0);
        Jc(row, k) = (va.transpose() * Dk_corr * vb)(0, 0);
        ++row;
      }
  }
  rep.rank = exact_rank(J);
  rep.rank_corrected = exact_rank(Jc);
  rep.transversal = rep.rank == rep.codim;
  return rep;
}

Box Box::cube(int dim, double a, double b) {
  Box box;
  box.lo = Eigen::VectorXd::Constant(dim, a);
  box.hi = Eigen::VectorXd::Constant(dim, b);
  return box;
}

bool Box::contains(const Eigen::VectorXd& x, double slack) const {
  for (int i = 0; i < x.size(); ++i)
    if (x(i) < lo(i) - slack || x(i) > hi(i) + slack) return false;
  return true;
}

Eigen::VectorXd Box::sample(std::mt19937_64& rng) const {
  Eigen::VectorXd x(lo.size());
  for (int i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> u(lo(i), hi(i));
    x(i) = u(rng);
  }
  return x;
}

Poly pfaffian_minor(const FormField& w, const std::vector<int>& subset) {
  const int n = w.dim();
  if (subset.size() % 2 != 0) throw std::invalid_argument("pfaffian_minor: odd subset");
  auto entry = [&](int i, int j) -> Poly {
    if (i == j) return Poly(n);
    IdxSet idx{std::min(i, j), std::max(i, j)};
    auto it = w.form().comps().find(idx);
    if (it == w.form().comps().end()) return Poly(n);
    return i < j ? it->second : -it->second;
  };
  std::function<Poly(const std::vector<int>&)> rec = [&](const std::vector<int>& live) -> Poly {
    if (live.empty()) return Poly::constant(n, Rat(1));
    Poly sum(n);
    const int i = live[0];
    for (std::size_t t = 1; t < live.size(); ++t) {
      Poly e = entry(i, live[t]);
      if (e.is_zero()) continue;
      std::vector<int> rest;
      for (std::size_t s = 1; s < live.size(); ++s)
        if (s != t) rest.push_back(live[s]);
      Poly term = e * rec(rest);
      if (t % 2 == 0) term = -term;
      sum += term;
    }
    return sum;
  };
  return rec(subset);
}

std::vector<Poly> stratum_defining_polys(const FormField& w, int m) {
  const int n = w.dim();
  int r = n - m;
  if (r < 0) throw std::invalid_argument("stratum_defining_polys: m > N");
  if (r % 2 != 0) r -= 1;  // achievable ranks are even
  const int size = r + 2;
  std::vector<Poly> out;
  if (size > n) return out;  // nullity >= m holds everywhere
  std::vector<int> subset(size);
  std::function<void(int, int)> choose = [&](int start, int picked) {
    if (picked == size) {
      Poly p = pfaffian_minor(w, subset);
      if (!p.is_zero()) out.push_back(p);
      return;
    }
    for (int i = start; i <= n - (size - picked); ++i) {
      subset[picked] = i;
      choose(i + 1, picked + 1);
    }
  };
  choose(0, 0);
  if (out.empty()) out.push_back(Poly(n));  // identically-zero minors: no constraint
  return out;
}

namespace {

struct NewtonSystem {
  std::vector<Poly> funcs;
  std::vector<std::vector<Poly>> grads;  // grads[f][k]

  NewtonSystem(const std::vector<Poly>& fs, int n) : funcs(fs) {
    grads.resize(fs.size());
    for (std::size_t f = 0; f < fs.size(); ++f) {
      grads[f].resize(n);
      for (int k = 0; k < n; ++k) grads[f][k] = fs[f].derivative(k);
    }
  }

  Eigen::VectorXd value(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v(funcs.size());
    for (std::size_t f = 0; f < funcs.size(); ++f) v(f) = funcs[f].eval_d(x);
    return v;
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd J(funcs.size(), x.size());
    for (std::size_t f = 0; f < funcs.size(); ++f)
      for (int k = 0; k < x.size(); ++k) J(f, k) = grads[f][k].eval_d(x);
    return J;
  }
};

// Damped Gauss-Newton; true when the residual drops below tol.
bool gauss_newton(const NewtonSystem& sys, Eigen::VectorXd& x, double tol, int max_iter = 60) {
  if (sys.funcs.empty()) return true;
  double fx = sys.value(x).norm();
  for (int it = 0; it < max_iter; ++it) {
    if (fx <= tol) return true;
    Eigen::MatrixXd J = sys.jacobian(x);
    Eigen::VectorXd F = sys.value(x);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    Eigen::VectorXd step = svd.solve(F);
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h < 24; ++h) {
      Eigen::VectorXd xn = x - lambda * step;
      double fn = sys.value(xn).norm();
      if (fn < fx) {
        x = xn;
        fx = fn;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) return fx <= tol;
  }
  return fx <= tol;
}

}  // namespace

SampleResult stratum_sample(const FormField& w, int m, const Box& box, int count, unsigned seed,
                            double gap_factor) {
  SampleResult result;
  const int n = w.dim();
  NewtonSystem sys(stratum_defining_polys(w, m), n);
  std::mt19937_64 rng(seed);
  const int max_starts = std::max(40 * count, 200);
  for (int start = 0; start < max_starts && static_cast<int>(result.samples.size()) < count;
       ++start) {
    Eigen::VectorXd x = box.sample(rng);
    if (!gauss_newton(sys, x, 1e-12)) continue;
    if (!box.contains(x, 1e-6)) continue;
    RankDecision d = pointwise_nullity_numeric(w, x, gap_factor);
    if (!d.determinate || d.nullity != m) continue;
    StratumSample s;
    s.point = x;
    s.nullity = d.nullity;
    s.gap = d.gap;
    if (m > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.eval_d(x), Eigen::ComputeFullV);
      s.kernel = svd.matrixV().rightCols(m);
    } else {
      s.kernel = Eigen::MatrixXd(n, 0);
    }
    result.samples.push_back(std::move(s));
  }
  if (static_cast<int>(result.samples.size()) < count) {
    result.shortfall = true;
    result.notice = "stratum m=" + std::to_string(m) + " produced " +
                    std::to_string(result.samples.size()) + " of " + std::to_string(count) +
                    " requested samples in the box";
  }
  return result;
}

namespace {

// Orthonormal projector onto the column span.
Eigen::MatrixXd span_projector(const Eigen::MatrixXd& cols) {
  if (cols.cols() == 0) return Eigen::MatrixXd::Zero(cols.rows(), cols.rows());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(cols.rows(), cols.cols());
  return Q * Q.transpose();
}

Eigen::MatrixXd implicit_tangent(const NewtonSystem& sys, const Eigen::VectorXd& x, int n) {
  if (sys.funcs.empty()) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd J = sys.jacobian(x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > std::max(1e-8 * smax, 1e-12)) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Eigen::MatrixXd explicit_tangent(const PolyMap& emb, const Eigen::VectorXd& u) {
  const int np = emb.src->dim();
  const int n = emb.dst->dim();
  Eigen::MatrixXd J(n, np);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < np; ++i) J(j, i) = emb.comps[j].derivative(i).eval_d(u);
  return J;
}

Eigen::VectorXd eval_map_d(const PolyMap& emb, const Eigen::VectorXd& u) {
  Eigen::VectorXd y(emb.dst->dim());
  for (int j = 0; j < emb.dst->dim(); ++j) y(j) = emb.comps[j].eval_d(u);
  return y;
}

double aitken_limit(const std::vector<double>& g) {
  const std::size_t n = g.size();
  if (n < 3) return n ? g.back() : 0.0;
  double g0 = g[n - 3], g1 = g[n - 2], g2 = g[n - 1];
  double d1 = g1 - g0, d2 = g2 - g1;
  double denom = d2 - d1;
  if (std::abs(denom) < 1e-300) return g2;
  double lim = g2 - d2 * d2 / denom;
  if (!std::isfinite(lim) || std::abs(lim - g2) > 10 * (std::abs(d2) + std::abs(g2)) + 1e-12)
    return g2;
  return std::max(lim, 0.0);
}

}  // namespace

WhitneyReport whitney_check_single(const StratumDesc&) {
  WhitneyReport rep;
  rep.vacuous = true;
  rep.condition_a = Verdict::Pass;
  rep.condition_b = Verdict::Pass;
  return rep;
}

WhitneyReport whitney_check(const StratumDesc& lower, const StratumDesc& higher,
                            const Eigen::VectorXd& y, const WhitneyConfig& cfg) {
  WhitneyReport rep;
  const int n = static_cast<int>(y.size());
  std::mt19937_64 rng(cfg.seed);

  Eigen::MatrixXd lower_tangent;
  std::optional<NewtonSystem> lower_sys;
  if (auto* imp = std::get_if<ImplicitStratum>(&lower)) {
    lower_sys.emplace(stratum_defining_polys(*imp->form, imp->m), n);
    lower_tangent = implicit_tangent(*lower_sys, y, n);
  } else {
    auto& exp = std::get<ExplicitStratum>(lower);
    lower_tangent = explicit_tangent(exp.embedding, exp.base_param);
  }
  Eigen::MatrixXd P_lower = span_projector(lower_tangent);

  std::optional<NewtonSystem> higher_sys;
  if (auto* imp = std::get_if<ImplicitStratum>(&higher))
    higher_sys.emplace(stratum_defining_polys(*imp->form, imp->m), n);

  auto param_dirs = [&](const StratumDesc& d, int want) {
    std::vector<Eigen::VectorXd> dirs;
    if (auto* exp = std::get_if<ExplicitStratum>(&d)) {
      dirs = exp->directions;
      const int np = exp->embedding.src->dim();
      if (dirs.empty()) {
        for (int i = 0; i < np; ++i) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(np);
          e(i) = 1;
          dirs.push_back(e);
          dirs.push_back(-e);
        }
      }
      while (static_cast<int>(dirs.size()) < want) {
        Eigen::VectorXd v(np);
        std::normal_distribution<double> g;
        for (int i = 0; i < np; ++i) v(i) = g(rng);
        dirs.push_back(v.normalized());
      }
    } else {
      for (int s = 0; s < want; ++s) {
        Eigen::VectorXd v(n);
        std::normal_distribution<double> g;
        for (int i = 0; i < n; ++i) v(i) = g(rng);
        dirs.push_back(v.normalized());
      }
    }
    return dirs;
  };
  std::vector<Eigen::VectorXd> higher_dirs = param_dirs(higher, cfg.sequences);
  std::vector<Eigen::VectorXd> lower_dirs = param_dirs(lower, cfg.sequences);

  // Every (higher, lower) direction pair is a sequence. Refinement stops when
  // the numeric classification reaches its scale floor; a prefix of at least
  // three iterates is still extrapolated.
  for (const Eigen::VectorXd& dh : higher_dirs)
   for (const Eigen::VectorXd& dl : lower_dirs) {
    SequenceRecord rec;
    for (int i = 0; i < cfg.steps; ++i) {
      const double r = cfg.initial_radius * std::pow(0.5, i);
      Eigen::VectorXd xi, yi;
      Eigen::MatrixXd tangent;
      if (auto* imp = std::get_if<ImplicitStratum>(&higher)) {
        xi = y + r * dh;
        if (!gauss_newton(*higher_sys, xi, 1e-13)) break;
        RankDecision d = pointwise_nullity_numeric(*imp->form, xi, 1e4);
        if (!d.determinate || d.nullity != imp->m) break;
        tangent = implicit_tangent(*higher_sys, xi, n);
      } else {
        auto& exp = std::get<ExplicitStratum>(higher);
        Eigen::VectorXd u = exp.base_param + r * dh;
        xi = eval_map_d(exp.embedding, u);
        tangent = explicit_tangent(exp.embedding, u);
      }
      if (auto* imp = std::get_if<ImplicitStratum>(&lower)) {
        yi = y + r * dl;
        if (!gauss_newton(*lower_sys, yi, 1e-13)) break;
        RankDecision d = pointwise_nullity_numeric(*imp->form, yi, 1e4);
        if (!d.determinate || d.nullity != imp->m) break;
      } else {
        auto& exp = std::get<ExplicitStratum>(lower);
        yi = eval_map_d(exp.embedding, exp.base_param + r * dl);
      }

      Eigen::MatrixXd P_tau = span_projector(tangent);
      double ga = ((Eigen::MatrixXd::Identity(n, n) - P_tau) * P_lower).norm();
      Eigen::VectorXd sec = xi - yi;
      if (sec.norm() < 1e-300) break;
      sec.normalize();
      double gb = ((Eigen::MatrixXd::Identity(n, n) - P_tau) * sec).norm();
      rec.cond_a_gaps.push_back(ga);
      rec.cond_b_gaps.push_back(gb);
    }
    rec.usable = rec.cond_a_gaps.size() >= 3;
    if (rec.usable) {
      rec.cond_a_limit = aitken_limit(rec.cond_a_gaps);
      rec.cond_b_limit = aitken_limit(rec.cond_b_gaps);
    }
    rep.records.push_back(std::move(rec));
  }

  auto verdict_of = [&](auto limit_of) {
    bool any_usable = false, all_pass = true, any_fail = false;
    for (auto& rec : rep.records) {
      if (!rec.usable) continue;
      any_usable = true;
      double lim = limit_of(rec);
      if (lim >= cfg.tol) all_pass = false;
      if (lim > 10 * cfg.tol) any_fail = true;
    }
    if (!any_usable) return Verdict::Inconclusive;
    if (any_fail) return Verdict::Fail;
    if (all_pass) return Verdict::Pass;
    return Verdict::Inconclusive;
  };
  rep.condition_a = verdict_of([](const SequenceRecord& r) { return r.cond_a_limit; });
  rep.condition_b = verdict_of([](const SequenceRecord& r) { return r.cond_b_limit; });
  return rep;
}

NicenessReport niceness_report(const FormField& w, const Box& box, int samples, unsigned seed,
                               double gap_factor) {
  NicenessReport rep;
  const int n = w.dim();
  std::map<int, SampleResult> results;
  for (int m = 0; m <= n; ++m) {
    if ((n - m) % 2 != 0) continue;
    results[m] = stratum_sample(w, m, box, samples, seed + m, gap_factor);
  }
  bool all_transversal = true;
  bool any_stratum = false;
  for (auto& [m, res] : results) {
    if (res.samples.empty()) continue;
    any_stratum = true;
    StratumCensusEntry e;
    e.m = m;
    e.count = static_cast<int>(res.samples.size());
    e.admissible = skew::nullity_admissible(n, m);
    e.expected_dim = n - m * (m - 1) / 2;

    // Local dimension by PCA of normalized neighbor displacements.
    if (e.count >= 15) {
      Eigen::VectorXd center = (box.lo + box.hi) / 2;
      int base = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < e.count; ++i) {
        double d = (res.samples[i].point - center).norm();
        if (d < best) {
          best = d;
          base = i;
        }
      }
      std::vector<std::pair<double, int>> by_dist;
      for (int i = 0; i < e.count; ++i)
        if (i != base)
          by_dist.push_back({(res.samples[i].point - res.samples[base].point).norm(), i});
      std::sort(by_dist.begin(), by_dist.end());
      const int k = std::min<int>(15, static_cast<int>(by_dist.size()));
      Eigen::MatrixXd disp(n, k);
      for (int i = 0; i < k; ++i)
        disp.col(i) = (res.samples[by_dist[i].second].point - res.samples[base].point).normalized();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(disp);
      Eigen::VectorXd s = svd.singularValues();
      int dim = 0;
      for (int i = 0; i < s.size(); ++i)
        if (s(i) > s(0) / 1e3) ++dim;
      e.measured_local_dim = dim;
    }

    // Transversality at dyadic snap points of the sampled stratum.
    const int check = std::min(20, e.count);
    for (int i = 0; i < check; ++i) {
      RatVec snapped(n);
      for (int j = 0; j < n; ++j) snapped(j) = Rat::snap(res.samples[i].point(j), 20);
      if (n - exact_rank(w.eval(snapped)) != m) continue;  // snap left the stratum
      ++e.checked_points;
      if (transversality_check(w, snapped).transversal) ++e.transversal_points;
    }
    if (e.checked_points > 0 && e.transversal_points < e.checked_points) all_transversal = false;
    if (e.checked_points == 0 && m > 0)
      rep.warnings.push_back("stratum m=" + std::to_string(m) +
                             ": no rational snap points survived for transversality checks");

    // Frontier evidence: closure of Y_m should reach Y_{m+2}.
    auto next = results.find(m + 2);
    if (next != results.end() && !next->second.samples.empty()) {
      int hits = 0, tried = 0;
      for (int i = 0; i < std::min<int>(3, static_cast<int>(next->second.samples.size())); ++i) {
        const Eigen::VectorXd& p = next->second.samples[i].point;
        Box nb;
        nb.lo = p.array() - 0.05;
        nb.hi = p.array() + 0.05;
        ++tried;
        SampleResult close = stratum_sample(w, m, nb, 3, seed + 777 + i, gap_factor);
        if (!close.samples.empty()) ++hits;
      }
      e.frontier_evidence = tried > 0 && hits == tried;
    }

    rep.strata.push_back(e);
  }
  bool admissible_ok = true;
  for (auto& e : rep.strata)
    if (!e.admissible) admissible_ok = false;
  rep.nice = any_stratum && all_transversal && admissible_ok;
  return rep;
}

}  // namespace stratify
}  // namespace strataform
