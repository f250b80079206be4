#include "strataform/foliation.hpp"

#include <algorithm>
#include <set>

namespace strataform {
namespace foliation {

RatMat FrameDistribution::eval(const RatVec& x) const {
  const int n = chart->dim();
  RatMat m = rat_zero(n, static_cast<int>(frame.size()));
  for (std::size_t c = 0; c < frame.size(); ++c)
    for (auto& [idx, p] : frame[c].comps()) m(idx[0], static_cast<int>(c)) = p.eval(x);
  return m;
}

FrameDistribution constant_frame(const ChartPtr& chart, const RatMat& columns) {
  FrameDistribution d;
  d.chart = chart;
  d.rank = static_cast<int>(columns.cols());
  const int n = chart->dim();
  for (int c = 0; c < columns.cols(); ++c) {
    PolyMVec v(chart, 1);
    for (int i = 0; i < n; ++i)
      if (!columns(i, c).is_zero()) v.add_term(IdxSet{i}, Poly::constant(n, columns(i, c)));
    d.frame.push_back(std::move(v));
  }
  return d;
}

namespace {

RatVec snap_center(const stratify::Box& box) {
  RatVec c(box.lo.size());
  for (int i = 0; i < box.lo.size(); ++i) c(i) = Rat::snap((box.lo(i) + box.hi(i)) / 2, 8);
  return c;
}

RatVec random_rat_point_in(const stratify::Box& box, std::mt19937_64& rng) {
  RatVec p(box.lo.size());
  for (int i = 0; i < box.lo.size(); ++i) {
    std::uniform_real_distribution<double> u(box.lo(i), box.hi(i));
    p(i) = Rat::snap(u(rng), 12);
  }
  return p;
}

}  // namespace

FrameDistribution null_distribution(const stratify::FormField& w, const stratify::Box& box,
                                    unsigned seed) {
  const int n = w.dim();
  RatVec center = snap_center(box);
  const int m0 = stratify::pointwise_nullity(w, center);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 8; ++s) {
    RatVec p = random_rat_point_in(box, rng);
    int m = stratify::pointwise_nullity(w, p);
    if (m != m0)
      throw RankJump("null_distribution: nullity jumps from " + std::to_string(m0) + " to " +
                         std::to_string(m) + " inside the region",
                     p);
  }
  // Constant vectors killed by omega identically: stack the coefficient
  // matrices of every monomial.
  std::set<Mono> monos;
  for (auto& [idx, c] : w.form().comps())
    for (auto& [mono, coef] : c.terms()) monos.insert(mono);
  RatMat stacked = rat_zero(std::max<int>(1, static_cast<int>(monos.size())) * n, n);
  int block = 0;
  for (auto& mono : monos) {
    for (auto& [idx, c] : w.form().comps()) {
      auto it = c.terms().find(mono);
      if (it == c.terms().end()) continue;
      stacked(block * n + idx[0], idx[1]) = it->second;
      stacked(block * n + idx[1], idx[0]) = -it->second;
    }
    ++block;
  }
  RatMat kernel = monos.empty() ? rat_identity(n) : exact_kernel(stacked);
  if (static_cast<int>(kernel.cols()) != m0)
    throw NonPolynomialKernel(
        "null_distribution: kernel of dimension " + std::to_string(m0) +
        " admits no constant frame (constant solutions: " + std::to_string(kernel.cols()) + ")");
  return constant_frame(w.chart(), kernel);
}

bool frobenius_check(const FrameDistribution& D, unsigned seed) {
  if (D.frame.size() < 2) return true;
  std::mt19937_64 rng(seed);
  std::vector<RatVec> points;
  points.push_back(rat_zero(D.chart->dim(), 1).col(0));
  for (int s = 0; s < 5; ++s) {
    RatVec p(D.chart->dim());
    for (int i = 0; i < D.chart->dim(); ++i) p(i) = skew::random_rat(rng, 3);
    points.push_back(p);
  }
  for (std::size_t a = 0; a < D.frame.size(); ++a)
    for (std::size_t b = a + 1; b < D.frame.size(); ++b) {
      PolyMVec br = schouten(D.frame[a], D.frame[b]);
      if (br.is_zero()) continue;
      for (auto& x : points) {
        RatMat span = D.eval(x);
        RatVec v = rat_zero(D.chart->dim(), 1).col(0);
        for (auto& [idx, p] : br.comps()) v(idx[0]) = p.eval(x);
        if (!in_span(span, v)) return false;
      }
    }
  return true;
}

namespace {

std::optional<std::vector<int>> coordinate_indices(const std::vector<PolyMVec>& frame, int n) {
  (void)n;
  std::vector<int> idxs;
  for (auto& v : frame) {
    if (v.comps().size() != 1) return std::nullopt;
    auto& [idx, c] = *v.comps().begin();
    if (!c.is_constant()) return std::nullopt;
    if (!(c.constant_term() == Rat(1))) return std::nullopt;
    idxs.push_back(idx[0]);
  }
  std::vector<int> sorted = idxs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return std::nullopt;
  return sorted;
}

}  // namespace

Polarization polarization_complement(const stratify::FormField& w, const FrameDistribution& F,
                                     const RatVec& base_point, const std::optional<RatMat>& hint) {
  const int n = w.dim();
  for (auto& v : F.frame)
    if (!interior(v, w.form()).is_zero())
      throw std::invalid_argument("polarization_complement: frame field not in ker(omega)");
  const int m = stratify::pointwise_nullity(w, base_point);
  if (static_cast<int>(F.frame.size()) != m)
    throw std::invalid_argument("polarization_complement: frame does not span the kernel");

  RatMat Fb = F.eval(base_point);
  RatMat G;
  if (hint) {
    G = *hint;
    RatMat combined(n, m + static_cast<int>(G.cols()));
    combined.block(0, 0, n, m) = Fb;
    combined.block(0, m, n, G.cols()) = G;
    if (exact_rank(combined) != n)
      throw std::invalid_argument("polarization_complement: hint not transverse to the kernel");
  } else {
    G = exact_kernel(RatMat(Fb.transpose()));  // standard-inner-product complement
  }
  RatMat gram = G.transpose() * w.eval(base_point) * G;
  if (exact_rank(gram) != G.cols())
    throw std::invalid_argument("polarization_complement: omega degenerate on the complement");

  Polarization P;
  P.omega = w;
  P.f_frame = F;
  P.g_frame = constant_frame(w.chart(), G);
  P.base_point = base_point;
  P.f_coords = coordinate_indices(P.f_frame.frame, n);
  P.g_coords = coordinate_indices(P.g_frame.frame, n);
  return P;
}

GotayForm gotay_form(const Polarization& P, int fiber_order) {
  if (!P.f_coords)
    throw std::invalid_argument(
        "gotay_form: the null frame must be a coordinate frame (adapted chart required)");
  const auto& f_idx = *P.f_coords;
  const int nb = P.omega.dim();
  const int m = static_cast<int>(f_idx.size());

  std::vector<std::string> fiber_names;
  for (int f : f_idx) fiber_names.push_back("p" + P.omega.chart()->name(f));
  ChartPtr split = Chart::make_split(P.omega.chart()->names(), fiber_names);
  const int nt = split->dim();

  // pi^* omega through the projection (x, p) -> x.
  std::vector<Poly> proj_comps;
  for (int i = 0; i < nb; ++i) proj_comps.push_back(Poly::variable(nt, i));
  PolyMap pi{split, P.omega.chart(), proj_comps};
  PolyForm total = pullback(pi, P.omega.form());
  if (total.degree() != 2) total = PolyForm(split, 2);

  // - d theta_G with theta_G = sum_a p_a dx_{f_a}:  sum_a dx_{f_a} ^ dp_a.
  for (int a = 0; a < m; ++a) total.add_term(IdxSet{f_idx[a], nb + a}, Poly::constant(nt, Rat(1)));

  stratify::FormField field(std::move(total));
  RatVec base(nt);
  for (int i = 0; i < nb; ++i) base(i) = P.base_point(i);
  for (int a = 0; a < m; ++a) base(nb + a) = Rat(0);
  if (exact_det(field.eval(base)).is_zero())
    throw std::logic_error("gotay_form: output degenerate at the zero-section base point");

  GotayForm g;
  g.form = std::move(field);
  g.split_chart = split;
  g.f_coords = f_idx;
  g.fiber_order = fiber_order;
  g.base_point = base;
  return g;
}

TubeSystem TubeSystem::model(const ChartPtr& chart, std::vector<int> fiber_indices,
                             const Rat& scale) {
  TubeSystem t;
  t.total = chart;
  std::sort(fiber_indices.begin(), fiber_indices.end());
  t.fibers = std::move(fiber_indices);
  t.rho_fibers = t.fibers;
  t.scale = scale;
  std::vector<std::string> names;
  for (int i = 0; i < chart->dim(); ++i)
    if (std::find(t.fibers.begin(), t.fibers.end(), i) == t.fibers.end()) {
      t.base.push_back(i);
      names.push_back(chart->name(i));
    }
  t.stratum = names.empty() ? Chart::make({"pt"}) : Chart::make(names);
  return t;
}

std::vector<TubeSystem> TubeSystem::nested(const ChartPtr& chart,
                                           const std::vector<std::vector<int>>& filtration) {
  std::vector<TubeSystem> out;
  std::vector<int> prev;
  for (auto& level : filtration) {
    for (int f : prev)
      if (std::find(level.begin(), level.end(), f) == level.end())
        throw std::invalid_argument("TubeSystem::nested: fiber sets must filter");
    TubeSystem t = model(chart, level);
    t.rho_fibers.clear();
    for (int f : t.fibers)
      if (std::find(prev.begin(), prev.end(), f) == prev.end()) t.rho_fibers.push_back(f);
    out.push_back(std::move(t));
    prev = level;
  }
  return out;
}

PolyMap TubeSystem::proj() const {
  const int n = total->dim();
  std::vector<Poly> comps;
  for (int b : base) comps.push_back(Poly::variable(n, b));
  return PolyMap{total, stratum, comps};
}

PolyMap TubeSystem::endo() const {
  const int n = total->dim();
  std::vector<Poly> comps;
  for (int i = 0; i < n; ++i) {
    bool fiber = std::find(fibers.begin(), fibers.end(), i) != fibers.end();
    comps.push_back(fiber ? Poly(n) : Poly::variable(n, i));
  }
  return PolyMap{total, total, comps};
}

Poly TubeSystem::rho() const {
  const int n = total->dim();
  Poly r(n);
  for (int f : rho_fibers) r += Poly::variable(n, f) * Poly::variable(n, f);
  return scale * r;
}

RatMat TubeSystem::dproj() const {
  RatMat d = rat_zero(static_cast<int>(base.size()), total->dim());
  for (std::size_t r = 0; r < base.size(); ++r) d(static_cast<int>(r), base[r]) = Rat(1);
  return d;
}

bool tubes_compatible(const TubeSystem& lower, const TubeSystem& higher) {
  if (!(*lower.total == *higher.total)) return false;
  PolyMap el = lower.endo(), eh = higher.endo();
  for (int i = 0; i < lower.total->dim(); ++i) {
    Poly composed = el.comps[i].substitute(eh.comps);
    if (!(composed == el.comps[i])) return false;
  }
  Poly rho_comp = lower.rho().substitute(eh.comps);
  return rho_comp == lower.rho();
}

namespace {

RatMat independent_columns(const RatMat& A) {
  if (A.cols() == 0) return A;
  Eigen::FullPivLU<RatMat> lu(A);
  lu.setThreshold(Rat(0));
  const int r = static_cast<int>(lu.rank());
  if (r == 0) return RatMat(A.rows(), 0);
  RatMat image = lu.image(A);
  return image.leftCols(r);
}

// Columns spanning the intersection of two column spans, exact.
RatMat span_intersection(const RatMat& A, const RatMat& B) {
  if (A.cols() == 0 || B.cols() == 0) return RatMat(A.rows(), 0);
  RatMat stacked(A.rows(), A.cols() + B.cols());
  stacked.block(0, 0, A.rows(), A.cols()) = A;
  stacked.block(0, A.cols(), B.rows(), B.cols()) = -B;
  RatMat null = exact_kernel(stacked);
  if (null.cols() == 0) return RatMat(A.rows(), 0);
  RatMat inter(A.rows(), null.cols());
  for (int c = 0; c < null.cols(); ++c) inter.col(c) = A * null.block(0, c, A.cols(), 1);
  return independent_columns(inter);
}

}  // namespace

CompatiblePolarization compatible_polarization(const stratify::FormField& omega_lower,
                                               const RatMat& g_lower, const TubeSystem& tube,
                                               const stratify::FormField& omega_higher,
                                               unsigned seed) {
  CompatiblePolarization out;
  const int n = tube.total->dim();
  if (tube.fibers.empty()) {
    // Identity tube: the lower polarization is returned unchanged.
    for (int c = 0; c < g_lower.cols(); ++c) out.g_frame.push_back(g_lower.col(c));
    RatMat K = exact_kernel(omega_higher.eval(rat_zero(n, 1).col(0)));
    for (int c = 0; c < K.cols(); ++c) out.f_frame.push_back(K.col(c));
    out.inclusion_ok = true;
    out.complete = static_cast<int>(out.g_frame.size() + out.f_frame.size()) == n;
    out.omega_nondeg_on_g = true;
    return out;
  }

  PolyForm pulled = pullback(tube.proj(), omega_lower.form());

  std::mt19937_64 rng(seed);
  std::vector<RatVec> samples;
  samples.push_back(rat_zero(n, 1).col(0));
  for (int s = 0; s < 6; ++s) {
    RatVec p(n);
    for (int i = 0; i < n; ++i) p(i) = skew::random_rat(rng, 2);
    samples.push_back(p);
  }

  // Sublemma precondition: ker(pi^* omega_a) contains ker(omega') at samples.
  for (auto& x : samples) {
    RatMat K = exact_kernel(omega_higher.eval(x));
    RatMat pulled_val = eval_two_form(pulled, x);
    RatMat prod = pulled_val * K;
    if (!prod.isZero(Rat(0))) {
      out.witness = x;
      std::string msg = "compatible_polarization: kernel inclusion fails at (";
      for (int i = 0; i < n; ++i) msg += (i ? "," : "") + x(i).str();
      throw std::invalid_argument(msg + ")");
    }
  }

  // Constant kernel of the higher form (model setting).
  RatMat K_high = exact_kernel(omega_higher.eval(samples[0]));
  for (auto& x : samples) {
    RatMat prod = omega_higher.eval(x) * K_high;
    if (!prod.isZero(Rat(0)))
      throw RankJump("compatible_polarization: higher-stratum kernel is not constant", x);
  }

  // Lift of G_a: stratum-chart columns embedded along the surviving indices.
  RatMat lift = rat_zero(n, static_cast<int>(g_lower.cols()));
  for (int c = 0; c < g_lower.cols(); ++c)
    for (std::size_t r = 0; r < tube.base.size(); ++r)
      lift(tube.base[r], c) = g_lower(static_cast<int>(r), c);

  // N-part: ker(omega') + ker(d pi).
  RatMat npart = rat_zero(n, static_cast<int>(K_high.cols() + tube.fibers.size()));
  npart.block(0, 0, n, K_high.cols()) = K_high;
  for (std::size_t f = 0; f < tube.fibers.size(); ++f)
    npart(tube.fibers[f], static_cast<int>(K_high.cols() + f)) = Rat(1);
  npart = independent_columns(npart);

  RatMat G(n, lift.cols() + npart.cols());
  G.block(0, 0, n, lift.cols()) = lift;
  G.block(0, lift.cols(), n, npart.cols()) = npart;
  G = independent_columns(G);
  for (int c = 0; c < G.cols(); ++c) out.g_frame.push_back(G.col(c));
  for (int c = 0; c < K_high.cols(); ++c) out.f_frame.push_back(K_high.col(c));

  // Inclusion (pi^*)G_a > G' cap (pi^*)TM_a at sample points; the horizontal
  // lift of TM_a in the model tube is the span of the base directions.
  RatMat horiz = rat_zero(n, static_cast<int>(tube.base.size()));
  for (std::size_t r = 0; r < tube.base.size(); ++r)
    horiz(tube.base[r], static_cast<int>(r)) = Rat(1);
  out.inclusion_ok = true;
  RatMat inter = span_intersection(G, horiz);
  for (int c = 0; c < inter.cols(); ++c)
    if (!in_span(lift, inter.col(c))) out.inclusion_ok = false;

  out.complete = static_cast<int>(out.g_frame.size() + out.f_frame.size()) == n;
  // Nondegeneracy of the higher form on G' at sample points is reported, not
  // enforced: the construction can return a partial complement.
  out.omega_nondeg_on_g = true;
  for (auto& x : samples) {
    RatMat gram = G.transpose() * omega_higher.eval(x) * G;
    if (exact_rank(gram) != G.cols()) out.omega_nondeg_on_g = false;
  }
  return out;
}

TubeKernelCheck tube_kernel_check(const TubeSystem& tube, const stratify::FormField& omega_ambient,
                                  const stratify::FormField& omega_stratum, unsigned seed) {
  TubeKernelCheck out;
  const int n = tube.total->dim();
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 8; ++s) {
    // Ambient kernel at a rational point of the stratum.
    RatVec x(n);
    for (int i = 0; i < n; ++i) x(i) = skew::random_rat(rng, 2);
    for (int f : tube.fibers) x(f) = Rat(0);
    RatMat K = exact_kernel(omega_ambient.eval(x));
    RatMat pushed = tube.dproj() * K;
    RatVec base_pt = tube.proj().eval(x);
    RatMat ker_stratum = exact_kernel(omega_stratum.eval(base_pt));
    for (int c = 0; c < pushed.cols(); ++c) {
      RatVec v = pushed.col(c);
      bool zero = true;
      for (int i = 0; i < v.size(); ++i)
        if (!v(i).is_zero()) zero = false;
      if (zero) continue;
      if (!in_span(ker_stratum, v)) {
        out.ok = false;
        out.witness = x;
        return out;
      }
    }
  }
  return out;
}

ConnectionResult special_connection(const stratify::FormField& w, const RatVec& x,
                                    const RatMat& metric, const CutoffSpec& cutoff) {
  const int n = w.dim();
  if (metric.rows() != n || metric.cols() != n)
    throw std::invalid_argument("special_connection: metric size mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (metric(i, j) != metric(j, i))
        throw std::invalid_argument("special_connection: metric not symmetric");
  for (int k = 1; k <= n; ++k)
    if (exact_det(metric.topLeftCorner(k, k)).sign() <= 0)
      throw std::invalid_argument("special_connection: metric not positive definite");

  ConnectionResult out;
  out.cutoff = cutoff;

  // Constant metric: the base Levi-Civita connection has vanishing
  // Christoffels, so nabla^g omega|_x is the coordinate derivative.
  std::vector<RatMat> T(n);
  for (int k = 0; k < n; ++k) T[k] = w.eval_derivative(k, x);

  RatMat wx = w.eval(x);
  RatMat K = exact_kernel(wx);
  const int m = static_cast<int>(K.cols());
  RatMat C = exact_kernel(RatMat(K.transpose() * metric));
  RatMat P(n, n);
  if (m > 0) P.block(0, 0, n, m) = K;
  if (n - m > 0) P.block(0, m, n, n - m) = C;
  out.basis = P;
  RatMat Pinv = exact_inverse(P);

  RatMat wprime = P.transpose() * wx * P;  // diag(0, W)
  const int r = n - m;
  RatMat W = wprime.block(m, m, r, r);
  RatMat Winv = r > 0 ? exact_inverse(W) : RatMat(0, 0);

  // T'_{kij} = T_{abc} P_{ak} P_{bi} P_{cj}.
  std::vector<RatMat> Tp(n, rat_zero(n, n));
  for (int k = 0; k < n; ++k) {
    RatMat mid = P.transpose() * T[k] * P;
    for (int kp = 0; kp < n; ++kp) {
      if (P(k, kp).is_zero()) continue;
      Tp[kp] += P(k, kp) * mid;
    }
  }

  // Correction in the adapted basis, W-block output rows only:
  // B'^l_{ki} = c_i sum_b T'_{kib} (W^{-1})_{bl}, c_i = 1 on the kernel block
  // and 1/2 on the W-block.
  std::vector<RatMat> Bp(n, rat_zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      Rat ci = i < m ? Rat(1) : Rat(1, 2);
      for (int l = m; l < n; ++l) {
        Rat sum(0);
        for (int b = m; b < n; ++b) sum += Tp[k](i, b) * Winv(b - m, l - m);
        Bp[k](l, i) = ci * sum;
      }
    }

  for (int k = 0; k < n; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (!Tp[k](i, j).is_zero())
          out.residual.push_back({k, i, j, Tp[k](i, j), k < m});

  // Back to the original basis: B[k] = sum_kp Pinv(kp,k) P Bp[kp] Pinv.
  out.correction.assign(n, rat_zero(n, n));
  for (int kp = 0; kp < n; ++kp) {
    RatMat back = P * Bp[kp] * Pinv;
    for (int k = 0; k < n; ++k) {
      if (Pinv(kp, k).is_zero()) continue;
      out.correction[k] += Pinv(kp, k) * back;
    }
  }

  out.achieved.resize(n);
  out.flat_at_point = true;
  for (int k = 0; k < n; ++k) {
    RatMat corr = out.correction[k].transpose() * wx + wx * out.correction[k];
    out.achieved[k] = T[k] - corr;
    if (!out.achieved[k].isZero(Rat(0))) out.flat_at_point = false;
  }
  return out;
}

StabilizeResult stabilize(const Polarization& P, int k) {
  if (k < 0) throw std::invalid_argument("stabilize: k must be nonnegative");
  StabilizeResult out;
  out.record.dim_before = P.omega.dim();
  out.record.rank_g_before = static_cast<int>(P.g_frame.frame.size());
  out.record.vd_before = out.record.dim_before - out.record.rank_g_before;
  out.record.dim_after = out.record.dim_before + k;
  out.record.rank_count_after = out.record.rank_g_before + k;
  out.record.vd_after = out.record.dim_after - out.record.rank_count_after;

  if (k == 0) {
    out.thickened = P;
    return out;
  }
  const int n = P.omega.dim();
  std::vector<std::string> names = P.omega.chart()->names();
  for (int i = 1; i <= k; ++i) names.push_back("z" + std::to_string(i));
  ChartPtr bigger = Chart::make(names);
  const int nt = n + k;

  PolyForm wext(bigger, 2);
  for (auto& [idx, c] : P.omega.form().comps()) wext.add_term(idx, c.extended(nt));
  stratify::FormField field(std::move(wext));

  auto extend_frame = [&](const FrameDistribution& f) {
    FrameDistribution g;
    g.chart = bigger;
    g.rank = f.rank;
    for (auto& v : f.frame) {
      PolyMVec ext(bigger, 1);
      for (auto& [idx, c] : v.comps()) ext.add_term(idx, c.extended(nt));
      g.frame.push_back(std::move(ext));
    }
    return g;
  };

  Polarization T;
  T.omega = field;
  T.f_frame = extend_frame(P.f_frame);
  for (int i = 0; i < k; ++i) {
    PolyMVec dz(bigger, 1);
    dz.add_term(IdxSet{n + i}, Poly::constant(nt, Rat(1)));
    T.f_frame.frame.push_back(std::move(dz));
  }
  T.f_frame.rank += k;
  T.g_frame = extend_frame(P.g_frame);
  RatVec base(nt);
  for (int i = 0; i < n; ++i) base(i) = P.base_point(i);
  for (int i = 0; i < k; ++i) base(n + i) = Rat(0);
  T.base_point = base;
  if (P.f_coords) {
    T.f_coords = *P.f_coords;
    for (int i = 0; i < k; ++i) T.f_coords->push_back(n + i);
  }
  T.g_coords = P.g_coords;
  out.thickened = std::move(T);
  return out;
}

}  // namespace foliation
}  // namespace strataform
