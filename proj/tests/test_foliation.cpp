#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "strataform/foliation.hpp"

using namespace strataform;
using namespace strataform::foliation;
using stratify::Box;
using stratify::FormField;

namespace {

FormField const_form(int n, std::initializer_list<std::pair<IdxSet, Rat>> terms) {
  auto c = Chart::standard(n);
  PolyForm w(c, 2);
  for (auto& [idx, coeff] : terms) w.add_term(idx, Poly::constant(n, coeff));
  return FormField(std::move(w));
}

FormField model4d() {
  auto c = Chart::standard(4);
  PolyForm w(c, 2);
  w.add_term(IdxSet{0, 1}, Poly::variable(4, 0));
  w.add_term(IdxSet{2, 3}, Poly::constant(4, Rat(1)));
  return FormField(std::move(w));
}

RatVec zero_pt(int n) { return rat_zero(n, 1).col(0); }

}  // namespace

TEST_CASE("null distribution of constant forms") {
  FormField w3 = const_form(3, {{{0, 1}, Rat(1)}});
  FrameDistribution d3 = null_distribution(w3, Box::cube(3, -1, 1));
  REQUIRE(d3.rank == 1);
  RatMat v = d3.eval(zero_pt(3));
  CHECK(v(2, 0) == Rat(1));

  FormField w4 = const_form(4, {{{0, 1}, Rat(1)}});
  FrameDistribution d4 = null_distribution(w4, Box::cube(4, -1, 1));
  CHECK(d4.rank == 2);

  CHECK_THROWS_AS(null_distribution(model4d(), Box::cube(4, -1, 1)), RankJump);
}

TEST_CASE("frame fields annihilate the form symbolically") {
  FormField w = const_form(4, {{{0, 1}, Rat(1)}});
  FrameDistribution d = null_distribution(w, Box::cube(4, -1, 1));
  for (auto& v : d.frame) CHECK(interior(v, w.form()).is_zero());
}

TEST_CASE("frobenius check") {
  auto c = Chart::standard(3);
  auto dd = [&](int i) {
    PolyMVec v(c, 1);
    v.add_term(IdxSet{i}, Poly::constant(3, Rat(1)));
    return v;
  };

  FrameDistribution span_d3{c, {dd(2)}, 1};
  CHECK(frobenius_check(span_d3));

  // span{d1, d2 + x1 d3}: [d1, d2 + x1 d3] = d3, not in the span.
  PolyMVec twisted(c, 1);
  twisted.add_term(IdxSet{1}, Poly::constant(3, Rat(1)));
  twisted.add_term(IdxSet{2}, Poly::variable(3, 0));
  FrameDistribution bad{c, {dd(0), twisted}, 2};
  CHECK(!frobenius_check(bad));

  // span{d1, x1 d1}: rank-degenerate but involutive.
  PolyMVec x1d1(c, 1);
  x1d1.add_term(IdxSet{0}, Poly::variable(3, 0));
  FrameDistribution degenerate{c, {dd(0), x1d1}, 2};
  CHECK(frobenius_check(degenerate));
}

TEST_CASE("polarization complement") {
  FormField w = const_form(3, {{{0, 1}, Rat(1)}});
  FrameDistribution F = null_distribution(w, Box::cube(3, -1, 1));

  Polarization P = polarization_complement(w, F, zero_pt(3));
  REQUIRE(P.g_frame.frame.size() == 2);
  REQUIRE(P.f_coords.has_value());
  CHECK(*P.f_coords == std::vector<int>{2});

  // Accepted hint: G = span{d1, d2 + d3}.
  RatMat hint = rat_zero(3, 2);
  hint(0, 0) = Rat(1);
  hint(1, 1) = Rat(1);
  hint(2, 1) = Rat(1);
  Polarization Ph = polarization_complement(w, F, zero_pt(3), hint);
  CHECK(Ph.g_frame.frame.size() == 2);

  // Rejected hint: omega degenerate on span{d1, d3}.
  RatMat bad = rat_zero(3, 2);
  bad(0, 0) = Rat(1);
  bad(2, 1) = Rat(1);
  CHECK_THROWS(polarization_complement(w, F, zero_pt(3), bad));
}

TEST_CASE("gotay normal form") {
  // R^3 model: dx1^dx2 with F = span{d3} -> dx1^dx2 + dx3^dp3.
  FormField w = const_form(3, {{{0, 1}, Rat(1)}});
  Polarization P = polarization_complement(w, null_distribution(w, Box::cube(3, -1, 1)),
                                           zero_pt(3));
  GotayForm g = gotay_form(P, 3);
  CHECK(g.split_chart->dim() == 4);
  CHECK(g.split_chart->fiber_count() == 1);
  // Expected form on (x1,x2,x3,p3).
  PolyForm expect(g.split_chart, 2);
  expect.add_term(IdxSet{0, 1}, Poly::constant(4, Rat(1)));
  expect.add_term(IdxSet{2, 3}, Poly::constant(4, Rat(1)));
  CHECK(g.form.form() == expect);
  CHECK(g.form.closed());
  CHECK(!exact_det(g.form.eval(g.base_point)).is_zero());

  // m = 0: the symplectic case passes through unchanged.
  FormField s2 = const_form(2, {{{0, 1}, Rat(1)}});
  FrameDistribution empty{s2.chart(), {}, 0};
  Polarization Ps = polarization_complement(s2, empty, zero_pt(2));
  GotayForm gs = gotay_form(Ps, 3);
  CHECK(gs.split_chart->dim() == 2);
  CHECK(gs.form.form() == s2.form());

  // R^4 with F rank 2 -> dx1^dx2 + dx3^dp3 + dx4^dp4.
  FormField w4 = const_form(4, {{{0, 1}, Rat(1)}});
  Polarization P4 = polarization_complement(w4, null_distribution(w4, Box::cube(4, -1, 1)),
                                            zero_pt(4));
  GotayForm g4 = gotay_form(P4, 3);
  PolyForm expect4(g4.split_chart, 2);
  expect4.add_term(IdxSet{0, 1}, Poly::constant(6, Rat(1)));
  expect4.add_term(IdxSet{2, 4}, Poly::constant(6, Rat(1)));
  expect4.add_term(IdxSet{3, 5}, Poly::constant(6, Rat(1)));
  CHECK(g4.form.form() == expect4);

  // Gotay output restricts to omega on the zero section.
  RatVec pt(6);
  pt(0) = Rat(1, 2); pt(1) = Rat(-1, 3); pt(2) = Rat(2); pt(3) = Rat(0);
  pt(4) = Rat(0); pt(5) = Rat(0);
  RatMat full = g4.form.eval(pt);
  CHECK(full.topLeftCorner(4, 4) == w4.eval(pt.head(4)));
}

TEST_CASE("model tubes and compatibility") {
  auto c = Chart::standard(4);
  auto chain = TubeSystem::nested(c, {{0}, {0, 2}});
  const TubeSystem& t1 = chain[0];  // stratum {x1 = 0}
  const TubeSystem& t2 = chain[1];  // deeper stratum {x1 = x3 = 0}, relative rho

  CHECK(t1.base == std::vector<int>{1, 2, 3});
  CHECK(t2.rho_fibers == std::vector<int>{2});
  // pi o pi = pi (idempotence of the model projections).
  PolyMap e1 = t1.endo();
  for (int i = 0; i < 4; ++i) CHECK(e1.comps[i].substitute(e1.comps) == e1.comps[i]);
  CHECK(tubes_compatible(t2, t1));  // deeper tube against the shallower one
  CHECK(!tubes_compatible(t1, t2)); // pi_1 o pi_2 kills x3: not pi_1

  // A standalone full-distance tube at the deep stratum fails the rho
  // identity against t1; Mather's rescaling is what repairs this in general.
  TubeSystem t2_full = TubeSystem::model(c, {0, 2});
  CHECK(!tubes_compatible(t2_full, t1));
}

TEST_CASE("tube kernel check on the model") {
  auto c = Chart::standard(4);
  TubeSystem tube = TubeSystem::model(c, {0});
  FormField ambient = model4d();
  // omega_alpha on the stratum chart (x2,x3,x4): dx3^dx4.
  auto cs = tube.stratum;
  PolyForm ws(cs, 2);
  ws.add_term(IdxSet{1, 2}, Poly::constant(3, Rat(1)));
  FormField stratum_form(std::move(ws));

  TubeKernelCheck ok = tube_kernel_check(tube, ambient, stratum_form);
  CHECK(ok.ok);

  // Synthetic violation: a stratum form that is not the restriction, so the
  // pushed ambient kernel misses its kernel.
  FormField flat = const_form(4, {{{0, 1}, Rat(1)}});  // kernel span{d3, d4}
  TubeSystem bad = TubeSystem::model(c, {0});
  auto cb = bad.stratum;  // (x2, x3, x4)
  PolyForm wb(cb, 2);
  wb.add_term(IdxSet{0, 1}, Poly::constant(3, Rat(1)));  // dx2^dx3: kernel span{d4}
  FormField bad_form(std::move(wb));
  TubeKernelCheck fail = tube_kernel_check(bad, flat, bad_form);
  CHECK(!fail.ok);
  CHECK(fail.witness.has_value());
}

TEST_CASE("compatible polarization on the model") {
  auto c = Chart::standard(4);
  TubeSystem tube = TubeSystem::model(c, {0});
  // omega_alpha = dx3^dx4 on the stratum chart (x2,x3,x4), G_alpha = span{d3,d4}.
  auto cs = tube.stratum;
  PolyForm ws(cs, 2);
  ws.add_term(IdxSet{1, 2}, Poly::constant(3, Rat(1)));
  FormField lower(std::move(ws));
  RatMat g_lower = rat_zero(3, 2);
  g_lower(1, 0) = Rat(1);
  g_lower(2, 1) = Rat(1);

  // The higher form on the ambient chart away from the stratum. Use the
  // symplectic constant representative dx1^dx2 + dx3^dx4 (model setting with
  // constant kernel).
  FormField higher = const_form(4, {{{0, 1}, Rat(1)}, {{2, 3}, Rat(1)}});
  CompatiblePolarization cp = compatible_polarization(lower, g_lower, tube, higher);
  CHECK(cp.inclusion_ok);
  // G' contains the lifted G_alpha = span{d3, d4}.
  RatMat G(4, static_cast<int>(cp.g_frame.size()));
  for (std::size_t i = 0; i < cp.g_frame.size(); ++i) G.col(static_cast<int>(i)) = cp.g_frame[i];
  RatVec e3 = zero_pt(4), e4 = zero_pt(4);
  e3(2) = Rat(1);
  e4(3) = Rat(1);
  CHECK(in_span(G, e3));
  CHECK(in_span(G, e4));

  // Identity tube returns the lower polarization unchanged.
  TubeSystem id_tube = TubeSystem::model(cs, {});
  CompatiblePolarization same = compatible_polarization(lower, g_lower, id_tube, lower);
  CHECK(same.inclusion_ok);
  CHECK(same.g_frame.size() == 2);

  // Violated precondition: a degenerate higher form whose kernel leaves
  // ker(pi^* omega_alpha) = span{d1, d2}.
  FormField violator = const_form(4, {{{1, 2}, Rat(1)}});  // kernel span{d1, d4}
  CHECK_THROWS(compatible_polarization(lower, g_lower, tube, violator));
}

TEST_CASE("special connection") {
  // Already parallel: constant form on R^2.
  FormField flat = const_form(2, {{{0, 1}, Rat(1)}});
  ConnectionResult r1 = special_connection(flat, zero_pt(2), rat_identity(2));
  CHECK(r1.flat_at_point);
  CHECK(r1.residual.empty());
  for (auto& B : r1.correction) CHECK(B.isZero(Rat(0)));

  // (1+x1) dx1^dx2 on R^2: nonzero correction, flat at 0 exactly.
  auto c2 = Chart::standard(2);
  PolyForm f(c2, 2);
  f.add_term(IdxSet{0, 1}, Poly::constant(2, Rat(1)) + Poly::variable(2, 0));
  FormField curved(std::move(f));
  ConnectionResult r2 = special_connection(curved, zero_pt(2), rat_identity(2));
  CHECK(r2.flat_at_point);
  CHECK(r2.residual.empty());
  bool some_nonzero = false;
  for (auto& B : r2.correction)
    if (!B.isZero(Rat(0))) some_nonzero = true;
  CHECK(some_nonzero);

  // Rank-jumping model at a kernel point: the obstruction lives on the
  // kernel block and is reported.
  FormField w = model4d();
  ConnectionResult r3 = special_connection(w, zero_pt(4), rat_identity(4));
  CHECK(!r3.flat_at_point);
  REQUIRE(!r3.residual.empty());
  for (auto& e : r3.residual) {
    CHECK(e.i < 2);  // kernel block of the adapted basis comes first
    CHECK(e.j < 2);
  }
  // Components with a form slot outside the kernel are achieved exactly: the
  // achieved tensor vanishes whenever either form index leaves ker(omega_x).
  RatMat K = exact_kernel(w.eval(zero_pt(4)));
  RatMat comp = exact_kernel(RatMat(K.transpose()));
  for (int k = 0; k < 4; ++k) {
    RatMat A = r3.achieved[k];
    // Pairings with at least one complement vector vanish.
    CHECK((comp.transpose() * A * comp).isZero(Rat(0)));
    CHECK((comp.transpose() * A * K).isZero(Rat(0)));
    CHECK((K.transpose() * A * comp).isZero(Rat(0)));
  }

  // 20 random closed forms with nondegenerate value: exact flatness.
  std::mt19937_64 rng(41);
  int done = 0;
  while (done < 20) {
    skew::SkewForm q = skew::random_skew(rng, 4);
    if (skew::nullity(q) != 0) continue;
    // Constant + realized linear correction keeps closedness.
    FormField base = stratify::realize_form_at_point(q, zero_pt(4));
    ConnectionResult r = special_connection(base, zero_pt(4), rat_identity(4));
    CHECK(r.flat_at_point);
    ++done;
  }
}

TEST_CASE("presymplectic stabilization keeps the virtual dimension") {
  FormField w = const_form(3, {{{0, 1}, Rat(1)}});
  Polarization P = polarization_complement(w, null_distribution(w, Box::cube(3, -1, 1)),
                                           zero_pt(3));
  StabilizeResult s0 = stabilize(P, 0);
  CHECK(s0.record.vd_before == s0.record.vd_after);
  CHECK(s0.record.vd_before == 1);  // dim 3 - rank G 2

  StabilizeResult s2 = stabilize(P, 2);
  CHECK(s2.record.dim_after == 5);
  CHECK(s2.record.vd_after == 1);
  CHECK(s2.record.vd_before == s2.record.vd_after);
  CHECK(s2.thickened.omega.dim() == 5);
  CHECK(s2.thickened.f_frame.frame.size() == 3);  // old kernel + R^2
  CHECK(s2.thickened.g_frame.frame.size() == 2);
  // Thickened kernel really kills the extended form.
  for (auto& v : s2.thickened.f_frame.frame)
    CHECK(interior(v, s2.thickened.omega.form()).is_zero());

  // k = 5 on symplectic R^2: vd 0 before and after.
  FormField s = const_form(2, {{{0, 1}, Rat(1)}});
  FrameDistribution none{s.chart(), {}, 0};
  Polarization Ps = polarization_complement(s, none, zero_pt(2));
  StabilizeResult s5 = stabilize(Ps, 5);
  CHECK(s5.record.vd_before == 0);
  CHECK(s5.record.vd_after == 0);
}
