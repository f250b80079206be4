#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "strataform/linf.hpp"

using namespace strataform;
using namespace strataform::linf;
using foliation::GotayForm;
using foliation::Polarization;
using stratify::Box;
using stratify::FormField;

namespace {

FormField const_form(int n, std::initializer_list<std::pair<IdxSet, Rat>> terms) {
  auto c = Chart::standard(n);
  PolyForm w(c, 2);
  for (auto& [idx, coeff] : terms) w.add_term(idx, Poly::constant(n, coeff));
  return FormField(std::move(w));
}

RatVec zero_pt(int n) { return rat_zero(n, 1).col(0); }

GotayForm gotay_of(const FormField& w) {
  auto F = foliation::null_distribution(w, Box::cube(w.dim(), -1, 1));
  Polarization P = foliation::polarization_complement(w, F, zero_pt(w.dim()));
  return foliation::gotay_form(P, 3);
}

// Flat R^3 model: dx1^dx2, F = span{d3}.
VData vdata_r3() { return build_vdata(gotay_of(const_form(3, {{{0, 1}, Rat(1)}})), 4, 3); }
// Flat R^4 model: dx1^dx2, F = span{d3, d4}.
VData vdata_r4() { return build_vdata(gotay_of(const_form(4, {{{0, 1}, Rat(1)}})), 4, 3); }

// Curved rank-2 form on R^3: (1+x1) dx1^dx2, F = span{d3}.
VData vdata_curved() {
  auto c = Chart::standard(3);
  PolyForm w(c, 2);
  w.add_term(IdxSet{0, 1}, Poly::constant(3, Rat(1)) + Poly::variable(3, 0));
  return build_vdata(gotay_of(FormField(std::move(w))), 4, 3);
}

JetMVec vertical_unit(const VData& V, int a) {
  JetMVec v(V.chart(), 1);
  v.add_term(IdxSet{V.chart()->base_count() + a}, Jet::constant(V.ctx, Rat(1)));
  return v;
}

}  // namespace

TEST_CASE("vdata construction on flat and curved models") {
  VData v3 = vdata_r3();
  CHECK(v3.fiber_count == 1);
  CHECK(schouten(v3.poisson, v3.poisson).is_zero());  // exact for constant P

  VData v4 = vdata_r4();
  CHECK(v4.fiber_count == 2);
  CHECK(schouten(v4.poisson, v4.poisson).is_zero());

  VData vc = vdata_curved();
  JetMVec pp = schouten(vc.poisson, vc.poisson);
  for (auto& [idx, c] : pp.comps()) CHECK(c.is_zero_to_acc());
}

TEST_CASE("jet inversion of two-forms") {
  // (1+x1) dx1^dx2 at order 3 inverts to the geometric series.
  auto chart = Chart::standard(2);
  auto ctx = std::make_shared<JetContext>();
  ctx->chart = chart;
  ctx->base_point = zero_pt(2);
  ctx->cap_base = 3;
  ctx->cap_fiber = 0;
  PolyForm w(chart, 2);
  w.add_term(IdxSet{0, 1}, Poly::constant(2, Rat(1)) + Poly::variable(2, 0));
  JetMVec inv = invert_two_form_jet(to_jets(w, ctx), {0, 1});
  REQUIRE(inv.comps().size() == 1);
  Poly x = Poly::variable(2, 0);
  // Matrix inverse of (1+x1) J is (1+x1)^{-1} J^{-1}; component (1,2) of
  // J^{-1} is -1, so the bivector coefficient is -(1 - x + x^2 - x^3).
  Poly expect = -(Poly::constant(2, Rat(1)) - x + x * x - x * x * x);
  CHECK(inv.comps().begin()->second.rep() == expect);
  // Contraction with the input is the identity modulo the truncation order.
  Jet c01 = to_jets(w, ctx).comps().begin()->second;
  Jet prod = c01 * inv.comps().begin()->second;
  CHECK(prod.rep() == Poly::constant(2, Rat(-1)));

  // Degenerate at the base point.
  PolyForm bad(chart, 2);
  bad.add_term(IdxSet{0, 1}, Poly::variable(2, 0));
  CHECK_THROWS_AS(invert_two_form_jet(to_jets(bad, ctx), std::vector<int>{0, 1}),
                  NondegenerateError);
}

TEST_CASE("derived brackets on the flat model") {
  VData V = vdata_r3();

  // k = 0: strictness.
  CHECK(derived_bracket(V, {}).is_zero());

  // k = 1 on f = x3: the unit leafwise covector in the p3-dual direction.
  JetMVec f(V.chart(), 0);
  f.add_term(IdxSet{}, Jet::from_poly(V.ctx, Poly::variable(4, 2)));
  JetMVec l1f = derived_bracket(V, {f});
  CHECK(l1f == vertical_unit(V, 0));

  // k = 2 with constant-coefficient arguments vanishes.
  JetMVec s1 = vertical_unit(V, 0);
  JetMVec c(V.chart(), 0);
  c.add_term(IdxSet{}, Jet::constant(V.ctx, Rat(2)));
  CHECK(derived_bracket(V, {s1, c}).is_zero());

  // Arguments must be abelian.
  JetMVec horizontal(V.chart(), 1);
  horizontal.add_term(IdxSet{0}, Jet::constant(V.ctx, Rat(1)));
  CHECK_THROWS(derived_bracket(V, {horizontal}));
}

TEST_CASE("abelian projection and inclusion") {
  VData V = vdata_r4();
  for (int a = 0; a < 2; ++a) {
    JetMVec v = vertical_unit(V, a);
    CHECK(is_abelian(V, v));
    CHECK(project_abelian(V, v) == v);
  }
  CHECK(project_abelian(V, V.poisson).is_zero());
}

TEST_CASE("linf relations hold on the corpus") {
  for (auto maker : {&vdata_r3, &vdata_r4, &vdata_curved}) {
    LinfStructure L = make_structure(maker());
    VerifyReport rep = linf_verify(L, 4, 3, 2024);
    CHECK(rep.passed);
    CHECK(rep.l1_square_ok);
    CHECK(rep.jacobiator_matches);
    CHECK(rep.checked_arities == 4);
  }
}

TEST_CASE("sabotaged poisson element fails at arity 2 with witness") {
  VData V = vdata_r4();
  // B = p4 * d(x3) ^ d(p4) breaks [P,P] = 0 with a defect visible on the
  // abelian part, while keeping pi(P) and l1 intact.
  const int p4 = V.chart()->base_count() + 1;
  JetMVec B(V.chart(), 2);
  B.add_term(IdxSet{2, p4}, Jet::from_poly(V.ctx, Poly::variable(V.chart()->dim(), p4)));
  V.poisson += B;
  CHECK(!schouten(V.poisson, V.poisson).is_zero());

  LinfStructure L = make_structure(V);
  VerifyReport rep = linf_verify(L, 3, 12, 7);
  CHECK(!rep.passed);
  CHECK(rep.first_failure_arity == 2);
  CHECK(!rep.witness.empty());
}

TEST_CASE("strictness") {
  CHECK(strictness_check(make_structure(vdata_r3())));
  CHECK(strictness_check(make_structure(vdata_r4())));
  CHECK(strictness_check(make_structure(vdata_curved())));

  // A structure with an imposed nonzero l0 is not strict by definition.
  VData V = vdata_r3();
  LinfStructure L{V, vertical_unit(V, 0)};
  CHECK(!strictness_check(L));
}

TEST_CASE("curved augmentation") {
  FormField w = const_form(3, {{{0, 1}, Rat(1)}});
  std::vector<int> f_coords{2};
  auto dd = [&](int i) {
    PolyMVec v(w.chart(), 1);
    v.add_term(IdxSet{i}, Poly::constant(3, Rat(1)));
    return v;
  };

  // Own form: identically zero for any X (omega kills its kernel).
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    PolyMVec X(w.chart(), 1);
    for (int i = 0; i < 3; ++i) {
      std::uniform_int_distribution<long> c(-3, 3);
      Poly coeff = Rat(c(rng)) * Poly::variable(3, i % 3) + Poly::constant(3, Rat(c(rng)));
      if (!coeff.is_zero()) X.add_term(IdxSet{i}, coeff);
    }
    Augmentation a = curved_augmentation(w, f_coords, X);
    CHECK(a.eta.is_zero());
    CHECK(a.closed);
  }

  // Ambient form dx1^dx3: X = d1 contracts to the unit leafwise form dx3.
  FormField ambient = const_form(3, {{{0, 2}, Rat(1)}});
  Augmentation a = curved_augmentation(ambient, f_coords, dd(0));
  REQUIRE(!a.eta.is_zero());
  auto it = a.eta.form.comps().find(IdxSet{2});
  REQUIRE(it != a.eta.form.comps().end());
  CHECK(it->second == Poly::constant(3, Rat(1)));
  CHECK(a.closed);

  // X = 0 gives zero.
  PolyMVec zero(w.chart(), 1);
  CHECK(curved_augmentation(ambient, f_coords, zero).eta.is_zero());

  // Closedness verdict against the independent expansion (restrict after d).
  std::uniform_int_distribution<long> c(-2, 2);
  for (int rep = 0; rep < 10; ++rep) {
    PolyForm amb(w.chart(), 2);
    amb.add_term(IdxSet{0, 2}, Poly::variable(3, 0) * Rat(c(rng)) + Poly::constant(3, Rat(1)));
    amb.add_term(IdxSet{1, 2}, Poly::variable(3, 1) * Rat(c(rng)));
    FormField ref(amb, /*require_closed=*/false);
    PolyMVec X(w.chart(), 1);
    X.add_term(IdxSet{0}, Poly::constant(3, Rat(1)));
    Poly xc = Poly::variable(3, 2) * Rat(c(rng));
    if (!xc.is_zero()) X.add_term(IdxSet{1}, xc);
    Augmentation got = curved_augmentation(ref, f_coords, X);
    PolyForm deta_full = exterior_d(interior(X, ref.form()));
    bool closed_independent = true;
    for (auto& [idx, coeff] : deta_full.comps()) {
      bool leafwise = true;
      for (int i : idx)
        if (std::find(f_coords.begin(), f_coords.end(), i) == f_coords.end()) leafwise = false;
      if (leafwise && !coeff.is_zero()) closed_independent = false;
    }
    CHECK(got.closed == closed_independent);
  }
}

TEST_CASE("maurer-cartan series") {
  VData V4 = vdata_r4();
  LinfStructure L = make_structure(V4);
  const int nb = V4.chart()->base_count();
  const int nt = V4.chart()->dim();

  // sigma = 0: the series is l0 = 0 in the strict case.
  JetMVec zero(V4.chart(), 1);
  McResult r0 = mc_series(L, zero, 4);
  CHECK(r0.value.is_zero());
  CHECK(r0.coisotropic_to_order);

  // sigma = x3 dy3: leafwise closed, flat model, MC vanishes.
  JetMVec s1(V4.chart(), 1);
  s1.add_term(IdxSet{nb}, Jet::from_poly(V4.ctx, Poly::variable(nt, 2)));
  McResult r1 = mc_series(L, s1, 4);
  CHECK(r1.coisotropic_to_order);

  // sigma = x3 dy4: d_F sigma = dy3^dy4 != 0, not coisotropic.
  JetMVec s2(V4.chart(), 1);
  s2.add_term(IdxSet{nb + 1}, Jet::from_poly(V4.ctx, Poly::variable(nt, 2)));
  McResult r2 = mc_series(L, s2, 4);
  CHECK(!r2.coisotropic_to_order);
  CHECK(!r2.value.is_zero());
}

TEST_CASE("mc series equals l0 at sigma = 0 and sees the augmentation") {
  VData V = vdata_r3();
  LinfStructure L{V, vertical_unit(V, 0)};  // curved: l0 = dy3
  JetMVec zero(V.chart(), 1);
  McResult r = mc_series(L, zero, 3);
  CHECK(r.value == *L.curved_l0);
  CHECK(!r.coisotropic_to_order);
}

TEST_CASE("tangent complex and virtual dimension") {
  auto chart3 = Chart::standard(3);
  std::vector<int> f_coords{2};

  FoliationForm zero{chart3, f_coords, PolyForm(chart3, 1)};
  TangentComplexReport rep = tangent_complex(zero, zero_pt(3), 3, 1);
  CHECK(rep.rank_d0 == 0);
  CHECK(rep.chi_fiber == 1);  // C(1,1) with sign (+1)
  CHECK(rep.vir_dim == 2);
  CHECK(rep.fiber_dims == std::vector<int>{1});
  CHECK(!rep.convention.empty());

  // m = 0: empty fiber complex, vir.dim = dim Y.
  FoliationForm none{Chart::standard(2), {}, PolyForm(Chart::standard(2), 1)};
  TangentComplexReport r0 = tangent_complex(none, zero_pt(2), 2, 0);
  CHECK(r0.chi_fiber == 0);
  CHECK(r0.vir_dim == 2);

  // Nontrivial l0 = x3 dy3: zero at the origin, rank-1 Jacobian.
  PolyForm lin(chart3, 1);
  lin.add_term(IdxSet{2}, Poly::variable(3, 2));
  FoliationForm l0{chart3, f_coords, lin};
  TangentComplexReport r1 = tangent_complex(l0, zero_pt(3), 3, 1);
  CHECK(r1.rank_d0 == 1);
  CHECK(r1.cohomology == std::vector<int>{2, 0});

  // A non-zero point is rejected.
  RatVec p(3);
  p(0) = Rat(0); p(1) = Rat(0); p(2) = Rat(1);
  CHECK_THROWS(tangent_complex(l0, p, 3, 1));
}

TEST_CASE("accuracy bookkeeping exhausts gracefully") {
  // Orders too small to certify [P,P] = 0 on the curved example.
  auto c = Chart::standard(3);
  PolyForm w(c, 2);
  w.add_term(IdxSet{0, 1}, Poly::constant(3, Rat(1)) + Poly::variable(3, 0));
  GotayForm g = gotay_of(FormField(std::move(w)));
  CHECK_THROWS_AS(build_vdata(g, 0, 1), AccuracyExhausted);
}
