#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "strataform/exterior.hpp"

using namespace strataform;

namespace {

Poly rpoly(std::mt19937_64& rng, int nvars, int max_deg) {
  std::uniform_int_distribution<int> nterms(1, 3);
  std::uniform_int_distribution<long> num(-3, 3);
  std::uniform_int_distribution<int> deg(0, max_deg);
  Poly p(nvars);
  int t = nterms(rng);
  for (int k = 0; k < t; ++k) {
    Mono m(nvars, 0);
    int budget = deg(rng);
    for (int i = 0; i < nvars && budget > 0; ++i) {
      std::uniform_int_distribution<int> e(0, budget);
      m[i] = e(rng);
      budget -= m[i];
    }
    p.add_term(m, Rat(num(rng)));
  }
  return p;
}

PolyForm rform(std::mt19937_64& rng, const ChartPtr& chart, int degree, int max_deg) {
  PolyForm f(chart, degree);
  const int n = chart->dim();
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int t = 0; t < 3; ++t) {
    IdxSet idx;
    while (static_cast<int>(idx.size()) < degree) {
      int i = pick(rng);
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    f.add_term(idx, rpoly(rng, n, max_deg));
  }
  return f;
}

PolyMVec rmvec(std::mt19937_64& rng, const ChartPtr& chart, int degree, int max_deg) {
  PolyMVec v(chart, degree);
  const int n = chart->dim();
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int t = 0; t < 2; ++t) {
    IdxSet idx;
    while (static_cast<int>(idx.size()) < degree) {
      int i = pick(rng);
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    v.add_term(idx, rpoly(rng, n, max_deg));
  }
  return v;
}

PolyForm dx(const ChartPtr& c, int i) {
  PolyForm f(c, 1);
  f.add_term(IdxSet{i}, Poly::constant(c->dim(), Rat(1)));
  return f;
}

PolyMVec dd(const ChartPtr& c, int i) {
  PolyMVec v(c, 1);
  v.add_term(IdxSet{i}, Poly::constant(c->dim(), Rat(1)));
  return v;
}

}  // namespace

TEST_CASE("exterior derivative on basic forms") {
  auto c = Chart::standard(2);
  Poly x1 = Poly::variable(2, 0);
  PolyForm a(c, 1);
  a.add_term(IdxSet{1}, x1);  // x1 dx2
  CHECK(exterior_d(a) == wedge(dx(c, 0), dx(c, 1)));

  PolyForm b(c, 2);
  b.add_term(IdxSet{0, 1}, x1);  // x1 dx1^dx2
  CHECK(exterior_d(b).is_zero());
}

TEST_CASE("d squared vanishes on random 1-forms") {
  std::mt19937_64 rng(101);
  for (int n = 2; n <= 5; ++n) {
    auto c = Chart::standard(n);
    for (int rep = 0; rep < 50 / (n - 1); ++rep) {
      PolyForm a = rform(rng, c, 1, 3);
      CHECK(exterior_d(exterior_d(a)).is_zero());
    }
  }
}

TEST_CASE("interior product basics") {
  auto c = Chart::standard(3);
  PolyForm w = wedge(dx(c, 0), dx(c, 1));
  CHECK(interior(dd(c, 0), w) == dx(c, 1));
  CHECK(interior(dd(c, 2), w).is_zero());
}

TEST_CASE("wedge graded commutativity") {
  std::mt19937_64 rng(103);
  auto c = Chart::standard(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::uniform_int_distribution<int> dg(0, 2);
    int p = dg(rng), q = dg(rng);
    PolyForm a = rform(rng, c, p, 2);
    PolyForm b = rform(rng, c, q, 2);
    PolyForm ab = wedge(a, b);
    PolyForm ba = wedge(b, a);
    if ((p * q) % 2 == 1)
      CHECK(ab == -ba);
    else
      CHECK(ab == ba);
  }
}

TEST_CASE("degree overflow gives the zero form") {
  auto c = Chart::standard(2);
  PolyForm w = wedge(dx(c, 0), dx(c, 1));
  CHECK(wedge(w, w).is_zero());
  CHECK(wedge(w, dx(c, 0)).is_zero());
}

TEST_CASE("interior is a graded derivation of wedge") {
  std::mt19937_64 rng(107);
  auto c = Chart::standard(4);
  for (int rep = 0; rep < 25; ++rep) {
    std::uniform_int_distribution<int> dg(1, 2);
    int p = dg(rng), q = dg(rng);
    PolyForm a = rform(rng, c, p, 2);
    PolyForm b = rform(rng, c, q, 2);
    PolyMVec v = rmvec(rng, c, 1, 2);
    PolyForm lhs = interior(v, wedge(a, b));
    PolyForm rhs = wedge(interior(v, a), b);
    PolyForm second = wedge(a, interior(v, b));
    if (p % 2 == 1)
      rhs -= second;
    else
      rhs += second;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("schouten bracket known values") {
  auto c = Chart::standard(3);
  Poly x1 = Poly::variable(3, 0);

  // [d1, x1*d2] = d2  (Lie bracket case)
  PolyMVec v1 = dd(c, 0);
  PolyMVec v2(c, 1);
  v2.add_term(IdxSet{1}, x1);
  CHECK(schouten(v1, v2) == dd(c, 1));

  // [v, f] = v(f)
  PolyMVec f(c, 0);
  f.add_term(IdxSet{}, x1 * x1);
  PolyMVec expect(c, 0);
  expect.add_term(IdxSet{}, Rat(2) * x1);
  CHECK(schouten(v1, f) == expect);

  // constant bivector has [P,P] = 0
  PolyMVec P(c, 2);
  P.add_term(IdxSet{0, 1}, Poly::constant(3, Rat(1)));
  CHECK(schouten(P, P).is_zero());
}

TEST_CASE("schouten detects non-poisson bivectors") {
  auto c = Chart::standard(3);
  PolyMVec P(c, 2);
  P.add_term(IdxSet{0, 1}, Poly::constant(3, Rat(1)));
  P.add_term(IdxSet{1, 2}, Poly::variable(3, 1));  // x2 d2^d3
  PolyMVec br = schouten(P, P);
  REQUIRE(br.degree() == 3);
  CHECK(!br.is_zero());
}

TEST_CASE("schouten graded antisymmetry and jacobi") {
  std::mt19937_64 rng(109);
  auto c = Chart::standard(4);
  std::uniform_int_distribution<int> dg(0, 2);
  int checked = 0;
  for (int rep = 0; rep < 120 && checked < 30; ++rep) {
    int p = dg(rng), q = dg(rng), r = dg(rng);
    PolyMVec P = rmvec(rng, c, p, 2);
    PolyMVec Q = rmvec(rng, c, q, 2);
    PolyMVec R = rmvec(rng, c, r, 2);

    // Graded antisymmetry in the shifted grading: [P,Q] = -(-1)^{(p-1)(q-1)}[Q,P].
    PolyMVec pq = schouten(P, Q);
    PolyMVec qp = schouten(Q, P);
    if (((p - 1) * (q - 1)) % 2 == 0)
      CHECK(pq == -qp);
    else
      CHECK(pq == qp);

    // Graded Jacobi: [P,[Q,R]] = [[P,Q],R] + (-1)^{(p-1)(q-1)} [Q,[P,R]].
    if (p + q + r >= 2) {
      PolyMVec lhs = schouten(P, schouten(Q, R));
      PolyMVec rhs = schouten(schouten(P, Q), R);
      PolyMVec second = schouten(Q, schouten(P, R));
      if (((p - 1) * (q - 1)) % 2 == 0)
        rhs += second;
      else
        rhs -= second;
      CHECK(lhs == rhs);
      ++checked;
    }
  }
  CHECK(checked >= 30);
}

TEST_CASE("pullback basics and naturality") {
  auto src = Chart::standard(3);
  auto dst = Chart::make({"y1", "y2"});
  PolyMap pi{src, dst, {Poly::variable(3, 1), Poly::variable(3, 2)}};
  CHECK(pullback(pi, wedge(dx(dst, 0), dx(dst, 1))) == wedge(dx(src, 1), dx(src, 2)));

  PolyMap id{src, src, {Poly::variable(3, 0), Poly::variable(3, 1), Poly::variable(3, 2)}};
  std::mt19937_64 rng(113);
  for (int rep = 0; rep < 5; ++rep) {
    PolyForm a = rform(rng, src, 2, 2);
    CHECK(pullback(id, a) == a);
  }

  // d(phi^* a) = phi^*(d a) for random polynomial maps R^3 -> R^2.
  for (int rep = 0; rep < 30; ++rep) {
    PolyMap phi{src, dst, {rpoly(rng, 3, 2), rpoly(rng, 3, 2)}};
    PolyForm a = rform(rng, dst, 1, 2);
    CHECK(exterior_d(pullback(phi, a)) == pullback(phi, exterior_d(a)));
  }
}

TEST_CASE("linear pushforward of multivectors") {
  auto c = Chart::standard(2);
  auto cdst = Chart::make({"y1", "y2"});
  RatMat L = rat_zero(2, 2);
  L(0, 1) = Rat(1);
  L(1, 0) = Rat(1);  // swap coordinates
  PolyMVec v(c, 2);
  v.add_term(IdxSet{0, 1}, Poly::variable(2, 0));  // x1 d1^d2
  PolyMVec expect(cdst, 2);
  expect.add_term(IdxSet{0, 1}, -Poly::variable(2, 1));
  CHECK(pushforward_linear(L, cdst, v) == expect);

  CHECK(pushforward_linear(rat_identity(2), c, v) == v);
}

TEST_CASE("two-form evaluation") {
  auto c = Chart::standard(4);
  PolyForm w(c, 2);
  w.add_term(IdxSet{0, 1}, Poly::variable(4, 0));  // x1 dx1^dx2
  w.add_term(IdxSet{2, 3}, Poly::constant(4, Rat(1)));
  RatVec x(4);
  x(0) = Rat(1, 2);
  x(1) = Rat(0);
  x(2) = Rat(0);
  x(3) = Rat(0);
  RatMat m = eval_two_form(w, x);
  CHECK(m(0, 1) == Rat(1, 2));
  CHECK(m(1, 0) == Rat(-1, 2));
  CHECK(m(2, 3) == Rat(1));
}

TEST_CASE("jet-coefficient forms compose with the exterior operations") {
  auto chart = Chart::make_split({"x1", "x2"}, {"p1"});
  auto ctx = std::make_shared<JetContext>();
  ctx->chart = chart;
  ctx->base_point = rat_zero(3, 1).col(0);
  ctx->cap_base = 3;
  ctx->cap_fiber = 2;

  Poly x1 = Poly::variable(3, 0);
  PolyForm w(chart, 2);
  w.add_term(IdxSet{0, 1}, Poly::constant(3, Rat(1)) + x1);
  JetForm jw = to_jets(w, ctx);
  JetForm djw = exterior_d(jw);
  // d((1+x1)dx1^dx2) = 0.
  CHECK(djw.is_zero());
}
