#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "strataform/jet.hpp"
#include "strataform/poly.hpp"

using namespace strataform;

namespace {

Poly random_poly(std::mt19937_64& rng, int nvars, int max_deg, int terms) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<long> num(-4, 4);
  Poly p(nvars);
  for (int t = 0; t < terms; ++t) {
    Mono m(nvars, 0);
    int budget = deg(rng);
    for (int i = 0; i < nvars && budget > 0; ++i) {
      std::uniform_int_distribution<int> e(0, budget);
      m[i] = e(rng);
      budget -= m[i];
    }
    p.add_term(m, Rat(num(rng), 2));
  }
  return p;
}

}  // namespace

TEST_CASE("polynomial ring basics") {
  Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
  Poly p = x * x + Rat(2) * x * y - Poly::constant(2, Rat(1, 2));
  CHECK(p.total_degree() == 2);
  RatVec at(2);
  at(0) = Rat(1, 2);
  at(1) = Rat(3);
  CHECK(p.eval(at) == Rat(1, 4) + Rat(3) - Rat(1, 2));
  CHECK(p.derivative(0) == Rat(2) * x + Rat(2) * y);
  CHECK((p - p).is_zero());
  CHECK(p.str(std::vector<std::string>{"x", "y"}) == "x^2 + 2*x*y - 1/2");
}

TEST_CASE("ring axioms on random polynomials") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    Poly a = random_poly(rng, 3, 3, 4);
    Poly b = random_poly(rng, 3, 3, 4);
    Poly c = random_poly(rng, 3, 2, 3);
    CHECK(a * b == b * a);
    CHECK(a * (b + c) == a * b + a * c);
    CHECK((a * b) * c == a * (b * c));
  }
}

TEST_CASE("substitution and shift") {
  Poly x = Poly::variable(1, 0);
  Poly p = x * x;  // x^2
  RatVec x0(1);
  x0(0) = Rat(1);
  Poly shifted = p.shift(x0);  // (x+1)^2
  CHECK(shifted == x * x + Rat(2) * x + Poly::constant(1, Rat(1)));
  // Leibniz under substitution: d/dx f(x^2) = f'(x^2) * 2x.
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    Poly f = random_poly(rng, 1, 3, 3);
    Poly g = x * x;
    Poly composed = f.substitute(std::vector<Poly>{g});
    CHECK(composed.derivative(0) ==
          f.derivative(0).substitute(std::vector<Poly>{g}) * g.derivative(0));
  }
}

TEST_CASE("jet arithmetic is the quotient of polynomial arithmetic") {
  auto chart = Chart::standard(2);
  auto ctx = std::make_shared<JetContext>();
  ctx->chart = chart;
  ctx->base_point = RatVec(2);
  ctx->base_point(0) = Rat(0);
  ctx->base_point(1) = Rat(0);
  ctx->cap_base = 3;
  ctx->cap_fiber = 0;

  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    Poly f = random_poly(rng, 2, 4, 4);
    Poly g = random_poly(rng, 2, 4, 4);
    Jet jf = Jet::from_poly(ctx, f);
    Jet jg = Jet::from_poly(ctx, g);
    // truncate(f*g) == truncate(truncate(f)*truncate(g))
    CHECK(Jet::from_poly(ctx, f * g) == jf * jg);
    CHECK(Jet::from_poly(ctx, f + g) == jf + jg);
  }
}

TEST_CASE("jet inverse by geometric series") {
  auto chart = Chart::standard(1);
  auto ctx = std::make_shared<JetContext>();
  ctx->chart = chart;
  ctx->base_point = RatVec(1);
  ctx->base_point(0) = Rat(0);
  ctx->cap_base = 3;
  ctx->cap_fiber = 0;

  Poly x = Poly::variable(1, 0);
  Jet j = Jet::from_poly(ctx, Poly::constant(1, Rat(1)) + x);  // 1 + x
  Jet inv = j.inverse();
  // 1 - x + x^2 - x^3
  Poly expect = Poly::constant(1, Rat(1)) - x + x * x - x * x * x;
  CHECK(inv.rep() == expect);
  Jet prod = j * inv;
  CHECK(prod.rep() == Poly::constant(1, Rat(1)));  // exact within cap

  Jet degenerate = Jet::from_poly(ctx, x);
  CHECK_THROWS(degenerate.inverse());
}

TEST_CASE("jet accuracy bookkeeping") {
  auto chart = Chart::make_split({"x"}, {"p"});
  auto ctx = std::make_shared<JetContext>();
  ctx->chart = chart;
  ctx->base_point = RatVec(2);
  ctx->base_point(0) = Rat(0);
  ctx->base_point(1) = Rat(0);
  ctx->cap_base = 2;
  ctx->cap_fiber = 2;

  Poly x = Poly::variable(2, 0), p = Poly::variable(2, 1);
  Jet j = Jet::from_poly(ctx, x * p);
  CHECK(j.acc_base() == 2);
  CHECK(j.acc_fiber() == 2);
  Jet dx = j.derivative(0);
  CHECK(dx.acc_base() == 1);
  CHECK(dx.acc_fiber() == 2);
  Jet dp = j.derivative(1);
  CHECK(dp.acc_base() == 2);
  CHECK(dp.acc_fiber() == 1);

  // Truncation-dropped terms beyond accuracy do not count against zero tests.
  Jet high = Jet::from_poly(ctx, x * x * x);  // degree 3 > cap_base: dropped
  CHECK(high.is_zero());
  CHECK(high.is_zero_to_acc());
}
