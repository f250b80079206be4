#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "strataform/dense.hpp"
#include "strataform/rational.hpp"

using namespace strataform;

TEST_CASE("rational arithmetic is exact and canonical") {
  Rat a(1, 3), b(1, 6);
  CHECK(a + b == Rat(1, 2));
  CHECK(a - b == Rat(1, 6));
  CHECK(a * b == Rat(1, 18));
  CHECK(a / b == Rat(2));
  CHECK(Rat(2, 4) == Rat(1, 2));
  CHECK(Rat(-3, -6) == Rat(1, 2));
  CHECK((-a).str() == "-1/3");
  CHECK(Rat::parse("3/4") == Rat(3, 4));
  CHECK(Rat::parse("-2") == Rat(-2));
  CHECK(Rat(1, 3).pow(3) == Rat(1, 27));
  CHECK(Rat(2).pow(-2) == Rat(1, 4));
  CHECK(abs(Rat(-5, 7)) == Rat(5, 7));
  CHECK_THROWS(Rat(1) / Rat(0));
}

TEST_CASE("dyadic snap") {
  CHECK(Rat::snap(0.5, 4) == Rat(1, 2));
  CHECK(Rat::snap(1e-12, 12) == Rat(0));
  CHECK(Rat::snap(-0.75, 8) == Rat(-3, 4));
}

TEST_CASE("exact dense kernels and ranks") {
  RatMat q = rat_zero(3, 3);
  q(0, 1) = Rat(1);
  q(1, 0) = Rat(-1);
  CHECK(exact_rank(q) == 2);
  RatMat k = exact_kernel(q);
  CHECK(k.cols() == 1);
  CHECK((q * k).isZero(Rat(0)));

  RatMat a = rat_zero(2, 2);
  a(0, 0) = Rat(1, 3);
  a(0, 1) = Rat(2);
  a(1, 1) = Rat(5, 7);
  RatVec b(2);
  b(0) = Rat(1);
  b(1) = Rat(1);
  RatVec x = exact_solve(a, b);
  CHECK((a * x - b).isZero(Rat(0)));
  CHECK(exact_det(a) == Rat(5, 21));
}

TEST_CASE("pfaffian at small sizes") {
  RatMat j = rat_zero(2, 2);
  j(0, 1) = Rat(3);
  j(1, 0) = Rat(-3);
  CHECK(pfaffian(j) == Rat(3));

  // Pf^2 = det for random 4x4 and 6x6 skew matrices.
  std::mt19937_64 rng(11);
  auto rnd = [&rng]() {
    std::uniform_int_distribution<long> d(-5, 5);
    return Rat(d(rng), 2);
  };
  for (int n : {4, 6}) {
    for (int rep = 0; rep < 10; ++rep) {
      RatMat m = rat_zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int jj = i + 1; jj < n; ++jj) {
          Rat c = rnd();
          m(i, jj) = c;
          m(jj, i) = -c;
        }
      CHECK(pfaffian(m) * pfaffian(m) == exact_det(m));
    }
  }
}
