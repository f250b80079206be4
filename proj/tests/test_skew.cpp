#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "strataform/skew.hpp"

using namespace strataform;
using namespace strataform::skew;

TEST_CASE("kernel of basic forms") {
  // Nondegenerate 2x2.
  SkewForm q2 = SkewForm::from_upper(2, {Rat(1)});
  CHECK(kernel(q2).count() == 0);
  CHECK(nullity(q2) == 0);

  // Zero 3x3.
  SkewForm z3 = SkewForm::zero(3);
  CHECK(kernel(z3).count() == 3);

  // e1 ^ e2 on R^3: kernel = span{e3}.
  SkewForm q3 = SkewForm::from_upper(3, {Rat(1), Rat(0), Rat(0)});
  Subspace k = kernel(q3);
  CHECK(k.count() == 1);
  RatVec e3 = RatVec(3);
  e3(0) = Rat(0);
  e3(1) = Rat(0);
  e3(2) = Rat(1);
  CHECK(k.contains(e3));
}

TEST_CASE("darboux split") {
  SkewForm q3 = SkewForm::from_upper(3, {Rat(1), Rat(0), Rat(0)});
  DarbouxSplit s = darboux_split(q3);
  CHECK(s.null_space.count() == 1);
  CHECK(s.complement.count() == 2);
  CHECK(s.reduced.dim() == 2);
  CHECK(!pfaffian(s.reduced.matrix()).is_zero());

  DarbouxSplit z = darboux_split(SkewForm::zero(3));
  CHECK(z.null_space.count() == 3);
  CHECK(z.complement.count() == 0);
  CHECK(z.reduced.dim() == 0);

  // Random rational 6x6: reduced block nondegenerate, by exact Pfaffian.
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    SkewForm q = random_skew(rng, 6);
    DarbouxSplit d = darboux_split(q);
    if (d.reduced.dim() > 0) CHECK(!pfaffian(d.reduced.matrix()).is_zero());
    // Third component has nullity 0.
    CHECK(nullity(d.reduced) == 0);
    // Kernel + complement spans everything.
    CHECK(d.null_space.count() + d.complement.count() == 6);
  }
}

TEST_CASE("stratum dimension formulas") {
  CHECK(stratum_dim(4, 0).value == 6);
  CHECK(stratum_dim(4, 2).value == 5);
  CHECK(stratum_dim(5, 5).value == 0);
  CHECK(stratum_dim(4, 0).empty == false);
  CHECK(stratum_dim(4, 1).empty == true);

  CHECK(stratum_codim(4, 2) == 1);
  CHECK(stratum_codim(4, 0) == 0);
  CHECK(stratum_codim(5, 1) == 0);
  CHECK(stratum_codim(6, 4) == 6);

  // dim + codim = N(N-1)/2 for all N <= 8.
  for (int N = 1; N <= 8; ++N)
    for (int m = 0; m <= N; ++m)
      CHECK(stratum_dim(N, m).value + stratum_codim(N, m) == N * (N - 1) / 2);
}

TEST_CASE("stratum dimension oracle") {
  CHECK(stratum_dim_oracle(2, 0, 8, 17) == 1);
  CHECK(stratum_dim_oracle(3, 1, 8, 17) == 3);
  CHECK(stratum_dim_oracle(4, 2, 8, 17) == 5);
  // Exhaustive sweep N <= 6, admissible m with nonempty stratum.
  for (int N = 1; N <= 6; ++N)
    for (int m = N % 2; m <= N; m += 2)
      CHECK(stratum_dim_oracle(N, m, 8, 1000 + 10 * N + m) == stratum_dim(N, m).value);
}

TEST_CASE("nullity admissibility") {
  CHECK(!nullity_admissible(4, 4));  // codim 6 > 4
  CHECK(nullity_admissible(4, 2));   // codim 1 <= 4
  CHECK(nullity_admissible(3, 3));   // codim 3 <= 3
  CHECK(!nullity_admissible(4, 1));  // parity
  CHECK(!nullity_admissible(4, 5));
  auto b = admissible_bounds(4);
  CHECK(b.printed_radical == doctest::Approx(0.5 + std::sqrt(32.25)));
  CHECK(b.codim_radical == doctest::Approx(0.5 + std::sqrt(8.25)));
}

TEST_CASE("nullity upper semicontinuity along sampled pencils") {
  std::mt19937_64 rng(23);
  const int N = 4;
  for (int rep = 0; rep < 20; ++rep) {
    SkewForm q = random_skew_with_nullity(rng, N, 2);
    const int m = nullity(q);
    REQUIRE(m == 2);
    SkewForm a = random_skew(rng, N, 1);
    for (int k = 4; k <= 12; ++k) {
      Rat eps = Rat(1, 1L << k);
      SkewForm perturbed(q.matrix() + eps * a.matrix());
      CHECK(nullity(perturbed) <= m);
    }
  }
}

TEST_CASE("random nullity sampler hits the requested stratum") {
  std::mt19937_64 rng(29);
  for (int N = 2; N <= 6; ++N)
    for (int m = N % 2; m <= N; m += 2) {
      SkewForm q = random_skew_with_nullity(rng, N, m);
      CHECK(nullity(q) == m);
    }
}
