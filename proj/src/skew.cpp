#include "strataform/skew.hpp"

#include <cmath>

namespace strataform {
namespace skew {

Subspace kernel(const SkewForm& Q) {
  return Subspace(Q.dim(), exact_kernel(Q.matrix()));
}

int nullity(const SkewForm& Q) { return Q.dim() - exact_rank(Q.matrix()); }

DarbouxSplit darboux_split(const SkewForm& Q, const std::optional<RatMat>& inner) {
  const int n = Q.dim();
  RatMat G = inner ? *inner : rat_identity(n);
  if (G.rows() != n || G.cols() != n)
    throw std::invalid_argument("darboux_split: inner product size mismatch");
  Subspace ker = kernel(Q);
  // perp_2-complement: null space of K^T G.
  RatMat KtG = ker.basis().transpose() * G;
  RatMat comp = exact_kernel(KtG);
  Subspace complement(n, comp);
  // Gram representation of Q on the complement basis.
  RatMat Qp = comp.transpose() * Q.matrix() * comp;
  SkewForm reduced(Qp);
  if (exact_rank(Qp) != static_cast<int>(Qp.rows()))
    throw std::logic_error("darboux_split: reduced form unexpectedly degenerate");
  return DarbouxSplit{std::move(ker), std::move(complement), std::move(reduced)};
}

StratumDim stratum_dim(int N, int m) {
  if (m < 0 || m > N) throw std::invalid_argument("stratum_dim: require 0 <= m <= N");
  return StratumDim{(N - m) * (N + m - 1) / 2, (N - m) % 2 != 0};
}

int stratum_codim(int N, int m) {
  if (m < 0 || m > N) throw std::invalid_argument("stratum_codim: require 0 <= m <= N");
  return m * (m - 1) / 2;
}

Rat random_rat(std::mt19937_64& rng, int range) {
  std::uniform_int_distribution<long> num(-range, range);
  std::uniform_int_distribution<long> den(1, 4);
  return Rat(num(rng), den(rng));
}

SkewForm random_skew(std::mt19937_64& rng, int n, int range) {
  std::vector<Rat> upper(n * (n - 1) / 2);
  for (auto& c : upper) c = random_rat(rng, range);
  return SkewForm::from_upper(n, upper);
}

SkewForm random_skew_with_nullity(std::mt19937_64& rng, int N, int m) {
  if ((N - m) % 2 != 0) throw std::invalid_argument("random_skew_with_nullity: N - m odd");
  const int r = N - m;
  for (int attempt = 0; attempt < 64; ++attempt) {
    // Nondegenerate block S on the last r coordinates of a random frame.
    RatMat S = rat_zero(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        Rat c = random_rat(rng);
        S(i, j) = c;
        S(j, i) = -c;
      }
    if (exact_rank(S) != r) continue;
    RatMat P = rat_zero(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) P(i, j) = random_rat(rng, 2);
    if (exact_rank(P) != N) continue;
    RatMat D = rat_zero(N, N);
    D.block(m, m, r, r) = S;
    RatMat Q = P.transpose() * D * P;
    return SkewForm(Q);
  }
  throw std::runtime_error("random_skew_with_nullity: sampling failed");
}

namespace {

// Chart point of the parametrization of Lambda^2_m: lower-left block A of the
// unitriangular frame and the nondegenerate block S.
struct StratumChartPoint {
  RatMat A;  // (N - m) x m
  RatMat S;  // (N - m) x (N - m), skew nondegenerate
};

// Q(A, S) = M^{-T} diag(0, S) M^{-1} with M = [[I, 0], [A, I]].
RatMat chart_value(int N, int m, const StratumChartPoint& p) {
  const int r = N - m;
  RatMat Minv = rat_identity(N);
  Minv.block(m, 0, r, m) = -p.A;
  RatMat D = rat_zero(N, N);
  D.block(m, m, r, r) = p.S;
  return Minv.transpose() * D * Minv;
}

void vectorize_upper(const RatMat& Q, RatMat& J, int col) {
  const int N = static_cast<int>(Q.rows());
  int row = 0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) J(row++, col) = Q(i, j);
}

}  // namespace

int stratum_dim_oracle(int N, int m, int trials, unsigned seed) {
  StratumDim want = stratum_dim(N, m);
  if (want.empty) return 0;
  const int r = N - m;
  std::mt19937_64 rng(seed);
  const int n_params = m * r + r * (r - 1) / 2;
  const int n_coords = N * (N - 1) / 2;

  for (int trial = 0; trial < trials; ++trial) {
    StratumChartPoint p;
    p.A = rat_zero(r, m);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < m; ++j) p.A(i, j) = random_rat(rng);
    p.S = rat_zero(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        Rat c = random_rat(rng);
        p.S(i, j) = c;
        p.S(j, i) = -c;
      }
    if (exact_rank(p.S) != r) continue;  // degenerate sample; resample

    // Directional derivatives of the chart along each parameter direction.
    RatMat Minv = rat_identity(N);
    Minv.block(m, 0, r, m) = -p.A;
    RatMat D = rat_zero(N, N);
    D.block(m, m, r, r) = p.S;

    RatMat J = rat_zero(n_coords, n_params);
    int col = 0;
    // dA directions: d(M^{-1}) = [[0,0],[-dA,0]].
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < m; ++j) {
        RatMat dMinv = rat_zero(N, N);
        dMinv(m + i, j) = Rat(-1);
        RatMat dQ = dMinv.transpose() * D * Minv + Minv.transpose() * D * dMinv;
        vectorize_upper(dQ, J, col++);
      }
    // dS directions.
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        RatMat dD = rat_zero(N, N);
        dD(m + i, m + j) = Rat(1);
        dD(m + j, m + i) = Rat(-1);
        RatMat dQ = Minv.transpose() * dD * Minv;
        vectorize_upper(dQ, J, col++);
      }
    return exact_rank(J);
  }
  throw std::runtime_error("stratum_dim_oracle: all samples degenerate");
}

bool nullity_admissible(int N, int m) {
  if (m < 0 || m > N) return false;
  if ((N - m) % 2 != 0) return false;
  return m * (m - 1) / 2 <= N;
}

AdmissibleBounds admissible_bounds(int N) {
  return AdmissibleBounds{0.5 + std::sqrt(8.0 * N + 0.25), 0.5 + std::sqrt(2.0 * N + 0.25)};
}

}  // namespace skew
}  // namespace strataform
