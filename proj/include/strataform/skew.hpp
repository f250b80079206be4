#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "strataform/dense.hpp"

namespace strataform {
namespace skew {

// Skew-symmetric bilinear form on an N-dimensional rational vector space.
class SkewForm {
 public:
  explicit SkewForm(RatMat entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("SkewForm: not square");
    for (int i = 0; i < m_.rows(); ++i) {
      if (!m_(i, i).is_zero()) throw std::invalid_argument("SkewForm: nonzero diagonal");
      for (int j = i + 1; j < m_.cols(); ++j)
        if (m_(i, j) != -m_(j, i)) throw std::invalid_argument("SkewForm: not antisymmetric");
    }
  }

  static SkewForm zero(int n) { return SkewForm(rat_zero(n, n)); }

  // From the strict upper triangle; the lower triangle is filled in.
  static SkewForm from_upper(int n, const std::vector<Rat>& upper) {
    RatMat m = rat_zero(n, n);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = upper.at(k);
        m(j, i) = -upper[k];
        ++k;
      }
    return SkewForm(m);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const RatMat& matrix() const { return m_; }
  const Rat& operator()(int i, int j) const { return m_(i, j); }

 private:
  RatMat m_;
};

// Subspace given by an exact basis (columns), checked independent.
class Subspace {
 public:
  Subspace(int ambient_dim, RatMat basis) : ambient_(ambient_dim), basis_(std::move(basis)) {
    if (basis_.rows() != ambient_ && basis_.cols() > 0)
      throw std::invalid_argument("Subspace: basis row count != ambient dim");
    if (basis_.cols() == 0) basis_ = RatMat(ambient_, 0);
    if (exact_rank(basis_) != basis_.cols())
      throw std::invalid_argument("Subspace: basis not linearly independent");
  }

  static Subspace trivial(int ambient) { return Subspace(ambient, RatMat(ambient, 0)); }
  static Subspace full(int ambient) { return Subspace(ambient, rat_identity(ambient)); }

  int ambient_dim() const { return ambient_; }
  int count() const { return static_cast<int>(basis_.cols()); }
  const RatMat& basis() const { return basis_; }
  bool contains(const RatVec& v) const { return in_span(basis_, v); }

 private:
  int ambient_;
  RatMat basis_;
};

// Nullity stratum of Lambda^2(V): ambient dimension N, nullity m.
struct StratumId {
  int N;
  int m;

  int ell() const { return (N - m) / 2; }
  bool empty() const { return m < 0 || m > N || (N - m) % 2 != 0; }
  int dim() const { return (N - m) * (N + m - 1) / 2; }
  int codim() const { return m * (m - 1) / 2; }
};

Subspace kernel(const SkewForm& Q);
int nullity(const SkewForm& Q);

struct DarbouxSplit {
  Subspace null_space;
  Subspace complement;     // perp_2-complement of the kernel
  SkewForm reduced;        // Gram representation of Q on the complement basis
};

// V = N_Q (+) N_Q^{perp_2} with Q = 0 (+) Q'. The auxiliary inner product
// defaults to the standard one; pass a symmetric positive Gram matrix to
// override.
DarbouxSplit darboux_split(const SkewForm& Q,
                           const std::optional<RatMat>& inner = std::nullopt);

struct StratumDim {
  int value;
  bool empty;  // N - m odd: the stratum is empty but the formula still reports
};

StratumDim stratum_dim(int N, int m);
int stratum_codim(int N, int m);

// Independent check of the dimension formula: rank of the Jacobian of the
// (kernel chart, nondegenerate block) parametrization at a random rational
// point. Resamples on chart degeneracy up to `trials`.
int stratum_dim_oracle(int N, int m, int trials, unsigned seed);

// Codimension criterion m(m-1)/2 <= N plus parity and range.
bool nullity_admissible(int N, int m);

// Both bounds relevant to admissibility reports: the printed radical from the
// source material and the one solving the codimension inequality.
struct AdmissibleBounds {
  double printed_radical;  // 1/2 + sqrt(8N + 1/4)
  double codim_radical;    // 1/2 + sqrt(2N + 1/4)
};
AdmissibleBounds admissible_bounds(int N);

// Deterministic random rational helpers (numerators in [-range, range],
// denominators in {1, 2, 3, 4}).
Rat random_rat(std::mt19937_64& rng, int range = 4);
SkewForm random_skew(std::mt19937_64& rng, int n, int range = 4);
// Random skew form with exact nullity m (N - m even required).
SkewForm random_skew_with_nullity(std::mt19937_64& rng, int N, int m);

}  // namespace skew
}  // namespace strataform
