#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "strataform/rational.hpp"

namespace strataform {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RatMat = Mat<Rat>;
using RatVec = Vec<Rat>;

inline RatMat rat_zero(int r, int c) {
  RatMat m(r, c);
  m.setConstant(Rat(0));
  return m;
}

inline RatMat rat_identity(int n) {
  RatMat m = rat_zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Rat(1);
  return m;
}

inline Eigen::MatrixXd to_double(const RatMat& m) {
  Eigen::MatrixXd d(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) d(i, j) = m(i, j).to_double();
  return d;
}

inline Eigen::VectorXd to_double(const RatVec& v) {
  Eigen::VectorXd d(v.size());
  for (int i = 0; i < v.size(); ++i) d(i) = v(i).to_double();
  return d;
}

inline int exact_rank(const RatMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::FullPivLU<RatMat> lu(m);
  lu.setThreshold(Rat(0));
  return static_cast<int>(lu.rank());
}

// Columns span the exact nullspace {v : m v = 0}.
inline RatMat exact_kernel(const RatMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return rat_identity(static_cast<int>(m.cols()));
  Eigen::FullPivLU<RatMat> lu(m);
  lu.setThreshold(Rat(0));
  if (lu.dimensionOfKernel() == 0) return RatMat(m.cols(), 0);
  return lu.kernel();
}

inline Rat exact_det(const RatMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("exact_det: not square");
  if (m.rows() == 0) return Rat(1);
  Eigen::FullPivLU<RatMat> lu(m);
  lu.setThreshold(Rat(0));
  return lu.determinant();
}

// Solves m x = b exactly; throws when inconsistent.
inline RatVec exact_solve(const RatMat& m, const RatVec& b) {
  Eigen::FullPivLU<RatMat> lu(m);
  lu.setThreshold(Rat(0));
  RatVec x = lu.solve(b);
  RatVec r = m * x - b;
  for (int i = 0; i < r.size(); ++i)
    if (!r(i).is_zero()) throw std::runtime_error("exact_solve: inconsistent system");
  return x;
}

inline RatMat exact_inverse(const RatMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("exact_inverse: not square");
  Eigen::FullPivLU<RatMat> lu(m);
  lu.setThreshold(Rat(0));
  if (!lu.isInvertible()) throw std::runtime_error("exact_inverse: singular matrix");
  return lu.inverse();
}

// Pfaffian of a skew-symmetric matrix by expansion along the first row.
// Independent of the elimination-based routines; intended as an oracle at
// small sizes (n <= 10 or so).
inline Rat pfaffian(const RatMat& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("pfaffian: not square");
  if (n % 2 != 0) return Rat(0);
  if (n == 0) return Rat(1);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;

  struct Rec {
    const RatMat& a;
    Rat run(std::vector<int>& live) {
      const int k = static_cast<int>(live.size());
      if (k == 0) return Rat(1);
      Rat sum(0);
      const int i = live[0];
      for (int t = 1; t < k; ++t) {
        const int j = live[t];
        if (a(i, j).is_zero()) continue;
        std::vector<int> rest;
        rest.reserve(k - 2);
        for (int s = 1; s < k; ++s)
          if (s != t) rest.push_back(live[s]);
        Rat term = a(i, j) * run(rest);
        if (t % 2 == 0) term = -term;
        sum += term;
      }
      return sum;
    }
  } rec{m};
  return rec.run(idx);
}

// Membership of v in the column span of basis, exact.
inline bool in_span(const RatMat& basis, const RatVec& v) {
  RatMat aug(basis.rows(), basis.cols() + 1);
  aug.block(0, 0, basis.rows(), basis.cols()) = basis;
  aug.col(basis.cols()) = v;
  return exact_rank(aug) == exact_rank(basis);
}

}  // namespace strataform
