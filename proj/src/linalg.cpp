#include "wapss/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace wapss {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double spectral_abscissa(const Matrix& m) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("spectral abscissa requires a square matrix");
  if (!m.allFinite()) throw NonFinite("matrix contains a non-finite entry");
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigenvalue iteration did not converge");
  return solver.eigenvalues().real().maxCoeff();
}

Matrix pseudo_inverse(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const double cutoff = rel_tol * sv(0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

double pbh_min_singular_value(const Matrix& a, const Matrix& c,
                              Complex lambda) {
  const Eigen::Index n = a.rows();
  ComplexMatrix pbh(n + c.rows(), n);
  pbh.topRows(n) = a.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
  pbh.bottomRows(c.rows()) = c.cast<Complex>();
  Eigen::JacobiSVD<ComplexMatrix> svd(pbh);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace wapss
