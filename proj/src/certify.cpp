#include "wapss/certify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "wapss/detail/json_util.hpp"
#include "wapss/linalg.hpp"

namespace wapss {

namespace {

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(std::string(name) + " must be square, got " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
}

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite())
    throw NonFinite(std::string(name) + " contains a non-finite entry");
}

void require_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidParams(std::string(name) + " must be symmetric");
}

double max_sym_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("symmetric eigenvalue iteration failed");
  return solver.eigenvalues().maxCoeff();
}

double min_sym_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("symmetric eigenvalue iteration failed");
  return solver.eigenvalues().minCoeff();
}

// Relative residual of the filter Riccati equation
//   A X + X A' - X G X + Q = 0 with G = C' Rw^-1 C.
double riccati_residual(const Matrix& a, const Matrix& g, const Matrix& q,
                        const Matrix& x) {
  const Matrix res = a * x + x * a.transpose() - x * g * x + q;
  const double nx = spectral_norm(x);
  const double scale = std::max(
      1.0, 2.0 * spectral_norm(a) * nx + spectral_norm(g) * nx * nx +
               spectral_norm(q));
  return spectral_norm(res) / scale;
}

}  // namespace

HurwitzReport is_hurwitz(const Matrix& a_cl) {
  require_square(a_cl, "A_cl");
  require_finite(a_cl, "A_cl");
  HurwitzReport report;
  report.abscissa = spectral_abscissa(a_cl);
  report.verdict = report.abscissa < 0.0;
  return report;
}

Matrix solve_lyapunov(const Matrix& a_cl, const Matrix& q) {
  require_square(a_cl, "A_cl");
  require_square(q, "Q");
  require_finite(a_cl, "A_cl");
  require_finite(q, "Q");
  if (a_cl.rows() != q.rows())
    throw DimensionMismatch("A_cl and Q must have matching dimensions");
  require_symmetric(q, "Q");

  const HurwitzReport hurwitz = is_hurwitz(a_cl);
  if (!hurwitz.verdict)
    throw NotHurwitz("Lyapunov equation requires a Hurwitz matrix; spectral "
                     "abscissa is " +
                     std::to_string(hurwitz.abscissa));

  // Vectorized solve: (I kron A' + A' kron I) vec(P) = -vec(Q), column-major.
  const Eigen::Index n = a_cl.rows();
  Matrix system = Matrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = j * n + i;
      for (Eigen::Index k = 0; k < n; ++k) {
        system(row, j * n + k) += a_cl(k, i);  // (I kron A') vec(P)
        system(row, k * n + i) += a_cl(k, j);  // (A' kron I) vec(P)
      }
    }
  Vector rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) rhs(j * n + i) = -q(i, j);

  Eigen::PartialPivLU<Matrix> lu(system);
  const Vector vec_p = lu.solve(rhs);
  if (!vec_p.allFinite())
    throw IllConditioned("Lyapunov solve produced non-finite entries");

  Matrix p(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) p(i, j) = vec_p(j * n + i);
  p = 0.5 * (p + p.transpose()).eval();

  const double residual =
      spectral_norm(a_cl.transpose() * p + p * a_cl + q);
  const double bound = 1e-9 * spectral_norm(p) * spectral_norm(a_cl);
  if (!(residual <= std::max(bound, 1e-300)))
    throw IllConditioned(
        "Lyapunov residual " + std::to_string(residual) +
        " exceeds the scaled tolerance " + std::to_string(bound));
  if (!(min_sym_eigenvalue(p) > 0.0))
    throw IllConditioned("Lyapunov solution is not positive definite");
  return p;
}

StabilityCertificate exponential_rate(const Matrix& a_cl) {
  require_square(a_cl, "A_cl");
  const Eigen::Index n = a_cl.rows();
  StabilityCertificate cert;
  cert.qmat = Matrix::Identity(n, n);
  cert.P = solve_lyapunov(a_cl, cert.qmat);
  const double lambda_max = max_sym_eigenvalue(cert.P);
  cert.alpha = 1.0 / (2.0 * lambda_max);
  return cert;
}

Matrix stabilizing_output_injection(const Matrix& asys, const Matrix& c,
                                    const RiccatiWeights& weights) {
  require_square(asys, "Asys");
  require_finite(asys, "Asys");
  require_finite(c, "C");
  const Eigen::Index n = asys.rows();
  const Eigen::Index p = c.rows();
  if (c.cols() != n)
    throw DimensionMismatch("C has " + std::to_string(c.cols()) +
                            " columns, expected " + std::to_string(n));
  if (weights.state.rows() != n || weights.state.cols() != n)
    throw DimensionMismatch("state weight must be n x n");
  if (weights.output.rows() != p || weights.output.cols() != p)
    throw DimensionMismatch("output weight must be p x p");
  require_symmetric(weights.state, "state weight");
  require_symmetric(weights.output, "output weight");

  // Detectability (PBH): every eigenvalue with Re >= 0 must be observable.
  {
    Eigen::EigenSolver<Matrix> solver(asys, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
      throw ConvergenceFailure("eigenvalue iteration did not converge");
    const double scale =
        std::max(1.0, spectral_norm(asys) + spectral_norm(c));
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex lambda = solver.eigenvalues()(i);
      if (lambda.real() < 0.0) continue;
      const double smin = pbh_min_singular_value(asys, c, lambda);
      if (smin <= 1e-10 * scale)
        throw NotDetectable(
            "mode at Re=" + std::to_string(lambda.real()) +
            ", Im=" + std::to_string(lambda.imag()) +
            " is unstable and unobservable; no stabilizing injection exists");
    }
  }

  // G = C' Rw^-1 C.
  Matrix g = Matrix::Zero(n, n);
  Matrix rw_inv_c;  // Rw^-1 C, reused for the gain
  if (p > 0) {
    Eigen::LLT<Matrix> llt(weights.output);
    if (llt.info() != Eigen::Success)
      throw InvalidParams("output weight must be positive definite");
    rw_inv_c = llt.solve(c);
    g = c.transpose() * rw_inv_c;
    g = 0.5 * (g + g.transpose()).eval();
  }

  // Stable invariant subspace of the Hamiltonian matrix.
  Matrix ham(2 * n, 2 * n);
  ham.topLeftCorner(n, n) = asys.transpose();
  ham.topRightCorner(n, n) = -g;
  ham.bottomLeftCorner(n, n) = -weights.state;
  ham.bottomRightCorner(n, n) = -asys;

  Eigen::EigenSolver<Matrix> hs(ham);
  if (hs.info() != Eigen::Success)
    throw RiccatiFailure("Hamiltonian eigenvalue iteration did not converge");
  std::vector<Eigen::Index> stable;
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    if (hs.eigenvalues()(i).real() < 0.0) stable.push_back(i);
  if (static_cast<Eigen::Index>(stable.size()) != n)
    throw RiccatiFailure(
        "Hamiltonian matrix has " + std::to_string(stable.size()) +
        " strictly stable eigenvalues, expected " + std::to_string(n) +
        "; the Riccati equation has no stabilizing solution");

  ComplexMatrix u1(n, n);
  ComplexMatrix u2(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    u1.col(k) = hs.eigenvectors().col(stable[static_cast<std::size_t>(k)]).topRows(n);
    u2.col(k) =
        hs.eigenvectors().col(stable[static_cast<std::size_t>(k)]).bottomRows(n);
  }
  Eigen::FullPivLU<ComplexMatrix> lu(u1);
  if (!lu.isInvertible())
    throw RiccatiFailure("stable invariant subspace is degenerate");
  Matrix x = (u2 * lu.inverse()).real();
  x = 0.5 * (x + x.transpose()).eval();

  // Newton (Kleinman) polish when the subspace solution is not tight enough.
  double residual = riccati_residual(asys, g, weights.state, x);
  if (residual > 1e-8) {
    for (int iter = 0; iter < 25 && residual > 1e-12; ++iter) {
      Matrix l = p > 0 ? Matrix(x * rw_inv_c.transpose()) : Matrix::Zero(n, 0);
      const Matrix a_cl = asys - l * c;
      if (!(spectral_abscissa(a_cl) < 0.0)) break;
      const Matrix q_step =
          weights.state + l * weights.output * l.transpose();
      Matrix x_next;
      try {
        x_next = solve_lyapunov(a_cl.transpose(),
                                0.5 * (q_step + q_step.transpose()).eval());
      } catch (const Error&) {
        break;
      }
      const double next_residual =
          riccati_residual(asys, g, weights.state, x_next);
      if (next_residual >= residual) break;
      x = x_next;
      residual = next_residual;
    }
    if (residual > 1e-8)
      throw RiccatiFailure("Riccati residual " + std::to_string(residual) +
                           " exceeds the 1e-8 scaled tolerance");
  }

  Matrix l = p > 0 ? Matrix(x * rw_inv_c.transpose()) : Matrix::Zero(n, 0);
  if (!(spectral_abscissa(asys - l * c) < 0.0))
    throw RiccatiFailure("computed injection gain fails to stabilize");
  return l;
}

Matrix stabilizing_output_injection(const Matrix& asys, const Matrix& c) {
  RiccatiWeights weights;
  weights.state = Matrix::Identity(asys.rows(), asys.rows());
  weights.output = Matrix::Identity(c.rows(), c.rows());
  return stabilizing_output_injection(asys, c, weights);
}

double verify_uio_lmi(const Matrix& p, const Matrix& r, const Matrix& m,
                      const Matrix& a, const Matrix& c) {
  require_square(p, "P");
  require_square(m, "M");
  require_square(a, "A");
  const Eigen::Index n = p.rows();
  if (m.rows() != n || a.rows() != n)
    throw DimensionMismatch("P, M, A must share the state dimension");
  if (c.cols() != n)
    throw DimensionMismatch("C must have n columns");
  if (r.rows() != n || r.cols() != c.rows())
    throw DimensionMismatch("R must be n x p to match C");
  for (const auto& [mat, name] :
       std::initializer_list<std::pair<const Matrix*, const char*>>{
           {&p, "P"}, {&r, "R"}, {&m, "M"}, {&a, "A"}, {&c, "C"}})
    require_finite(*mat, name);

  const Matrix expr = a.transpose() * m.transpose() * p + p * m * a -
                      c.transpose() * r.transpose() - r * c;
  return max_sym_eigenvalue(0.5 * (expr + expr.transpose()));
}

std::string certificate_to_json_text(const StabilityCertificate& cert) {
  detail::ordered_json j;
  j["P"] = detail::matrix_to_json(cert.P);
  if (cert.has_q()) j["Q"] = detail::matrix_to_json(cert.qmat);
  if (cert.has_r()) j["R"] = detail::matrix_to_json(cert.rmat);
  j["alpha"] = cert.alpha;
  if (cert.has_lmi()) j["lmi_max_eig"] = cert.lmi_max_eig;
  return j.dump() + "\n";
}

void save_certificate(const StabilityCertificate& cert,
                      const std::string& path) {
  detail::write_text_file(path, certificate_to_json_text(cert));
}

}  // namespace wapss
