#include "wapss/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "wapss/detail/json_util.hpp"
#include "wapss/linalg.hpp"

namespace wapss {

namespace {

void require_valid(const LtiModel& model) {
  const ValidationReport report = validate_model(model);
  if (!report.ok())
    throw InvalidParams("model is not valid: " + report.issues.front().message);
}

// Direct placement of all observer poles at -alpha for a single-output
// fully observable pair, via the dual controllable-form identity
// L = phi(A) O^-1 e_n with phi(s) = (s + alpha)^n.
Matrix ackermann_injection(const Matrix& a, const Matrix& c, double alpha) {
  const Eigen::Index n = a.rows();
  Matrix obs(n, n);
  Matrix row = c;
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.row(i) = row;
    row = row * a;
  }
  Eigen::JacobiSVD<Matrix> svd(obs);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  if (!(smin > 0.0) || smax / smin > 1e8) return Matrix();  // defer to Riccati

  Matrix phi = Matrix::Identity(n, n);
  const Matrix shifted = a + alpha * Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) phi = phi * shifted;
  Vector e_last = Vector::Zero(n);
  e_last(n - 1) = 1.0;
  return phi * obs.lu().solve(e_last);
}

}  // namespace

LuenbergerDesign design_luenberger(const LtiModel& model, double alpha) {
  require_valid(model);
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidParams("decay rate alpha must be positive and finite");

  const Matrix& a = model.A;
  const Matrix& cl = model.Cl;
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, spectral_norm(a) + spectral_norm(cl));

  // Classify every mode: unobservable ones cannot be moved by any L, so an
  // unstable one rules out convergence and a slow stable one rules out the
  // requested rate.
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigenvalue iteration did not converge");
  bool fully_observable = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = solver.eigenvalues()(i);
    if (pbh_min_singular_value(a, cl, lambda) > 1e-10 * scale) continue;
    fully_observable = false;
    if (lambda.real() >= 0.0)
      throw NotDetectable("unstable mode at Re=" +
                          std::to_string(lambda.real()) +
                          " is unobservable through Cl");
    if (lambda.real() >= -alpha)
      throw RateInfeasible(
          "unobservable mode at Re=" + std::to_string(lambda.real()) +
          " decays slower than the requested rate " + std::to_string(alpha));
  }

  Matrix gain;
  if (fully_observable && model.p_l() == 1) {
    gain = ackermann_injection(a, cl, alpha);
  }
  if (gain.size() == 0) {
    const Matrix shifted = a + alpha * Matrix::Identity(n, n);
    gain = stabilizing_output_injection(shifted, cl);
  }

  const Matrix f = a - gain * cl;
  const double abscissa = spectral_abscissa(f);
  if (!(abscissa <= -alpha + 1e-9 * std::max(1.0, std::abs(alpha))))
    throw RiccatiFailure("designed gain reaches abscissa " +
                         std::to_string(abscissa) +
                         ", short of the requested -alpha");

  LuenbergerDesign design;
  design.observer.L = gain;

  // Rate certificate: P solving (F + alpha I)' P + P (F + alpha I) = -I
  // gives F' P + P F = -(I + 2 alpha P), i.e. Vdot <= -2 alpha V.  When the
  // abscissa sits exactly at -alpha (pole placement), fall back to the
  // unshifted certificate with its own exact rate.
  StabilityCertificate cert;
  if (abscissa < -alpha) {
    cert.P = solve_lyapunov(f + alpha * Matrix::Identity(n, n),
                            Matrix::Identity(n, n));
    cert.qmat = Matrix::Identity(n, n) + 2.0 * alpha * cert.P;
    cert.alpha = alpha;
  } else {
    cert = exponential_rate(f);
  }
  design.certificate = std::move(cert);
  return design;
}

UioExistence check_uio_existence(const LtiModel& model) {
  require_valid(model);
  const Eigen::Index n = model.n();

  UioExistence result;
  const Matrix cl_e = model.Cl * model.E;
  result.H = -model.E * pseudo_inverse(cl_e);
  result.M = Matrix::Identity(n, n) + result.H * model.Cl;

  const Eigen::Index rank_e = numerical_rank(model.E);
  const Eigen::Index rank_cl_e = numerical_rank(cl_e);
  result.rank_ok = rank_cl_e == rank_e;
  if (!result.rank_ok)
    result.reasons.push_back(
        "rank(Cl*E) = " + std::to_string(rank_cl_e) + " < rank(E) = " +
        std::to_string(rank_e) +
        ": the disturbance channel is not visible enough through the local "
        "measurements to decouple it");

  const Matrix ma = result.M * model.A;
  const double scale =
      std::max(1.0, spectral_norm(ma) + spectral_norm(model.Cl));
  result.detectable = true;
  Eigen::EigenSolver<Matrix> solver(ma, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigenvalue iteration did not converge");
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = solver.eigenvalues()(i);
    if (lambda.real() < 0.0) continue;
    if (pbh_min_singular_value(ma, model.Cl, lambda) <= 1e-10 * scale) {
      result.detectable = false;
      result.reasons.push_back(
          "(M*A, Cl) has an unobservable mode at Re=" +
          std::to_string(lambda.real()) + ", Im=" +
          std::to_string(lambda.imag()) + " that is not strictly stable");
    }
  }

  result.accepted = result.rank_ok && result.detectable;
  return result;
}

UnknownInputObserver synthesize_uio(const LtiModel& model, const Matrix& L) {
  const UioExistence existence = check_uio_existence(model);
  if (!existence.accepted) {
    std::string why;
    for (const std::string& reason : existence.reasons) {
      if (!why.empty()) why += "; ";
      why += reason;
    }
    throw InvalidParams("unknown-input observer does not exist: " + why);
  }
  if (L.rows() != model.n() || L.cols() != model.p_l())
    throw DimensionMismatch("gain L must be n x p_l");

  UnknownInputObserver obs;
  obs.H = existence.H;
  obs.M = existence.M;
  obs.L = L;
  obs.F = obs.M * model.A - L * model.Cl;
  const HurwitzReport hurwitz = is_hurwitz(obs.F);
  if (!hurwitz.verdict)
    throw NotHurwitz("provided gain leaves F with spectral abscissa " +
                     std::to_string(hurwitz.abscissa));
  obs.T = obs.M;
  obs.K = L - obs.F * obs.H;
  return obs;
}

UioGainDesign design_uio_gain(const LtiModel& model) {
  const UioExistence existence = check_uio_existence(model);
  if (!existence.rank_ok)
    throw InvalidParams(
        "unknown-input observer does not exist: " + existence.reasons.front());
  if (!existence.detectable)
    throw NotDetectable(existence.reasons.front());

  const Matrix ma = existence.M * model.A;
  UioGainDesign design;
  design.L = stabilizing_output_injection(ma, model.Cl);

  const Matrix f = ma - design.L * model.Cl;
  StabilityCertificate cert;
  cert.P = solve_lyapunov(f, Matrix::Identity(model.n(), model.n()));
  cert.rmat = cert.P * design.L;
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cert.P, Eigen::EigenvaluesOnly);
    cert.alpha = 1.0 / (2.0 * eig.eigenvalues().maxCoeff());
  }
  cert.lmi_max_eig =
      verify_uio_lmi(cert.P, cert.rmat, existence.M, model.A, model.Cl);
  design.certificate = std::move(cert);
  return design;
}

UioDesign design_uio(const LtiModel& model) {
  UioGainDesign gain = design_uio_gain(model);
  UioDesign design;
  design.observer = synthesize_uio(model, gain.L);
  design.certificate = std::move(gain.certificate);
  return design;
}

UnknownInputObserver as_uio_form(const LtiModel& model,
                                 const LuenbergerObserver& observer) {
  UnknownInputObserver obs;
  const Eigen::Index n = model.n();
  obs.H = Matrix::Zero(n, model.p_l());
  obs.M = Matrix::Identity(n, n);
  obs.T = obs.M;
  obs.L = observer.L;
  obs.F = model.A - observer.L * model.Cl;
  obs.K = observer.L;
  return obs;
}

std::string observer_to_json_text(const UnknownInputObserver& observer) {
  detail::ordered_json j;
  j["F"] = detail::matrix_to_json(observer.F);
  j["T"] = detail::matrix_to_json(observer.T);
  j["K"] = detail::matrix_to_json(observer.K);
  j["H"] = detail::matrix_to_json(observer.H);
  j["M"] = detail::matrix_to_json(observer.M);
  j["L"] = detail::matrix_to_json(observer.L);
  return j.dump() + "\n";
}

void save_observer(const UnknownInputObserver& observer,
                   const std::string& path) {
  detail::write_text_file(path, observer_to_json_text(observer));
}

}  // namespace wapss
