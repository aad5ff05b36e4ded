#include "wapss/benchmark.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace wapss {

namespace {

// Fixed heterogeneity factor on the (G2, G4) cross-area link.  The direct
// G2-G4 path is geographically the longest, so it is modeled stiffer than
// zero but well below the other ties; keeping it a structural constant
// leaves calibration two degrees of freedom with monotone responses.
constexpr double kCrossTieFactor = 0.15;

constexpr std::array<double, 4> kShippedInertia{3.4, 0.82, 3.264, 0.73};
constexpr std::array<double, 4> kShippedDamping{
    0.0272, 2.607870094951869, 0.026112, 3.74574831953684};
constexpr double kShippedKa = 0.11250101450099079;
constexpr double kShippedKt = 0.057391768623191786;
constexpr double kShippedKg = 0.006;

constexpr double kDampingFloor = 0.004;  // per-unit damping-to-inertia ratio
constexpr int kBisectIters = 60;

void validate_params(const TwoAreaParams& p) {
  for (double h : p.inertia)
    if (!(h > 0.0) || !std::isfinite(h))
      throw InvalidParams("inertia constants must be positive and finite");
  for (double d : p.damping)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw InvalidParams("damping constants must be non-negative and finite");
  if (!std::isfinite(p.k_a) || !std::isfinite(p.k_t) || !std::isfinite(p.k_g))
    throw InvalidParams("stiffness parameters must be finite");
  if (!(p.k_t > 0.0)) throw InvalidParams("tie-line stiffness must be positive");
  if (!(p.k_t <= p.k_a))
    throw InvalidParams("weak-tie requirement violated: need k_t <= k_a");
  if (!(p.k_g >= 0.0))
    throw InvalidParams("anchoring stiffness must be non-negative");
  if (!(p.omega_b > 0.0) || !std::isfinite(p.omega_b))
    throw InvalidParams("base speed must be positive and finite");
}

// Three swing eigenvalues (upper-half-plane, 1..15 rad/s) sorted by
// frequency.  Calibration requires exactly three; anything else means the
// current parameter iterate has left the physically meaningful region.
std::array<Complex, 3> swing3(const Matrix& A) {
  Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigenvalue iteration did not converge");
  std::vector<Complex> found;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const Complex lambda = solver.eigenvalues()(i);
    if (lambda.imag() > 0.0 && lambda.imag() >= 1.0 && lambda.imag() <= 15.0)
      found.push_back(lambda);
  }
  if (found.size() != 3)
    throw CalibrationFailed("expected 3 swing modes in [1,15] rad/s, found " +
                            std::to_string(found.size()));
  std::sort(found.begin(), found.end(),
            [](Complex a, Complex b) { return a.imag() < b.imag(); });
  return {found[0], found[1], found[2]};
}

TwoAreaParams assemble(const std::array<double, 4>& H,
                       const std::array<double, 4>& r, double ka, double kt,
                       double kg) {
  TwoAreaParams p;
  p.inertia = H;
  for (int i = 0; i < 4; ++i) p.damping[i] = 2.0 * H[i] * r[i];
  p.k_a = ka;
  p.k_t = kt;
  p.k_g = kg;
  return p;
}

std::array<Complex, 3> swing_of(const std::array<double, 4>& H,
                                const std::array<double, 4>& r, double ka,
                                double kt, double kg) {
  return swing3(build_two_area(assemble(H, r, ka, kt, kg)).A);
}

// Nested bisection: the outer loop moves k_a to match the geometric mean of
// the two local-mode frequencies, the inner loop moves k_t to match the
// inter-area frequency (monotone increasing in k_t).
std::pair<double, double> fit_frequencies(const std::array<Complex, 3>& t,
                                          std::array<double, 4> H,
                                          std::array<double, 4> r, double ka,
                                          double kt, double kg) {
  const double target_local = std::sqrt(t[1].imag() * t[2].imag());
  const double target_inter = t[0].imag();
  double lo_a = ka * 0.3;
  double hi_a = ka * 3.0;
  for (int i = 0; i < kBisectIters; ++i) {
    ka = 0.5 * (lo_a + hi_a);
    double lo_t = ka * 1e-3;
    double hi_t = ka * 0.999;
    for (int j = 0; j < kBisectIters; ++j) {
      kt = 0.5 * (lo_t + hi_t);
      const auto s = swing_of(H, r, ka, kt, kg);
      if (s[0].imag() < target_inter)
        lo_t = kt;
      else
        hi_t = kt;
    }
    const auto s = swing_of(H, r, ka, kt, kg);
    if (std::sqrt(s[1].imag() * s[2].imag()) < target_local)
      lo_a = ka;
    else
      hi_a = ka;
  }
  return {ka, kt};
}

// Sequential bisections on the damping-to-inertia ratios: r_2 sets the decay
// of the faster first local mode, r_4 the second, and the tied pair
// (r_1, r_3) the inter-area decay.  Each response is monotone increasing in
// its ratio over the bracket.
std::array<double, 4> fit_dampings(const std::array<Complex, 3>& t,
                                   std::array<double, 4> H,
                                   std::array<double, 4> r, double ka,
                                   double kt, double kg) {
  struct Step {
    int index;      // which ratio to move (index 0 also moves index 2)
    double target;  // desired decay rate -Re(lambda)
    int position;   // which swing mode (sorted by frequency) it controls
  };
  const std::array<Step, 3> steps{Step{1, -t[1].real(), 1},
                                  Step{3, -t[2].real(), 2},
                                  Step{0, -t[0].real(), 0}};
  for (const Step& step : steps) {
    double lo = kDampingFloor;
    double hi = 8.0;
    for (int i = 0; i < kBisectIters; ++i) {
      const double mid = 0.5 * (lo + hi);
      std::array<double, 4> trial = r;
      trial[step.index] = mid;
      if (step.index == 0) trial[2] = mid;
      const auto s = swing_of(H, trial, ka, kt, kg);
      if (-s[step.position].real() < step.target)
        lo = mid;
      else
        hi = mid;
    }
    r[step.index] = 0.5 * (lo + hi);
    if (step.index == 0) r[2] = r[step.index];
  }
  return r;
}

}  // namespace

Matrix stiffness_matrix(const TwoAreaParams& p) {
  Matrix K = Matrix::Zero(4, 4);
  auto edge = [&K](int i, int j, double k) {
    K(i, i) += k;
    K(j, j) += k;
    K(i, j) -= k;
    K(j, i) -= k;
  };
  edge(0, 1, p.k_a);
  edge(2, 3, p.k_a);
  edge(0, 2, p.k_t);
  edge(0, 3, p.k_t);
  edge(1, 2, p.k_t);
  edge(1, 3, kCrossTieFactor * p.k_t);
  K += p.k_g * Matrix::Identity(4, 4);
  return K;
}

LtiModel build_two_area(const TwoAreaParams& p) {
  validate_params(p);
  const Matrix K = stiffness_matrix(p);

  LtiModel model;
  model.A = Matrix::Zero(8, 8);
  model.B = Matrix::Zero(8, 4);
  for (int i = 0; i < 4; ++i) {
    const int di = 2 * i;
    const int wi = 2 * i + 1;
    model.A(di, wi) = p.omega_b;
    for (int j = 0; j < 4; ++j)
      model.A(wi, 2 * j) = -K(i, j) / (2.0 * p.inertia[i]);
    model.A(wi, wi) = -p.damping[i] / (2.0 * p.inertia[i]);
    model.B(wi, i) = 1.0 / (2.0 * p.inertia[i]);
  }
  model.E = model.B.col(1);

  // Local measurements at the G2 terminal (angle and speed) and the remote
  // G4 speed to be synthesized.
  model.Cl = Matrix::Zero(2, 8);
  model.Cl(0, 2) = 1.0;
  model.Cl(1, 3) = 1.0;
  model.Cr = Matrix::Zero(1, 8);
  model.Cr(0, 7) = 1.0;

  model.state_labels.reserve(8);
  for (int i = 0; i < 4; ++i) {
    model.state_labels.push_back(
        {"delta" + std::to_string(i + 1), StateLabel::Kind::Delta, i + 1});
    model.state_labels.push_back(
        {"omega" + std::to_string(i + 1), StateLabel::Kind::Omega, i + 1});
  }
  return model;
}

TwoAreaParams calibrate_two_area(const std::array<Complex, 3>& targets_in) {
  std::array<Complex, 3> t;
  for (int i = 0; i < 3; ++i) {
    Complex z = targets_in[i];
    if (!(z.real() < 0.0))
      throw InvalidParams("calibration targets must be stable (Re < 0)");
    if (z.imag() == 0.0)
      throw InvalidParams("calibration targets must be oscillatory (Im != 0)");
    t[i] = Complex(z.real(), std::abs(z.imag()));
  }
  std::sort(t.begin(), t.end(),
            [](Complex a, Complex b) { return a.imag() < b.imag(); });
  if (t[0].imag() == t[1].imag() || t[1].imag() == t[2].imag())
    throw InvalidParams("calibration targets must have distinct frequencies");

  const std::array<double, 4> H = kShippedInertia;
  std::array<double, 4> r{0.004, 2.06, 0.004, 1.62};
  double ka = 0.12;
  double kt = 0.068;
  const double kg = kShippedKg;

  for (int sweep = 0; sweep < 3; ++sweep) {
    std::tie(ka, kt) = fit_frequencies(t, H, r, ka, kt, kg);
    r = fit_dampings(t, H, r, ka, kt, kg);
  }

  const TwoAreaParams params = assemble(H, r, ka, kt, kg);
  const auto achieved = swing3(build_two_area(params).A);
  for (int i = 0; i < 3; ++i) {
    const double rel = std::abs(achieved[i] - t[i]) / std::abs(t[i]);
    if (!(rel <= 0.05))
      throw CalibrationFailed(
          "swing mode " + std::to_string(i + 1) + " misses its target by " +
          std::to_string(rel * 100.0) + "% (tolerance 5%)");
  }
  return params;
}

TwoAreaParams default_benchmark_params() {
  TwoAreaParams p;
  p.inertia = kShippedInertia;
  p.damping = kShippedDamping;
  p.k_a = kShippedKa;
  p.k_t = kShippedKt;
  p.k_g = kShippedKg;
  return p;
}

LtiModel default_benchmark() { return build_two_area(default_benchmark_params()); }

}  // namespace wapss
