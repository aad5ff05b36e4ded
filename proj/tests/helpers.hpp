// Shared test utilities: independent reference integrators, seeded random
// model generators, and small numeric helpers.  Everything here is
// deliberately written against the public API only, with independent
// algorithms (classical RK4, rejection sampling) so library results are
// checked against genuinely separate computations.
#pragma once

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "wapss/model.hpp"

namespace testutil {

using wapss::Matrix;
using wapss::Vector;

// Classical fixed-step RK4 for x' = A x + B u(t) + E d(t) with u and d
// piecewise-constant over each step (sampled at the step start), matching
// the hold convention of the zero-order-hold simulator.  `substeps` RK4
// steps are taken inside each output interval.
inline Matrix rk4_held(const Matrix& A, const Matrix& B, const Matrix& E,
                       const std::function<Vector(double)>& u,
                       const std::function<Vector(double)>& d,
                       const Vector& x0, double t_end, double dt,
                       int substeps = 1) {
  const Eigen::Index n = A.rows();
  const Eigen::Index steps = static_cast<Eigen::Index>(
      std::llround(t_end / dt));
  Matrix xs(steps + 1, n);
  Vector x = x0;
  xs.row(0) = x.transpose();
  const double h = dt / substeps;
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double t = k * dt;
    Vector forcing = Vector::Zero(n);
    if (u && B.cols() > 0) forcing += B * u(t);
    if (d && E.cols() > 0) forcing += E * d(t);
    auto f = [&](const Vector& state) -> Vector {
      return A * state + forcing;
    };
    for (int s = 0; s < substeps; ++s) {
      const Vector k1 = f(x);
      const Vector k2 = f(x + 0.5 * h * k1);
      const Vector k3 = f(x + 0.5 * h * k2);
      const Vector k4 = f(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    xs.row(k + 1) = x.transpose();
  }
  return xs;
}

// Pulse as a callable disturbance signal on channel 0 of a q-column E,
// active on [start, start + width).
inline std::function<Vector(double)> pulse_signal(double start, double width,
                                                  double amplitude,
                                                  Eigen::Index q,
                                                  int channel = 0) {
  return [=](double t) {
    Vector d = Vector::Zero(q);
    if (t >= start && t < start + width) d(channel) = amplitude;
    return d;
  };
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                            Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * normal(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * normal(rng);
  return v;
}

// Random symmetric positive definite matrix G G^T + eps I.
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix g = random_matrix(rng, n, n);
  return g * g.transpose() + 0.1 * Matrix::Identity(n, n);
}

// Random stable (Hurwitz) matrix: shift a random matrix left of its
// spectral abscissa.
inline Matrix random_hurwitz(std::mt19937_64& rng, Eigen::Index n,
                             double margin = 0.5) {
  const Matrix g = random_matrix(rng, n, n);
  const Eigen::EigenSolver<Matrix> es(g);
  double abscissa = -1e300;
  for (Eigen::Index i = 0; i < n; ++i)
    abscissa = std::max(abscissa, es.eigenvalues()(i).real());
  return g - (abscissa + margin) * Matrix::Identity(n, n);
}

// Random model with full-state-coupled dynamics, m inputs, one disturbance
// column, p_l local rows, p_r remote rows.  Generic parameters make the
// disturbance-decoupling rank condition and detectability hold with
// probability one; the caller should still gate on check_uio_existence and
// resample when unlucky.
inline wapss::LtiModel random_model(std::mt19937_64& rng, Eigen::Index n,
                                    Eigen::Index m, Eigen::Index p_l,
                                    Eigen::Index p_r) {
  wapss::LtiModel model;
  model.A = random_matrix(rng, n, n);
  model.B = random_matrix(rng, n, m);
  model.E = random_matrix(rng, n, 1);
  model.Cl = random_matrix(rng, p_l, n);
  model.Cr = random_matrix(rng, p_r, n);
  model.state_labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    model.state_labels[static_cast<std::size_t>(i)] = wapss::StateLabel{
        "x" + std::to_string(i + 1), wapss::StateLabel::Kind::Other, -1};
  }
  return model;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testutil
