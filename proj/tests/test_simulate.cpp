#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "helpers.hpp"

#include "wapss/benchmark.hpp"
#include "wapss/errors.hpp"
#include "wapss/estimation.hpp"
#include "wapss/simulate.hpp"

using namespace wapss;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

LtiModel scalar_feedback_model(double a, double cr_value) {
  LtiModel m;
  m.A = Matrix::Constant(1, 1, a);
  m.B = Matrix::Constant(1, 1, 1.0);
  m.E = Matrix::Constant(1, 1, 0.0);
  m.Cl = Matrix::Constant(1, 1, 1.0);
  m.Cr = Matrix::Constant(1, 1, cr_value);
  m.state_labels = {{"x1", StateLabel::Kind::Other, -1}};
  return m;
}

}  // namespace

TEST_CASE("matrix exponential closed forms") {
  const Matrix z = Matrix::Zero(3, 3);
  CHECK((matrix_exponential(z, 1.0) - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);

  Matrix nilpotent(2, 2);
  nilpotent << 0.0, 1.0, 0.0, 0.0;
  Matrix expected(2, 2);
  expected << 1.0, 1.0, 0.0, 1.0;
  CHECK((matrix_exponential(nilpotent, 1.0) - expected).cwiseAbs().maxCoeff() <=
        1e-14);

  Matrix diag = Matrix::Zero(3, 3);
  diag(0, 0) = -1.0;
  diag(1, 1) = 0.5;
  diag(2, 2) = -2.5;
  const Matrix got = matrix_exponential(diag, 0.7);
  for (int i = 0; i < 3; ++i)
    CHECK(got(i, i) ==
          doctest::Approx(std::exp(diag(i, i) * 0.7)).epsilon(1e-12));
}

TEST_CASE("matrix exponential overflow guard") {
  CHECK_THROWS_AS((void)matrix_exponential(Matrix::Constant(1, 1, 1000.0), 1.0),
                  Overflow);
}

TEST_CASE("zero-order-hold closed forms") {
  LtiModel m = scalar_feedback_model(0.0, 0.0);
  m.A(0, 0) = 0.0;
  m.B(0, 0) = 3.0;
  const ZohDiscretization z0 = discretize_zoh(m, 0.25);
  CHECK(z0.Phi(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z0.GammaB(0, 0) == doctest::Approx(0.25 * 3.0).epsilon(1e-12));

  LtiModel m1 = scalar_feedback_model(-1.0, 0.0);
  m1.B(0, 0) = 2.0;
  const ZohDiscretization z1 = discretize_zoh(m1, 1.0);
  CHECK(z1.Phi(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(z1.GammaB(0, 0) ==
        doctest::Approx((1.0 - std::exp(-1.0)) * 2.0).epsilon(1e-12));
}

TEST_CASE("one ZOH step matches a finely substepped RK4") {
  std::mt19937_64 rng(211);
  LtiModel m;
  m.A = random_matrix(rng, 8, 8);
  m.B = random_matrix(rng, 8, 2);
  m.E = random_matrix(rng, 8, 1);
  m.Cl = Matrix::Identity(2, 8) * 0.0;
  m.Cl(0, 0) = 1.0;
  m.Cl(1, 4) = 1.0;
  m.Cr = Matrix::Zero(1, 8);
  m.state_labels.assign(8, {"x", StateLabel::Kind::Other, -1});

  const double dt = 1e-2;
  const ZohDiscretization z = discretize_zoh(m, dt);
  const Vector x0 = random_vector(rng, 8);
  const Vector u0 = random_vector(rng, 2);
  const Vector d0 = random_vector(rng, 1);
  const Vector zoh_step = z.Phi * x0 + z.GammaB * u0 + z.GammaE * d0;
  const Matrix rk = testutil::rk4_held(
      m.A, m.B, m.E, [&](double) { return u0; }, [&](double) { return d0; },
      x0, dt, dt, 100);
  CHECK((zoh_step - rk.row(1).transpose()).norm() <=
        1e-9 * std::max(1.0, zoh_step.norm()));
}

TEST_CASE("full benchmark trajectory agrees with an RK4 integration") {
  const LtiModel m = default_benchmark();
  const Pulse pulse{1.0, 0.5, 0.05, 0};
  const double dt = 1e-4;
  const Trajectory tr = simulate_plant(m, nullptr, pulse, {}, 10.0, dt);
  const Matrix rk = testutil::rk4_held(
      m.A, m.B, m.E, [&](double) { return Vector::Zero(m.m()).eval(); },
      [&](double t) {
        return Vector::Constant(
                   1, (t >= pulse.start && t < pulse.start + pulse.width)
                          ? pulse.amplitude
                          : 0.0)
            .eval();
      },
      Vector::Zero(m.n()), 10.0, dt, 1);
  const double scale = tr.x.cwiseAbs().maxCoeff();
  CHECK((tr.x - rk).cwiseAbs().maxCoeff() <= 1e-6 * scale);
}

TEST_CASE("zero input and state stay identically zero") {
  const LtiModel m = default_benchmark();
  const Pulse none{1.0, 0.5, 0.0, 0};
  const Trajectory tr = simulate_plant(m, nullptr, none, {}, 2.0, 1e-3);
  CHECK(tr.x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(tr.y_l.cwiseAbs().maxCoeff() == 0.0);
  CHECK(tr.y_r.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("modal motion: eigenvector initial condition decays at its rate") {
  // Symmetric stable matrix: real spectrum and orthogonal eigenvectors.
  std::mt19937_64 rng(223);
  const Matrix g = random_matrix(rng, 4, 4);
  LtiModel m;
  m.A = -(g * g.transpose()) - 0.5 * Matrix::Identity(4, 4);
  m.B = Matrix::Zero(4, 1);
  m.E = Matrix::Zero(4, 1);
  m.Cl = Matrix::Zero(1, 4);
  m.Cl(0, 0) = 1.0;
  m.Cr = Matrix::Zero(0, 4);
  m.state_labels.assign(4, {"x", StateLabel::Kind::Other, -1});

  Eigen::SelfAdjointEigenSolver<Matrix> es(m.A);
  const double lambda = es.eigenvalues()(1);
  const Vector v = es.eigenvectors().col(1);

  const Pulse none{1.0, 0.5, 0.0, 0};
  const Trajectory tr = simulate_plant(m, nullptr, none, v, 3.0, 1e-3);
  for (Eigen::Index k = 0; k < tr.times.size(); k += 250) {
    const double expected = std::exp(lambda * tr.times(k)) * v.norm();
    CHECK(tr.x.row(k).norm() == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("benchmark pulse response rings at the inter-area frequency") {
  const LtiModel m = default_benchmark();
  const Pulse pulse{1.0, 0.5, 0.05, 0};
  const Trajectory tr = simulate_plant(m, nullptr, pulse, {}, 25.0, 1e-3);
  // dw24 = omega2 - omega4 (states 3 and 7).
  std::vector<double> dw(static_cast<std::size_t>(tr.times.size()));
  for (Eigen::Index k = 0; k < tr.times.size(); ++k)
    dw[static_cast<std::size_t>(k)] = tr.x(k, 3) - tr.x(k, 7);

  // The two local swing modes decay with time constants near 1 s, so from
  // 6 s onward the signal is the weakly damped inter-area ring.  At 3.9
  // rad/s there are 2 crossings per 2*pi/3.9 = 1.611 s period: 20 on
  // [6 s, 22 s].
  int crossings = 0;
  double peak_8_10 = 0.0, peak_18_20 = 0.0;
  for (Eigen::Index k = 0; k + 1 < tr.times.size(); ++k) {
    const double t = tr.times(k);
    const std::size_t i = static_cast<std::size_t>(k);
    if (t >= 6.0 && t <= 22.0 && dw[i] != 0.0 && dw[i] * dw[i + 1] < 0.0)
      ++crossings;
    if (t >= 8.0 && t <= 10.0) peak_8_10 = std::max(peak_8_10, std::abs(dw[i]));
    if (t >= 18.0 && t <= 20.0)
      peak_18_20 = std::max(peak_18_20, std::abs(dw[i]));
  }
  const double freq_estimate = crossings * std::acos(-1.0) / 16.0;
  CHECK(freq_estimate == doctest::Approx(3.9).epsilon(0.05));
  // Envelope decay over 10 s at Re(lambda) = -0.0413 gives a ratio of
  // exp(-0.413) = 0.66.
  CHECK(peak_8_10 > 0.0);
  CHECK(peak_18_20 / peak_8_10 == doctest::Approx(0.66).epsilon(0.1));
}

TEST_CASE("pulse and horizon must sit on the simulation grid") {
  const LtiModel m = default_benchmark();
  CHECK_THROWS_AS(
      (void)simulate_plant(m, nullptr, Pulse{1.00037, 0.5, 0.05, 0}, {}, 5.0,
                           1e-3),
      GridMisaligned);
  CHECK_THROWS_AS(
      (void)simulate_plant(m, nullptr, Pulse{1.0, 0.50021, 0.05, 0}, {}, 5.0,
                           1e-3),
      GridMisaligned);
  CHECK_THROWS_AS((void)simulate_plant(m, nullptr, Pulse{1.0, 0.5, 0.05, 0},
                                       {}, 5.00037, 1e-3),
                  GridMisaligned);
  CHECK_THROWS_AS((void)simulate_plant(m, nullptr, Pulse{1.0, 0.0, 0.05, 0},
                                       {}, 5.0, 1e-3),
                  InvalidParams);
}

TEST_CASE("linearity: doubling initial state and pulse doubles the run") {
  const LtiModel m = default_benchmark();
  std::mt19937_64 rng(227);
  const Vector x0 = random_vector(rng, m.n(), 0.01);
  const Trajectory a = simulate_plant(m, nullptr, Pulse{1.0, 0.5, 0.05, 0},
                                      x0, 8.0, 1e-3);
  const Trajectory b = simulate_plant(m, nullptr, Pulse{1.0, 0.5, 0.10, 0},
                                      (2.0 * x0).eval(), 8.0, 1e-3);
  CHECK((b.x - 2.0 * a.x).cwiseAbs().maxCoeff() <=
        1e-12 * std::max(1.0, b.x.cwiseAbs().maxCoeff()));
}

TEST_CASE("aligned initial estimate keeps the error at zero") {
  const LtiModel m = default_benchmark();
  std::mt19937_64 rng(229);
  const Vector x0 = random_vector(rng, m.n(), 0.1);
  const Pulse none{1.0, 0.5, 0.0, 0};

  const UioDesign uio = design_uio(m);
  const Trajectory tu =
      simulate_estimation(m, uio.observer, none, x0, x0, 5.0, 1e-3);
  CHECK(tu.e.cwiseAbs().maxCoeff() <= 1e-12);

  // The Luenberger propagation couples x and e through -L*Cl inside the
  // augmented matrix exponential, so "identically zero" holds only to the
  // rounding floor of that computation.
  const LuenbergerDesign lue = design_luenberger(m, 2.0);
  const Trajectory tl =
      simulate_estimation(m, lue.observer, none, x0, x0, 5.0, 1e-3);
  CHECK(tl.e.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("UIO error ignores the pulse entirely") {
  const LtiModel m = default_benchmark();
  const UioDesign uio = design_uio(m);
  std::mt19937_64 rng(233);
  const Vector xhat0 = random_vector(rng, m.n(), 0.1);
  const Trajectory with_pulse = simulate_estimation(
      m, uio.observer, Pulse{1.0, 0.5, 0.05, 0}, {}, xhat0, 8.0, 1e-3);
  const Trajectory without = simulate_estimation(
      m, uio.observer, Pulse{1.0, 0.5, 0.0, 0}, {}, xhat0, 8.0, 1e-3);
  CHECK((with_pulse.e - without.e).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("recorded UIO error steps exactly through exp(F dt)") {
  const LtiModel m = default_benchmark();
  const UioDesign uio = design_uio(m);
  std::mt19937_64 rng(239);
  const Vector x0 = random_vector(rng, m.n(), 0.1);
  const Vector xhat0 = random_vector(rng, m.n(), 0.1);
  auto u = [&m](double t) {
    Vector v = Vector::Zero(m.m());
    v(1) = std::cos(2.0 * t);
    return v;
  };
  const Trajectory tr = simulate_estimation(
      m, uio.observer, Pulse{1.0, 0.5, 0.05, 0}, x0, xhat0, 4.0, 1e-3, u);
  const Matrix step = matrix_exponential(uio.observer.F, 1e-3);
  for (Eigen::Index k = 0; k + 1 < tr.times.size(); k += 7) {
    const Vector predicted = step * tr.e.row(k).transpose();
    CHECK((tr.e.row(k + 1).transpose() - predicted).norm() <=
          1e-9 * std::max(1.0, predicted.norm()));
  }
}

TEST_CASE("closed loop at k=0 reproduces the open-loop plant") {
  const LtiModel m = default_benchmark();
  const UioDesign uio = design_uio(m);
  const Pulse pulse{1.0, 0.5, 0.05, 0};
  const Trajectory open_tr = simulate_plant(m, nullptr, pulse, {}, 10.0, 1e-3);
  const Trajectory closed =
      simulate_closed_loop(m, uio.observer, 0.0, pulse, 10.0, 1e-3);
  CHECK((closed.x - open_tr.x).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("closed loop equals full-state feedback when the estimate is exact") {
  const LtiModel m = default_benchmark();
  const UioDesign uio = design_uio(m);
  const double k = 9.0;
  const Pulse pulse{1.0, 0.5, 0.05, 0};
  const Trajectory closed =
      simulate_closed_loop(m, uio.observer, k, pulse, 10.0, 1e-3);

  // Full-state-information reference: same held-input convention, exact
  // ZOH steps on the plant with u_k = -k*(cl - cr)*x_k.
  Vector cl = m.Cl.row(1).transpose();
  Vector cr = m.Cr.row(0).transpose();
  const ZohDiscretization z = discretize_zoh(m, 1e-3);
  Vector x = Vector::Zero(m.n());
  double max_diff = 0.0;
  for (Eigen::Index step = 0; step < closed.times.size() - 1; ++step) {
    const double diff = (closed.x.row(step).transpose() - x).norm();
    max_diff = std::max(max_diff, diff);
    const double t = closed.times(step);
    const double u = -k * (cl.dot(x) - cr.dot(x));
    const double d =
        (t >= pulse.start && t < pulse.start + pulse.width) ? pulse.amplitude
                                                            : 0.0;
    x = z.Phi * x + z.GammaB.col(1) * u + z.GammaE * d;
  }
  CHECK(max_diff <= 1e-8);
}

TEST_CASE("diverging closed loop raises the overflow guard") {
  const LtiModel m = scalar_feedback_model(-1.0, 0.0);
  const UnknownInputObserver obs = as_uio_form(m, LuenbergerObserver{
      Matrix::Constant(1, 1, 1.0), "edot = (A - L*Cl)*e"});
  // Positive feedback: closed-loop pole at -1 - (-10) = +9.
  SignalSelector sel;
  sel.input_index = 0;
  sel.local_rows = {0};
  sel.remote_rows = {0};
  CHECK_THROWS_AS(
      (void)simulate_closed_loop(m, obs, -10.0, Pulse{1.0, 0.5, 0.0, 0}, 25.0,
                                 1e-3, sel, Vector::Ones(1)),
      UnstableClosedLoop);
}

TEST_CASE("benchmark energy decays without input") {
  const TwoAreaParams p = default_benchmark_params();
  const LtiModel m = build_two_area(p);
  const Matrix ks = stiffness_matrix(p);
  std::mt19937_64 rng(241);
  const Vector x0 = random_vector(rng, m.n(), 0.01);
  const Pulse none{1.0, 0.5, 0.0, 0};
  const Trajectory tr = simulate_plant(m, nullptr, none, x0, 10.0, 1e-3);
  double last = 1e300;
  for (Eigen::Index k = 0; k < tr.times.size(); ++k) {
    Vector delta(4), omega(4);
    for (int i = 0; i < 4; ++i) {
      delta(i) = tr.x(k, 2 * i);
      omega(i) = tr.x(k, 2 * i + 1);
    }
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += p.inertia[i] * omega(i) * omega(i);
    v += 0.5 / p.omega_b * delta.dot(ks * delta);
    CHECK(v <= last * (1.0 + 1e-12));
    last = v;
  }
}

TEST_CASE("trajectory grid is uniform and complete") {
  const LtiModel m = default_benchmark();
  const Trajectory tr =
      simulate_plant(m, nullptr, Pulse{1.0, 0.5, 0.05, 0}, {}, 2.0, 1e-3);
  REQUIRE(tr.times.size() == 2001);
  CHECK(tr.x.rows() == tr.times.size());
  CHECK(tr.y_l.rows() == tr.times.size());
  CHECK(tr.y_r.rows() == tr.times.size());
  CHECK(tr.u.rows() == tr.times.size());
  for (Eigen::Index k = 0; k < tr.times.size(); ++k)
    CHECK(tr.times(k) == doctest::Approx(k * 1e-3).epsilon(1e-12));
}

TEST_CASE("CSV serialization is bit-stable with 17 significant digits") {
  Matrix data(2, 3);
  data << 0.0, 1.0 / 3.0, -2.5, 1e-3, 0.1 + 0.2, 1e17;
  const std::string text = to_csv({"t", "a", "b"}, data);
  const std::string expected =
      "t,a,b\n"
      "0,0.33333333333333331,-2.5\n"
      "0.001,0.30000000000000004,1e+17\n";
  CHECK(text == expected);
  CHECK(to_csv({"t", "a", "b"}, data) == text);
  CHECK_THROWS_AS((void)to_csv({"t", "a"}, data), DimensionMismatch);
}
