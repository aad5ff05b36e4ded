#include "wapss/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unsupported/Eigen/MatrixFunctions>

#include "wapss/detail/json_util.hpp"

namespace wapss {

namespace {

constexpr double kStateGuard = 1e8;  // infinity-norm blow-up threshold

// Maps a time instant onto the grid index, requiring it to sit on the grid.
long long grid_index(double t, double dt, const char* what) {
  const double ratio = t / dt;
  const long long k = std::llround(ratio);
  if (std::abs(static_cast<double>(k) * dt - t) >
      1e-9 * std::max(dt, std::abs(t)))
    throw GridMisaligned(std::string(what) + " at t=" + std::to_string(t) +
                         " s does not fall on the dt=" + std::to_string(dt) +
                         " s grid");
  return k;
}

struct GridSpec {
  long long steps;
  long long pulse_on;   // first step index with the pulse active
  long long pulse_off;  // first step index with the pulse inactive again
};

GridSpec make_grid(const Pulse& d, double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidParams("dt must be positive and finite");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw InvalidParams("t_end must be positive and finite");
  if (!(d.width > 0.0) || !std::isfinite(d.width))
    throw InvalidParams("pulse width must be positive and finite");
  if (!(d.start >= 0.0) || !std::isfinite(d.start) ||
      !std::isfinite(d.amplitude))
    throw InvalidParams("pulse start/amplitude must be finite, start >= 0");

  GridSpec grid;
  grid.steps = grid_index(t_end, dt, "simulation end");
  if (grid.steps < 1) throw InvalidParams("t_end must cover at least one step");
  grid.pulse_on = grid_index(d.start, dt, "pulse start");
  grid.pulse_off = grid_index(d.start + d.width, dt, "pulse end");
  return grid;
}

void check_pulse_channel(const LtiModel& model, const Pulse& d) {
  if (d.amplitude == 0.0) return;
  if (model.q() == 0)
    throw DimensionMismatch(
        "model has no disturbance columns but the pulse amplitude is nonzero");
  if (d.channel < 0 || d.channel >= model.q())
    throw DimensionMismatch("pulse channel " + std::to_string(d.channel) +
                            " out of range for " + std::to_string(model.q()) +
                            " disturbance columns");
}

Vector zero_or(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() == 0) return Vector::Zero(n);
  if (v.size() != n)
    throw DimensionMismatch(std::string(what) + " has length " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(n));
  if (!v.allFinite())
    throw NonFinite(std::string(what) + " contains a non-finite entry");
  return v;
}

// Exact one-step transition for the stacked system
//   [x; z]' = Aaug [x; z] + Baug * u + Eaug * d.
struct AugmentedZoh {
  Matrix Phi;
  Matrix GammaB;
  Matrix GammaE;
};

AugmentedZoh discretize(const Matrix& a_aug, const Matrix& b_aug,
                        const Matrix& e_aug, double dt) {
  const Eigen::Index n = a_aug.rows();
  const Eigen::Index m = b_aug.cols();
  const Eigen::Index q = e_aug.cols();
  Matrix block = Matrix::Zero(n + m + q, n + m + q);
  block.topLeftCorner(n, n) = a_aug;
  if (m > 0) block.block(0, n, n, m) = b_aug;
  if (q > 0) block.block(0, n + m, n, q) = e_aug;
  const Matrix expm = matrix_exponential(block, dt);
  AugmentedZoh zoh;
  zoh.Phi = expm.topLeftCorner(n, n);
  zoh.GammaB = m > 0 ? Matrix(expm.block(0, n, n, m)) : Matrix::Zero(n, 0);
  zoh.GammaE =
      q > 0 ? Matrix(expm.block(0, n + m, n, q)) : Matrix::Zero(n, 0);
  return zoh;
}

Trajectory allocate(const LtiModel& model, long long steps) {
  Trajectory tr;
  const Eigen::Index rows = static_cast<Eigen::Index>(steps) + 1;
  tr.times.resize(rows);
  tr.x.setZero(rows, model.n());
  tr.xhat.setZero(rows, model.n());
  tr.e.setZero(rows, model.n());
  tr.y_l.setZero(rows, model.p_l());
  tr.y_r.setZero(rows, model.p_r());
  tr.yhat_r.setZero(rows, model.p_r());
  tr.u.setZero(rows, model.m());
  return tr;
}

}  // namespace

Matrix matrix_exponential(const Matrix& a, double h) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("matrix exponential requires a square matrix");
  if (!a.allFinite() || !std::isfinite(h))
    throw NonFinite("matrix exponential of non-finite input");
  const Matrix result = (a * h).exp();
  if (!result.allFinite())
    throw Overflow("matrix exponential overflowed the finite range");
  return result;
}

ZohDiscretization discretize_zoh(const LtiModel& model, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidParams("dt must be positive and finite");
  const AugmentedZoh zoh = discretize(model.A, model.B, model.E, dt);
  return {zoh.Phi, zoh.GammaB, zoh.GammaE};
}

Trajectory simulate_plant(const LtiModel& model,
                          const std::function<Vector(double)>& u,
                          const Pulse& d, const Vector& x0, double t_end,
                          double dt) {
  const GridSpec grid = make_grid(d, t_end, dt);
  check_pulse_channel(model, d);
  const Vector x_init = zero_or(x0, model.n(), "x0");

  const ZohDiscretization zoh = discretize_zoh(model, dt);
  Trajectory tr = allocate(model, grid.steps);

  Vector x = x_init;
  for (long long k = 0; k <= grid.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    tr.times(k) = t;
    tr.x.row(k) = x.transpose();
    tr.xhat.row(k) = x.transpose();
    tr.y_l.row(k) = (model.Cl * x).transpose();
    if (model.p_r() > 0) {
      tr.y_r.row(k) = (model.Cr * x).transpose();
      tr.yhat_r.row(k) = tr.y_r.row(k);
    }
    if (k == grid.steps) break;

    Vector uk = Vector::Zero(model.m());
    if (u) uk = zero_or(u(t), model.m(), "u(t)");
    tr.u.row(k) = uk.transpose();
    Vector dk = Vector::Zero(model.q());
    if (model.q() > 0 && k >= grid.pulse_on && k < grid.pulse_off)
      dk(d.channel) = d.amplitude;

    x = zoh.Phi * x + zoh.GammaB * uk + zoh.GammaE * dk;
    if (!x.allFinite())
      throw Overflow("plant state left the finite range at t=" +
                     std::to_string(t + dt));
  }
  return tr;
}

Trajectory simulate_estimation(const LtiModel& model,
                               const UnknownInputObserver& observer,
                               const Pulse& d, const Vector& x0,
                               const Vector& xhat0, double t_end, double dt,
                               const std::function<Vector(double)>& u) {
  const GridSpec grid = make_grid(d, t_end, dt);
  check_pulse_channel(model, d);
  const Eigen::Index n = model.n();
  if (observer.F.rows() != n || observer.F.cols() != n ||
      observer.H.rows() != n || observer.H.cols() != model.p_l() ||
      observer.M.rows() != n || observer.K.rows() != n ||
      observer.K.cols() != model.p_l() || observer.T.rows() != n)
    throw DimensionMismatch("observer matrices do not match the model");
  const Vector x_init = zero_or(x0, n, "x0");
  const Vector xhat_init = zero_or(xhat0, n, "xhat0");

  // Stacked dynamics of [x; z]: the plant drives the observer through
  // K y_l = K Cl x, and both share the known input.
  Matrix a_aug = Matrix::Zero(2 * n, 2 * n);
  a_aug.topLeftCorner(n, n) = model.A;
  a_aug.bottomLeftCorner(n, n) = observer.K * model.Cl;
  a_aug.bottomRightCorner(n, n) = observer.F;
  Matrix b_aug(2 * n, model.m());
  b_aug.topRows(n) = model.B;
  b_aug.bottomRows(n) = observer.T * model.B;
  Matrix e_aug = Matrix::Zero(2 * n, model.q());
  e_aug.topRows(n) = model.E;

  const AugmentedZoh zoh = discretize(a_aug, b_aug, e_aug, dt);
  Trajectory tr = allocate(model, grid.steps);

  Vector state(2 * n);
  state.head(n) = x_init;
  // z = xhat + H y_l so that xhat(0) comes out as requested.
  state.tail(n) = xhat_init + observer.H * (model.Cl * x_init);

  for (long long k = 0; k <= grid.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vector x = state.head(n);
    const Vector xhat = state.tail(n) - observer.H * (model.Cl * x);
    tr.times(k) = t;
    tr.x.row(k) = x.transpose();
    tr.xhat.row(k) = xhat.transpose();
    tr.e.row(k) = (x - xhat).transpose();
    tr.y_l.row(k) = (model.Cl * x).transpose();
    if (model.p_r() > 0) {
      tr.y_r.row(k) = (model.Cr * x).transpose();
      tr.yhat_r.row(k) = (model.Cr * xhat).transpose();
    }
    if (k == grid.steps) break;

    Vector uk = Vector::Zero(model.m());
    if (u) uk = zero_or(u(t), model.m(), "u(t)");
    tr.u.row(k) = uk.transpose();
    Vector dk = Vector::Zero(model.q());
    if (model.q() > 0 && k >= grid.pulse_on && k < grid.pulse_off)
      dk(d.channel) = d.amplitude;

    state = zoh.Phi * state + zoh.GammaB * uk + zoh.GammaE * dk;
    if (!state.allFinite())
      throw Overflow("co-simulation state left the finite range at t=" +
                     std::to_string(t + dt));
  }
  return tr;
}

Trajectory simulate_estimation(const LtiModel& model,
                               const LuenbergerObserver& observer,
                               const Pulse& d, const Vector& x0,
                               const Vector& xhat0, double t_end, double dt,
                               const std::function<Vector(double)>& u) {
  return simulate_estimation(model, as_uio_form(model, observer), d, x0,
                             xhat0, t_end, dt, u);
}

SelectedRows resolve_selector(const LtiModel& model,
                              const SignalSelector& selector) {
  SelectedRows rows;
  if (selector.input_index < 0 || selector.input_index >= model.m())
    throw DimensionMismatch("selector input index " +
                            std::to_string(selector.input_index) +
                            " out of range for " + std::to_string(model.m()) +
                            " inputs");
  rows.input = selector.input_index;

  if (selector.local_rows.size() > 1 || selector.remote_rows.size() > 1)
    throw InvalidParams(
        "the static stabilizer feeds back a single local and a single remote "
        "row");
  int local_row = static_cast<int>(model.p_l()) - 1;  // default: last Cl row
  if (!selector.local_rows.empty()) local_row = selector.local_rows.front();
  if (local_row < 0 || local_row >= model.p_l())
    throw DimensionMismatch("selector local row " + std::to_string(local_row) +
                            " out of range for " + std::to_string(model.p_l()) +
                            " measured rows");
  rows.local = model.Cl.row(local_row).transpose();

  rows.remote = Vector::Zero(model.n());
  if (!selector.remote_rows.empty()) {
    const int remote_row = selector.remote_rows.front();
    if (remote_row < 0 || remote_row >= model.p_r())
      throw DimensionMismatch(
          "selector remote row " + std::to_string(remote_row) +
          " out of range for " + std::to_string(model.p_r()) + " remote rows");
    rows.remote = model.Cr.row(remote_row).transpose();
  }
  return rows;
}

Trajectory simulate_closed_loop(const LtiModel& model,
                                const UnknownInputObserver& observer,
                                double k, const Pulse& d, double t_end,
                                double dt, const SignalSelector& selector,
                                const Vector& x0, const Vector& xhat0) {
  if (!std::isfinite(k)) throw InvalidParams("gain k must be finite");
  const GridSpec grid = make_grid(d, t_end, dt);
  check_pulse_channel(model, d);
  const Eigen::Index n = model.n();
  const SelectedRows sel = resolve_selector(model, selector);
  const Vector x_init = zero_or(x0, n, "x0");
  const Vector xhat_init = zero_or(xhat0, n, "xhat0");

  Matrix a_aug = Matrix::Zero(2 * n, 2 * n);
  a_aug.topLeftCorner(n, n) = model.A;
  a_aug.bottomLeftCorner(n, n) = observer.K * model.Cl;
  a_aug.bottomRightCorner(n, n) = observer.F;
  const Vector b_col = model.B.col(sel.input);
  Matrix b_aug(2 * n, 1);
  b_aug.topRows(n) = b_col;
  b_aug.bottomRows(n) = observer.T * b_col;
  Matrix e_aug = Matrix::Zero(2 * n, model.q());
  e_aug.topRows(n) = model.E;

  const AugmentedZoh zoh = discretize(a_aug, b_aug, e_aug, dt);
  Trajectory tr = allocate(model, grid.steps);

  Vector state(2 * n);
  state.head(n) = x_init;
  state.tail(n) = xhat_init + observer.H * (model.Cl * x_init);

  for (long long step = 0; step <= grid.steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    const Vector x = state.head(n);
    const Vector xhat = state.tail(n) - observer.H * (model.Cl * x);
    tr.times(step) = t;
    tr.x.row(step) = x.transpose();
    tr.xhat.row(step) = xhat.transpose();
    tr.e.row(step) = (x - xhat).transpose();
    tr.y_l.row(step) = (model.Cl * x).transpose();
    if (model.p_r() > 0) {
      tr.y_r.row(step) = (model.Cr * x).transpose();
      tr.yhat_r.row(step) = (model.Cr * xhat).transpose();
    }
    if (step == grid.steps) break;

    const double u_fb = -k * (sel.local.dot(x) - sel.remote.dot(xhat));
    tr.u(step, sel.input) = u_fb;
    Vector dk = Vector::Zero(model.q());
    if (model.q() > 0 && step >= grid.pulse_on && step < grid.pulse_off)
      dk(d.channel) = d.amplitude;

    state = zoh.Phi * state + zoh.GammaB * u_fb + zoh.GammaE * dk;
    if (!state.allFinite() ||
        state.cwiseAbs().maxCoeff() > kStateGuard)
      throw UnstableClosedLoop(
          "closed-loop state exceeded the 1e8 overflow guard at t=" +
          std::to_string(t + dt) + " s (gain k=" + std::to_string(k) + ")");
  }
  return tr;
}

std::string to_csv(const std::vector<std::string>& names, const Matrix& data) {
  if (static_cast<Eigen::Index>(names.size()) != data.cols())
    throw DimensionMismatch("CSV needs one name per column: " +
                            std::to_string(names.size()) + " names for " +
                            std::to_string(data.cols()) + " columns");
  std::string out;
  out.reserve(static_cast<std::size_t>(data.size()) * 12 + 64);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ',';
    out += names[i];
  }
  out += '\n';
  char buffer[40];
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c > 0) out += ',';
      std::snprintf(buffer, sizeof buffer, "%.17g", data(r, c));
      out += buffer;
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& names,
               const Matrix& data) {
  detail::write_text_file(path, to_csv(names, data));
}

}  // namespace wapss
