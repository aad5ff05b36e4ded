#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wapss/estimation.hpp"
#include "wapss/model.hpp"

namespace wapss {

// Rectangular disturbance: value `amplitude` on [start, start + width),
// zero elsewhere, injected into the given disturbance column.
struct Pulse {
  double start = 1.0;      // s
  double width = 0.5;      // s
  double amplitude = 0.05;  // pu power
  int channel = 0;         // column of E
};

inline constexpr double kDefaultDt = 1e-3;    // s
inline constexpr double kDefaultTEnd = 25.0;  // s

// Sampled closed- or open-loop run on the uniform grid t_k = k dt.  Row k of
// each series belongs to t_k; the input row k is the value held over
// [t_k, t_{k+1}) (the final row is zero, nothing is applied after the run).
struct Trajectory {
  Vector times;   // N+1
  Matrix x;       // (N+1) x n
  Matrix xhat;    // (N+1) x n
  Matrix e;       // (N+1) x n, e = x - xhat
  Matrix y_l;     // (N+1) x p_l
  Matrix y_r;     // (N+1) x p_r
  Matrix yhat_r;  // (N+1) x p_r
  Matrix u;       // (N+1) x m
};

struct ZohDiscretization {
  Matrix Phi;      // exp(A dt)
  Matrix GammaB;   // integral of exp(A tau) dtau * B
  Matrix GammaE;   // integral of exp(A tau) dtau * E
};

// exp(A h) by scaling-and-squaring with a Pade approximant; relative error
// <= 1e-12 for ||A h|| <= 10.  Throws Overflow when the result leaves the
// finite range.
Matrix matrix_exponential(const Matrix& a, double h);

// Exact zero-order-hold discretization via the augmented-matrix exponential.
ZohDiscretization discretize_zoh(const LtiModel& model, double dt);

// Open-loop plant run.  `u` is sampled at each grid point and held over the
// step (pass nullptr for zero input).  Pulse edges must sit on the grid.
Trajectory simulate_plant(const LtiModel& model,
                          const std::function<Vector(double)>& u,
                          const Pulse& d, const Vector& x0, double t_end,
                          double dt);

// Plant and observer co-simulated on one grid through a single exact
// discretization of the stacked dynamics; for the unknown-input form the
// observer state z' = F z + T B u + K y_l propagates with xhat = z - H y_l.
// The known input `u` defaults to zero.
Trajectory simulate_estimation(const LtiModel& model,
                               const UnknownInputObserver& observer,
                               const Pulse& d, const Vector& x0,
                               const Vector& xhat0, double t_end, double dt,
                               const std::function<Vector(double)>& u = {});
Trajectory simulate_estimation(const LtiModel& model,
                               const LuenbergerObserver& observer,
                               const Pulse& d, const Vector& x0,
                               const Vector& xhat0, double t_end, double dt,
                               const std::function<Vector(double)>& u = {});

// Static wide-area feedback u_sel = -k (y_l,sel - yhat_r,sel) computed at
// each step start and held over the step, with the estimate supplied by the
// observer.  Throws UnstableClosedLoop when the state norm passes 1e8.
Trajectory simulate_closed_loop(const LtiModel& model,
                                const UnknownInputObserver& observer,
                                double k, const Pulse& d, double t_end,
                                double dt,
                                const SignalSelector& selector = {},
                                const Vector& x0 = {},
                                const Vector& xhat0 = {});

// Resolves the selector against a model: returns the selected local row of
// Cl and remote row of Cr (zero row when the remote selection is empty).
struct SelectedRows {
  Vector local;   // length n
  Vector remote;  // length n
  int input = 0;  // column of B
};
SelectedRows resolve_selector(const LtiModel& model,
                              const SignalSelector& selector);

// Bit-stable CSV: header row from the given names (one per data column,
// conventionally starting with "t"), decimal point '.', separator ',',
// line terminator '\n', 17 significant digits.
std::string to_csv(const std::vector<std::string>& names, const Matrix& data);
void write_csv(const std::string& path, const std::vector<std::string>& names,
               const Matrix& data);

}  // namespace wapss
