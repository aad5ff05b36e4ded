#pragma once

#include <array>

#include "wapss/model.hpp"

namespace wapss {

// Parameters of the reduced two-area four-machine swing surrogate.  The
// synchronizing-stiffness matrix is assembled from an intra-area stiffness
// k_a (machine pairs (1,2) and (3,4)), a weaker tie-line stiffness k_t for
// the cross-area links, and a small uniform anchoring stiffness k_g on the
// diagonal that represents load/exciter synchronizing torque and removes the
// free angle-reference drift.  Set k_g = 0 for a purely pairwise network.
struct TwoAreaParams {
  std::array<double, 4> inertia;  // H_i, seconds
  std::array<double, 4> damping;  // D_i, pu torque per pu speed
  double k_a = 0.0;               // intra-area stiffness, pu power / rad
  double k_t = 0.0;               // tie-line stiffness, pu power / rad
  double k_g = 0.006;             // anchoring stiffness, pu power / rad
  double omega_b = 2.0 * 3.14159265358979323846 * 60.0;  // rad/s
};

// Builds the n=8 state-space model with interleaved states
// (delta_1, omega_1, ..., delta_4, omega_4):
//   delta_i' = omega_b * omega_i
//   2 H_i omega_i' = u_i + d_i - sum_j Ks[i][j] delta_j - D_i omega_i
// B column i is machine i's power channel scaled by 1/(2 H_i); E is the G2
// column of B (disturbance pulse site); Cl measures delta_2 and omega_2 at
// the G2 terminal; Cr is the remote omega_4 row.
LtiModel build_two_area(const TwoAreaParams& params);

// Returns the synchronizing-stiffness matrix for the given parameters.
Matrix stiffness_matrix(const TwoAreaParams& params);

// Fits (k_a, k_t) and the damping coefficients so that the three swing
// eigenvalue pairs of the built model match `targets` (given as the
// upper-half-plane representatives, any order).  Inertias stay at the
// shipped values; the fit runs a fixed deterministic schedule of nested
// bisections, so identical targets always produce identical parameters.
TwoAreaParams calibrate_two_area(const std::array<Complex, 3>& targets);

// The shipped pre-calibrated benchmark; byte-stable across runs.
LtiModel default_benchmark();

// The parameter set behind default_benchmark().
TwoAreaParams default_benchmark_params();

}  // namespace wapss
