#pragma once

#include <vector>

#include "wapss/certify.hpp"
#include "wapss/model.hpp"

namespace wapss {

// Classic full-order observer
//   xhat' = A xhat + B u + L (y_l - Cl xhat),  yhat_r = Cr xhat,
// whose estimation error obeys e' = (A - L Cl) e.
struct LuenbergerObserver {
  Matrix L;  // n x p_l
  // Recorded sign convention for the error dynamics.
  std::string convention = "edot = (A - L*Cl)*e";
};

struct LuenbergerDesign {
  LuenbergerObserver observer;
  StabilityCertificate certificate;
};

// Disturbance-decoupled observer
//   z' = F z + T B u + K y_l,  xhat = z - H y_l,  yhat_r = Cr xhat,
// with M = I + H Cl, T = M, F = M A - L Cl, K = L - F H.  The error obeys
// e' = F e exactly, independent of the unknown input d.
struct UnknownInputObserver {
  Matrix F;  // n x n
  Matrix T;  // n x n
  Matrix K;  // n x p_l
  Matrix H;  // n x p_l
  Matrix M;  // n x n
  Matrix L;  // n x p_l design gain
};

// Outcome of the algebraic existence test.  The observer exists iff
// rank(Cl E) = rank(E) (disturbance visible through the measurements, so
// M E = 0 is achievable) and (M A, Cl) is detectable.
struct UioExistence {
  Matrix H;  // n x p_l
  Matrix M;  // n x n
  bool rank_ok = false;
  bool detectable = false;
  bool accepted = false;
  std::vector<std::string> reasons;  // human-readable failure descriptions
};

struct UioGainDesign {
  Matrix L;  // n x p_l
  StabilityCertificate certificate;  // P, R = P L, alpha, lmi_max_eig
};

// Designs L so that the error decays at least at rate `alpha`:
// spectral abscissa(A - L Cl) <= -alpha.  Fully observable single-output
// pairs with a well-conditioned observability matrix get direct pole
// placement at -alpha; everything else goes through the output-injection
// Riccati design on the shifted pair (A + alpha I, Cl).  Throws
// NotDetectable when an unstable mode is unobservable and RateInfeasible
// when a stable unobservable mode decays slower than `alpha`.
LuenbergerDesign design_luenberger(const LtiModel& model, double alpha);

// Computes H = -E (Cl E)^+ and M = I + H Cl, and reports whether the
// unknown-input observer exists for this model.  Never throws on a healthy
// model description; the verdict carries the failure reasons.
UioExistence check_uio_existence(const LtiModel& model);

// Assembles the full observer from a stabilizing gain L for M A - L Cl.
// Throws NotHurwitz when L does not stabilize, InvalidParams when the
// existence test rejects the model.
UnknownInputObserver synthesize_uio(const LtiModel& model, const Matrix& L);

// Riccati gain for M A - L Cl plus the quadratic certificate:
// P solves F' P + P F = -I, R = P L, and
// sym(A'M'P + P M A - Cl'R' - R Cl) is negative definite.
UioGainDesign design_uio_gain(const LtiModel& model);

// Convenience: design the gain and assemble the observer in one call.
struct UioDesign {
  UnknownInputObserver observer;
  StabilityCertificate certificate;
};
UioDesign design_uio(const LtiModel& model);

// JSON document with keys "F","T","K","H","M","L" (matrix-of-rows layout,
// byte-stable).  A Luenberger design maps onto the same keys through its
// degenerate unknown-input form (H = 0, M = T = I, K = L, F = A - L Cl).
std::string observer_to_json_text(const UnknownInputObserver& observer);
void save_observer(const UnknownInputObserver& observer,
                   const std::string& path);

// The degenerate mapping used for serialization and co-simulation.
UnknownInputObserver as_uio_form(const LtiModel& model,
                                 const LuenbergerObserver& observer);

}  // namespace wapss
