#pragma once

#include <limits>

#include "wapss/model.hpp"

namespace wapss {

// Quadratic stability/convergence certificate V(e) = e' P e.  Exactly one of
// Q (Lyapunov residual matrix, A_cl' P + P A_cl = -Q) or R (output-injection
// variable, R = P L) is populated depending on the producing operation; the
// unused member stays 0x0.  `lmi_max_eig` is NaN when no LMI was evaluated.
struct StabilityCertificate {
  Matrix P;
  Matrix qmat;  // Q in A_cl' P + P A_cl + Q = 0 (empty when unused)
  Matrix rmat;  // R = P * L                      (empty when unused)
  double alpha = 0.0;
  double lmi_max_eig = std::numeric_limits<double>::quiet_NaN();

  bool has_q() const { return qmat.size() > 0; }
  bool has_r() const { return rmat.size() > 0; }
  bool has_lmi() const { return lmi_max_eig == lmi_max_eig; }
};

struct HurwitzReport {
  bool verdict = false;
  double abscissa = 0.0;
};

// Weights for the output-injection Riccati design.
struct RiccatiWeights {
  Matrix state;   // n x n SPD
  Matrix output;  // p x p SPD
};

// verdict <=> max Re(lambda) < 0; the abscissa is returned as computed.
HurwitzReport is_hurwitz(const Matrix& a_cl);

// Solves A_cl' P + P A_cl = -Q by a vectorized (Kronecker) linear solve and
// verifies the residual against 1e-9 * ||P|| * ||A_cl||.  Throws NotHurwitz
// when A_cl is not strictly stable and IllConditioned when the residual
// check fails.
Matrix solve_lyapunov(const Matrix& a_cl, const Matrix& q);

// P = solve_lyapunov(A_cl, I) and alpha = 1 / (2 lambda_max(P)); along
// e' = A_cl e this certifies V-dot <= -2 alpha V with V = e' P e.
StabilityCertificate exponential_rate(const Matrix& a_cl);

// Gain L with Asys - L C Hurwitz, from the stabilizing solution of the dual
// (filter) algebraic Riccati equation
//   Asys X + X Asys' - X C' Rw^-1 C X + Qw = 0,  L = X C' Rw^-1.
// The stable invariant subspace of the Hamiltonian matrix provides X; a
// Newton (Kleinman) refinement runs when the residual exceeds 1e-8 scaled.
Matrix stabilizing_output_injection(const Matrix& asys, const Matrix& c,
                                    const RiccatiWeights& weights);
Matrix stabilizing_output_injection(const Matrix& asys, const Matrix& c);

// Most-positive eigenvalue of sym(A'M'P + P M A - C'R' - R C).  A negative
// value certifies the estimation-error LMI for the gain L = P^-1 R.
double verify_uio_lmi(const Matrix& p, const Matrix& r, const Matrix& m,
                      const Matrix& a, const Matrix& c);

// JSON document with matrices "P" and, when present, "Q"/"R", plus scalars
// "alpha" and (when evaluated) "lmi_max_eig".  Byte-stable.
std::string certificate_to_json_text(const StabilityCertificate& cert);
void save_certificate(const StabilityCertificate& cert,
                      const std::string& path);

}  // namespace wapss
