#pragma once

#include <array>
#include <vector>

#include "wapss/model.hpp"

namespace wapss {

// One eigenmode of the state matrix.  Complex-conjugate pairs are reported
// once, via the member with non-negative imaginary part, with
// `conjugate_pair` set.  Eigenvectors are normalized so that the right
// eigenvector has unit 2-norm with its largest-magnitude entry real-positive,
// and the left eigenvector satisfies the pairing v_l^H v_r = 1.
struct Mode {
  Complex eigenvalue;
  double frequency = 0.0;  // |Im(eigenvalue)|, rad/s
  double zeta = 0.0;       // damping ratio -Re/|eigenvalue|
  ComplexVector right;
  ComplexVector left;
  Vector participation;  // per-state participation, row sums to 1
  bool conjugate_pair = false;
  bool is_swing = false;
};

struct ModalDecomposition {
  std::vector<Mode> modes;  // sorted by (frequency, real part) ascending
};

// A candidate feedback loop (actuation column, measurement row) scored by the
// geometric loop-selection index for one mode.
struct LoopScore {
  int input_index = 0;      // column of B
  std::string output;       // description of the measurement row
  Vector output_row;        // the row itself, length n
  double lsi = 0.0;         // in [0, 1]
};

inline constexpr std::array<double, 2> kDefaultSwingBand{1.0, 15.0};
inline constexpr double kDefaultSwingThreshold = 0.5;

// Full eigen-decomposition with deterministic normalization.  Throws
// ConvergenceFailure if the QR iteration fails and DefectiveMatrix when the
// eigenvector basis is too ill-conditioned to invert reliably.
ModalDecomposition eigenmodes(const Matrix& A);

// zeta = -Re(lambda)/|lambda|.  Throws ZeroEigenvalue for lambda == 0.
double damping_ratio(Complex lambda);

// P[k][i] = Re(w_k,i * v_i,k) where w_k is the k-th row of V^-1 and v_k the
// k-th eigenvector column; rows follow the eigensolver's eigenvalue order
// (conjugate partners each get their own, identical, row).  Every row and
// every column sums to 1 exactly up to roundoff.
Matrix participation_matrix(const Matrix& A);

// Modes whose frequency lies in [band[0], band[1]] and whose summed
// participation over delta/omega-labeled states reaches `threshold`, sorted
// by frequency ascending, with is_swing set.
std::vector<Mode> identify_swing_modes(
    const LtiModel& model, std::array<double, 2> band = kDefaultSwingBand,
    double threshold = kDefaultSwingThreshold);

// LSI = (|b^T v_l| * |c v_r|) / (||b|| ||v_l|| ||c|| ||v_r||) for the B
// column `input_index` and measurement row `output_row`.
LoopScore loop_selection_index(const LtiModel& model, const Mode& mode,
                               int input_index, const Vector& output_row,
                               std::string output_name = {});

// Scores every candidate loop for `mode` and sorts descending by LSI with a
// deterministic tie-break (input index, then output name).  Candidates are
// all B columns crossed with all pairwise machine speed differences
// dw{i}-dw{j}; a model without at least two omega-labeled machines falls back
// to the stacked rows of Cl and Cr as outputs.
std::vector<LoopScore> rank_loops(const LtiModel& model, const Mode& mode);

}  // namespace wapss
