#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wapss/errors.hpp"

namespace wapss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Per-state metadata. `kind` distinguishes rotor-angle states from
// rotor-speed states so downstream analysis can find machine pairs without
// parsing names. `machine` is a 0-based machine index (-1 when the state does
// not belong to a machine).
struct StateLabel {
  enum class Kind { Delta, Omega, Other };

  std::string name;
  Kind kind = Kind::Other;
  int machine = -1;

  friend bool operator==(const StateLabel&, const StateLabel&) = default;
};

std::string to_string(StateLabel::Kind kind);
StateLabel::Kind kind_from_string(const std::string& text);

// Continuous-time LTI plant
//   x' = A x + B u + E d
//   y_l = Cl x   (locally measured outputs)
//   y_r = Cr x   (remote outputs, to be synthesized rather than measured)
struct LtiModel {
  Matrix A;   // n x n
  Matrix B;   // n x m
  Matrix E;   // n x q
  Matrix Cl;  // p_l x n
  Matrix Cr;  // p_r x n
  std::vector<StateLabel> state_labels;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index q() const { return E.cols(); }
  Eigen::Index p_l() const { return Cl.rows(); }
  Eigen::Index p_r() const { return Cr.rows(); }

  friend bool operator==(const LtiModel& a, const LtiModel& b) {
    return a.A == b.A && a.B == b.B && a.E == b.E && a.Cl == b.Cl &&
           a.Cr == b.Cr && a.state_labels == b.state_labels;
  }
};

// Picks which input column drives the stabilizer and which measured/remote
// rows form the feedback signal.  `local_rows`/`remote_rows` must each select
// at most one row; an empty remote selection means the remote term is zero
// (pure local feedback).  An empty local selection resolves to the last row
// of Cl at the point of use.
struct SignalSelector {
  int input_index = 1;
  std::vector<int> local_rows;
  std::vector<int> remote_rows{0};
};

struct ValidationIssue {
  std::string code;     // stable machine-readable tag
  std::string message;  // human-readable detail
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Checks dimensional consistency, finiteness of all entries, and label
// integrity.  Collects all problems instead of stopping at the first.
ValidationReport validate_model(const LtiModel& model);

// JSON (de)serialization.  `load_model` throws ParseError for malformed or
// unrecognized documents, DimensionMismatch for inconsistent shapes, and
// NonFinite for non-finite entries.  `save_model` produces a byte-stable
// document; loading it back yields a bit-identical model.
LtiModel load_model(const std::string& path);
void save_model(const LtiModel& model, const std::string& path);

// In-memory variants used by the CLI and tests.
LtiModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const LtiModel& model);

// Indices of states with the given kind, in state order.
std::vector<int> states_of_kind(const LtiModel& model, StateLabel::Kind kind);

}  // namespace wapss
