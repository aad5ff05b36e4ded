#include "wapss/modal.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>

namespace wapss {

namespace {

struct Spectral {
  ComplexVector lambda;  // eigensolver order
  ComplexMatrix V;       // normalized right eigenvectors as columns
  ComplexMatrix W;       // V^{-1}; row k pairs with column k of V
};

// Maximum right-eigenvector basis condition number before the matrix is
// treated as numerically defective.
constexpr double kDefectiveCondition = 1e12;

Spectral spectral(const Matrix& A) {
  if (A.rows() != A.cols())
    throw DimensionMismatch("eigen-analysis requires a square matrix, got " +
                            std::to_string(A.rows()) + "x" +
                            std::to_string(A.cols()));
  if (A.size() == 0) throw DimensionMismatch("matrix must be non-empty");
  if (!A.allFinite())
    throw NonFinite("matrix contains a non-finite entry");

  Eigen::EigenSolver<Matrix> solver(A);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigenvalue iteration did not converge");

  Spectral s;
  s.lambda = solver.eigenvalues();
  s.V = solver.eigenvectors();

  // Deterministic normalization: unit 2-norm columns with the
  // largest-magnitude entry rotated onto the positive real axis.
  for (Eigen::Index k = 0; k < s.V.cols(); ++k) {
    const double norm = s.V.col(k).norm();
    if (norm == 0.0)
      throw DefectiveMatrix("eigenvector " + std::to_string(k) + " is zero");
    s.V.col(k) /= norm;
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < s.V.rows(); ++i) {
      const double mag = std::abs(s.V(i, k));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    const Complex phase = s.V(pivot, k);
    if (best > 0.0) s.V.col(k) *= std::conj(phase) / best;
  }

  Eigen::JacobiSVD<ComplexMatrix> svd(s.V);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || smax / smin > kDefectiveCondition)
    throw DefectiveMatrix(
        "eigenvector basis condition number exceeds 1e12; matrix is "
        "numerically defective");

  s.W = s.V.inverse();
  return s;
}

Mode make_mode(const Spectral& s, Eigen::Index k, bool conjugate_pair) {
  Mode mode;
  mode.eigenvalue = s.lambda(k);
  mode.frequency = std::abs(mode.eigenvalue.imag());
  mode.zeta = std::abs(mode.eigenvalue) == 0.0
                  ? 0.0
                  : damping_ratio(mode.eigenvalue);
  mode.right = s.V.col(k);
  mode.left = s.W.row(k).adjoint();
  mode.participation.resize(s.V.rows());
  for (Eigen::Index i = 0; i < s.V.rows(); ++i)
    mode.participation(i) = (s.W(k, i) * s.V(i, k)).real();
  mode.conjugate_pair = conjugate_pair;
  mode.is_swing = false;
  return mode;
}

}  // namespace

double damping_ratio(Complex lambda) {
  const double mag = std::abs(lambda);
  if (mag == 0.0)
    throw ZeroEigenvalue("damping ratio is undefined for a zero eigenvalue");
  return -lambda.real() / mag;
}

ModalDecomposition eigenmodes(const Matrix& A) {
  const Spectral s = spectral(A);
  const Eigen::Index n = A.rows();

  ModalDecomposition out;
  Eigen::Index negatives = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex lambda = s.lambda(k);
    const double tol = 1e-12 * (1.0 + std::abs(lambda));
    if (lambda.imag() > tol) {
      out.modes.push_back(make_mode(s, k, true));
    } else if (lambda.imag() < -tol) {
      ++negatives;
    } else {
      out.modes.push_back(make_mode(s, k, false));
    }
  }

  Eigen::Index pairs = 0;
  for (const Mode& mode : out.modes)
    if (mode.conjugate_pair) ++pairs;
  if (pairs != negatives)
    throw ConvergenceFailure(
        "eigenvalues of a real matrix failed to pair into conjugates");

  std::sort(out.modes.begin(), out.modes.end(),
            [](const Mode& a, const Mode& b) {
              if (a.frequency != b.frequency) return a.frequency < b.frequency;
              if (a.eigenvalue.real() != b.eigenvalue.real())
                return a.eigenvalue.real() < b.eigenvalue.real();
              return a.eigenvalue.imag() < b.eigenvalue.imag();
            });
  return out;
}

Matrix participation_matrix(const Matrix& A) {
  const Spectral s = spectral(A);
  const Eigen::Index n = A.rows();
  Matrix P(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      P(k, i) = (s.W(k, i) * s.V(i, k)).real();
  return P;
}

std::vector<Mode> identify_swing_modes(const LtiModel& model,
                                       std::array<double, 2> band,
                                       double threshold) {
  if (!(band[0] <= band[1]) || !std::isfinite(band[0]) ||
      !std::isfinite(band[1]))
    throw InvalidParams("frequency band must satisfy lo <= hi and be finite");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw InvalidParams("participation threshold must lie in [0, 1]");

  std::vector<int> labeled = states_of_kind(model, StateLabel::Kind::Delta);
  {
    std::vector<int> omegas = states_of_kind(model, StateLabel::Kind::Omega);
    labeled.insert(labeled.end(), omegas.begin(), omegas.end());
  }

  std::vector<Mode> swing;
  for (const Mode& mode : eigenmodes(model.A).modes) {
    if (mode.frequency < band[0] || mode.frequency > band[1]) continue;
    double summed = 0.0;
    for (int i : labeled) summed += mode.participation(i);
    if (summed >= threshold) {
      swing.push_back(mode);
      swing.back().is_swing = true;
    }
  }
  // eigenmodes() already sorts by frequency ascending; the filter preserves
  // that order.
  return swing;
}

LoopScore loop_selection_index(const LtiModel& model, const Mode& mode,
                               int input_index, const Vector& output_row,
                               std::string output_name) {
  if (input_index < 0 || input_index >= model.m())
    throw DimensionMismatch("input index " + std::to_string(input_index) +
                            " out of range for " + std::to_string(model.m()) +
                            " inputs");
  if (output_row.size() != model.n())
    throw DimensionMismatch("output row has length " +
                            std::to_string(output_row.size()) + ", expected " +
                            std::to_string(model.n()));

  const Vector b = model.B.col(input_index);
  const double nb = b.norm();
  const double nc = output_row.norm();
  if (nb == 0.0) throw ZeroVector("input column is zero");
  if (nc == 0.0) throw ZeroVector("output row is zero");
  const double nl = mode.left.norm();
  const double nr = mode.right.norm();
  if (nl == 0.0 || nr == 0.0) throw ZeroVector("mode eigenvector is zero");

  const Complex bl = b.cast<Complex>().transpose() * mode.left;
  const Complex cr = output_row.cast<Complex>().transpose() * mode.right;
  double lsi = (std::abs(bl) * std::abs(cr)) / (nb * nl * nc * nr);
  lsi = std::clamp(lsi, 0.0, 1.0);

  LoopScore score;
  score.input_index = input_index;
  score.output = output_name.empty()
                     ? "row" + std::to_string(model.n())
                     : std::move(output_name);
  score.output_row = output_row;
  score.lsi = lsi;
  return score;
}

std::vector<LoopScore> rank_loops(const LtiModel& model, const Mode& mode) {
  const Eigen::Index n = model.n();

  // Candidate measurement rows: pairwise machine speed differences when at
  // least two machines carry an omega-labeled state, otherwise the stacked
  // measured rows.
  std::vector<std::pair<std::string, Vector>> outputs;
  std::map<int, int> omega_state_of_machine;
  for (std::size_t i = 0; i < model.state_labels.size(); ++i) {
    const StateLabel& label = model.state_labels[i];
    if (label.kind == StateLabel::Kind::Omega && label.machine >= 1)
      omega_state_of_machine.emplace(label.machine, static_cast<int>(i));
  }
  if (omega_state_of_machine.size() >= 2) {
    for (auto a = omega_state_of_machine.begin();
         a != omega_state_of_machine.end(); ++a) {
      auto b = a;
      for (++b; b != omega_state_of_machine.end(); ++b) {
        Vector row = Vector::Zero(n);
        row(a->second) = 1.0;
        row(b->second) = -1.0;
        outputs.emplace_back("dw" + std::to_string(a->first) + "-dw" +
                                 std::to_string(b->first),
                             std::move(row));
      }
    }
  } else {
    for (Eigen::Index r = 0; r < model.p_l(); ++r)
      if (model.Cl.row(r).norm() > 0.0)
        outputs.emplace_back("yl" + std::to_string(r),
                             model.Cl.row(r).transpose());
    for (Eigen::Index r = 0; r < model.p_r(); ++r)
      if (model.Cr.row(r).norm() > 0.0)
        outputs.emplace_back("yr" + std::to_string(r),
                             model.Cr.row(r).transpose());
  }

  std::vector<LoopScore> scores;
  for (int j = 0; j < model.m(); ++j) {
    if (model.B.col(j).norm() == 0.0) continue;
    for (const auto& [name, row] : outputs)
      scores.push_back(loop_selection_index(model, mode, j, row, name));
  }

  std::sort(scores.begin(), scores.end(),
            [](const LoopScore& a, const LoopScore& b) {
              if (a.lsi != b.lsi) return a.lsi > b.lsi;
              if (a.input_index != b.input_index)
                return a.input_index < b.input_index;
              return a.output < b.output;
            });
  return scores;
}

}  // namespace wapss
