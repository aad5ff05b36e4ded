#include "wapss/control.hpp"

#include <algorithm>
#include <cmath>

#include "wapss/certify.hpp"
#include "wapss/detail/json_util.hpp"
#include "wapss/modal.hpp"
#include "wapss/simulate.hpp"

namespace wapss {

Matrix plant_block(const LtiModel& model, double k,
                   const SignalSelector& selector) {
  if (!std::isfinite(k)) throw InvalidParams("gain k must be finite");
  const SelectedRows sel = resolve_selector(model, selector);
  const Vector b_col = model.B.col(sel.input);
  return model.A - b_col * (k * (sel.local - sel.remote)).transpose();
}

Matrix closed_loop_model(const LtiModel& model,
                         const UnknownInputObserver& observer, double k,
                         const SignalSelector& selector) {
  if (!std::isfinite(k)) throw InvalidParams("gain k must be finite");
  const Eigen::Index n = model.n();
  if (observer.F.rows() != n || observer.F.cols() != n)
    throw DimensionMismatch("observer F must be n x n");
  const SelectedRows sel = resolve_selector(model, selector);
  const Vector b_col = model.B.col(sel.input);

  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) =
      model.A - b_col * (k * (sel.local - sel.remote)).transpose();
  aug.topRightCorner(n, n) = -b_col * (k * sel.remote).transpose();
  aug.bottomRightCorner(n, n) = observer.F;
  return aug;
}

TuneResult tune_static_gain(const LtiModel& model,
                            const UnknownInputObserver& observer,
                            const std::vector<double>& k_grid,
                            const SignalSelector& selector) {
  if (k_grid.empty()) throw InvalidParams("gain grid must be non-empty");
  for (double k : k_grid)
    if (!std::isfinite(k)) throw InvalidParams("gain grid contains non-finite");
  if (observer.F.rows() != model.n() || observer.F.cols() != model.n())
    throw DimensionMismatch("observer F must be n x n");
  {
    const HurwitzReport f_report = is_hurwitz(observer.F);
    if (!f_report.verdict)
      throw NoStabilizingGain(
          "observer error dynamics are not Hurwitz (abscissa " +
          std::to_string(f_report.abscissa) +
          "); no static gain can stabilize the augmented loop");
  }
  const SelectedRows sel = resolve_selector(model, selector);

  TuneResult result;
  result.controller.input_index = sel.input;

  for (double k : k_grid) {
    TuneEntry entry;
    entry.k = k;
    LtiModel closed = model;
    closed.A = plant_block(model, k, selector);
    const HurwitzReport report = is_hurwitz(closed.A);
    entry.abscissa = report.abscissa;
    entry.hurwitz = report.verdict;
    for (const Mode& mode : identify_swing_modes(closed))
      entry.swing_dampings.push_back(mode.zeta);
    result.report.entries.push_back(std::move(entry));
  }

  // Prefer the swing-damping objective whenever any stabilizing candidate
  // carries swing modes; otherwise fall back to pushing the abscissa left.
  bool any_swing = false;
  for (const TuneEntry& entry : result.report.entries)
    if (entry.hurwitz && !entry.swing_dampings.empty()) any_swing = true;

  const TuneEntry* best = nullptr;
  double best_score = 0.0;
  for (const TuneEntry& entry : result.report.entries) {
    if (!entry.hurwitz) continue;
    if (any_swing && entry.swing_dampings.empty()) continue;
    const double score =
        any_swing
            ? *std::min_element(entry.swing_dampings.begin(),
                                entry.swing_dampings.end())
            : -entry.abscissa;
    const bool better =
        best == nullptr || score > best_score ||
        (score == best_score && (std::abs(entry.k) < std::abs(best->k) ||
                                 (std::abs(entry.k) == std::abs(best->k) &&
                                  entry.k < best->k)));
    if (better) {
      best = &entry;
      best_score = score;
    }
  }
  if (best == nullptr)
    throw NoStabilizingGain(
        "no gain in the grid renders the closed loop Hurwitz");

  result.controller.k = best->k;
  result.report.selected_k = best->k;
  result.report.best_score = best_score;
  result.report.damping_objective = any_swing;
  return result;
}

std::string tuning_report_to_json_text(const TuneReport& report) {
  detail::ordered_json j;
  detail::ordered_json entries = detail::ordered_json::array();
  for (const TuneEntry& entry : report.entries) {
    detail::ordered_json e;
    e["k"] = entry.k;
    e["swing_dampings"] = entry.swing_dampings;
    e["abscissa"] = entry.abscissa;
    e["hurwitz"] = entry.hurwitz;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  j["selected_k"] = report.selected_k;
  j["best_score"] = report.best_score;
  j["objective"] = report.damping_objective ? "min-swing-damping" : "abscissa";
  return j.dump() + "\n";
}

EnvelopeVerdict measure_envelope(const Vector& times, const Vector& signal,
                                 double pulse_start, double pulse_end,
                                 double settle_window, double ratio_threshold) {
  if (times.size() != signal.size())
    throw DimensionMismatch("times and signal lengths differ");
  if (times.size() == 0) throw InvalidParams("empty series");
  if (!(settle_window >= 0.0) || !(ratio_threshold > 0.0))
    throw InvalidParams("settle window must be >= 0 and threshold > 0");
  if (!(pulse_end >= pulse_start))
    throw InvalidParams("pulse end precedes pulse start");

  const double tail_from = pulse_end + settle_window;
  EnvelopeVerdict v;
  bool tail_seen = false;
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    const double mag = std::abs(signal(k));
    if (times(k) >= pulse_start) v.peak = std::max(v.peak, mag);
    if (times(k) >= tail_from) {
      v.tail = std::max(v.tail, mag);
      tail_seen = true;
    }
  }
  if (!tail_seen)
    throw InvalidParams("series ends before the settling window opens");
  v.ratio = v.peak > 0.0 ? v.tail / v.peak : 0.0;
  v.pass = v.tail <= ratio_threshold * v.peak;
  return v;
}

}  // namespace wapss
