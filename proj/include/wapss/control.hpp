#pragma once

#include <string>
#include <vector>

#include "wapss/estimation.hpp"
#include "wapss/model.hpp"

namespace wapss {

// Static wide-area stabilizer acting on one input channel:
//   u = -k (y_l,sel - yhat_r,sel).
struct StaticWapss {
  double k = 0.0;
  int input_index = 0;
  std::string feedback = "u = -k*(y_l - yhat_r)";
};

struct TuneEntry {
  double k = 0.0;
  std::vector<double> swing_dampings;  // sorted by mode frequency
  double abscissa = 0.0;
  bool hurwitz = false;
};

struct TuneReport {
  std::vector<TuneEntry> entries;
  double selected_k = 0.0;
  double best_score = 0.0;
  // True when the selection maximized the minimum swing damping; false when
  // no candidate had swing modes and the spectral abscissa was used instead.
  bool damping_objective = true;
};

struct TuneResult {
  StaticWapss controller;
  TuneReport report;
};

// The ideal-estimate plant block A - B_c k (c_l - c_r) for the selected
// input column and feedback rows.
Matrix plant_block(const LtiModel& model, double k,
                   const SignalSelector& selector = {});

// Augmented matrix in (x, e) coordinates:
//   [[A - B_c k (c_l - c_r), -B_c k c_r], [0, F]].
// Its spectrum is the union of the plant-block and F spectra.
Matrix closed_loop_model(const LtiModel& model,
                         const UnknownInputObserver& observer, double k,
                         const SignalSelector& selector = {});

// Evaluates every grid gain on the ideal plant block and picks the Hurwitz
// one maximizing the minimum swing-mode damping ratio (falling back to the
// most negative abscissa when no candidate exhibits swing modes), with ties
// broken toward smaller |k|.  Throws NoStabilizingGain when no grid point
// stabilizes.
TuneResult tune_static_gain(const LtiModel& model,
                            const UnknownInputObserver& observer,
                            const std::vector<double>& k_grid,
                            const SignalSelector& selector = {});

// JSON tuning report: per-k entries {"k", "swing_dampings", "abscissa",
// "hurwitz"} plus the selected gain and objective.  Byte-stable.
std::string tuning_report_to_json_text(const TuneReport& report);

// Two-cycle settling verdict on a speed-difference series: `peak` is the
// largest |signal| from the pulse start onward, `tail` the largest |signal|
// from `settle_window` seconds after the pulse end onward, and the verdict
// passes when tail <= ratio_threshold * peak.  A series that never moves
// passes trivially.
struct EnvelopeVerdict {
  bool pass = false;
  double peak = 0.0;
  double tail = 0.0;
  double ratio = 0.0;
};
EnvelopeVerdict measure_envelope(const Vector& times, const Vector& signal,
                                 double pulse_start, double pulse_end,
                                 double settle_window = 3.22,
                                 double ratio_threshold = 0.1);

}  // namespace wapss
