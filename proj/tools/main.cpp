// wapss: wide-area power swing study tool.
//
// Subcommands:
//   modal       eigenstructure study: modes.json, participation.csv, lsi.csv
//   observer    observer design + estimation run: error.csv, estimate.csv,
//               observer.json, certificate.json
//   closedloop  gain tuning + damping study: dw24_open.csv, dw24_closed.csv,
//               tuning.json, printed envelope verdict
//
// Exit codes: 0 success, 2 model error, 3 observer-existence failure,
// 4 tuning failure (no stabilizing gain in the grid).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "wapss/benchmark.hpp"
#include "wapss/control.hpp"
#include "wapss/errors.hpp"
#include "wapss/estimation.hpp"
#include "wapss/modal.hpp"
#include "wapss/model.hpp"
#include "wapss/simulate.hpp"

namespace {

using wapss::Matrix;
using wapss::Vector;

constexpr int kExitOk = 0;
constexpr int kExitModelError = 2;
constexpr int kExitObserverExistence = 3;
constexpr int kExitTuningFailure = 4;

struct Options {
  std::string model = "builtin";
  std::string out = "out";
  double t_end = wapss::kDefaultTEnd;
  double dt = wapss::kDefaultDt;
  std::vector<double> pulse;   // t0, width, amplitude
  double alpha = 2.0;
  std::vector<double> k_grid;  // start, step, end
  std::uint64_t seed = 1;
  std::string kind = "uio";
};

wapss::Pulse make_pulse(const Options& opt) {
  wapss::Pulse p;  // defaults: start 1.0 s, width 0.5 s, amplitude 0.05
  if (!opt.pulse.empty()) {
    p.start = opt.pulse[0];
    p.width = opt.pulse[1];
    p.amplitude = opt.pulse[2];
  }
  p.channel = 0;
  return p;
}

std::vector<double> make_gain_grid(const Options& opt) {
  double start = 0.0, step = 0.5, end = 50.0;
  if (!opt.k_grid.empty()) {
    start = opt.k_grid[0];
    step = opt.k_grid[1];
    end = opt.k_grid[2];
  }
  if (!(step > 0.0)) throw wapss::InvalidParams("k-grid step must be > 0");
  if (!(end >= start))
    throw wapss::InvalidParams("k-grid end must be >= start");
  std::vector<double> grid;
  const double slack = 1e-9 * std::max(1.0, std::abs(end));
  for (int i = 0;; ++i) {
    const double k = start + step * i;
    if (k > end + slack) break;
    grid.push_back(k);
  }
  return grid;
}

// Loads or builds the model and validates it; on any model problem prints a
// diagnosis and returns exit code 2 through `code`.
bool load_study_model(const Options& opt, wapss::LtiModel& model, int& code) {
  try {
    model = (opt.model == "builtin") ? wapss::default_benchmark()
                                     : wapss::load_model(opt.model);
    const wapss::ValidationReport report = wapss::validate_model(model);
    if (!report.ok()) {
      std::cerr << "model validation failed:\n";
      for (const wapss::ValidationIssue& issue : report.issues)
        std::cerr << "  - [" << issue.code << "] " << issue.message << "\n";
      code = kExitModelError;
      return false;
    }
  } catch (const wapss::Error& err) {
    std::cerr << "model error: " << err.what() << "\n";
    code = kExitModelError;
    return false;
  }
  return true;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_modal(const Options& opt) {
  wapss::LtiModel m;
  int code = kExitOk;
  if (!load_study_model(opt, m, code)) return code;
  std::filesystem::create_directories(opt.out);

  const wapss::ModalDecomposition md = wapss::eigenmodes(m.A);
  const std::vector<wapss::Mode> swing = wapss::identify_swing_modes(m);
  auto is_swing_mode = [&swing](const wapss::Mode& mode) {
    for (const wapss::Mode& s : swing)
      if (s.eigenvalue == mode.eigenvalue) return true;
    return false;
  };

  nlohmann::ordered_json modes_json;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const wapss::Mode& mode : md.modes) {
    nlohmann::ordered_json entry;
    entry["re"] = mode.eigenvalue.real();
    entry["im"] = mode.eigenvalue.imag();
    entry["frequency"] = mode.frequency;
    entry["zeta"] = mode.zeta;
    entry["conjugate_pair"] = mode.conjugate_pair;
    entry["is_swing"] = is_swing_mode(mode);
    list.push_back(std::move(entry));
  }
  modes_json["modes"] = std::move(list);
  {
    std::ofstream out(join_path(opt.out, "modes.json"), std::ios::binary);
    out << modes_json.dump() << "\n";
  }

  // participation.csv: one row per mode, mode descriptors then one column
  // per state (participation factors).
  std::vector<std::string> names = {"mode", "re", "im", "frequency", "zeta"};
  for (const wapss::StateLabel& label : m.state_labels)
    names.push_back(label.name);
  Matrix part(static_cast<Eigen::Index>(md.modes.size()),
              static_cast<Eigen::Index>(names.size()));
  for (Eigen::Index r = 0; r < part.rows(); ++r) {
    const wapss::Mode& mode = md.modes[static_cast<std::size_t>(r)];
    part(r, 0) = static_cast<double>(r);
    part(r, 1) = mode.eigenvalue.real();
    part(r, 2) = mode.eigenvalue.imag();
    part(r, 3) = mode.frequency;
    part(r, 4) = mode.zeta;
    for (Eigen::Index i = 0; i < m.n(); ++i)
      part(r, 5 + i) = mode.participation(i);
  }
  wapss::write_csv(join_path(opt.out, "participation.csv"), names, part);

  // lsi.csv: loop ranking for the lowest-frequency swing mode (the
  // inter-area mode on the bundled benchmark).  Inputs are reported
  // 1-based to match generator numbering.
  {
    std::string text = "rank,input,output,lsi\n";
    if (!swing.empty()) {
      const std::vector<wapss::LoopScore> scores =
          wapss::rank_loops(m, swing.front());
      int rank = 1;
      for (const wapss::LoopScore& s : scores) {
        text += std::to_string(rank++) + "," +
                std::to_string(s.input_index + 1) + "," + s.output + "," +
                format_double(s.lsi) + "\n";
      }
    }
    std::ofstream out(join_path(opt.out, "lsi.csv"), std::ios::binary);
    out << text;
  }
  return kExitOk;
}

void write_estimation_outputs(const wapss::LtiModel& m,
                              const wapss::Trajectory& tr,
                              const std::string& out_dir) {
  const Eigen::Index steps = tr.times.size();
  const Eigen::Index n = m.n();

  // error.csv: t, e_1..e_n, norm
  {
    std::vector<std::string> names = {"t"};
    for (Eigen::Index i = 0; i < n; ++i)
      names.push_back("e_" + std::to_string(i + 1));
    names.push_back("norm");
    Matrix data(steps, 1 + n + 1);
    data.col(0) = tr.times;
    data.middleCols(1, n) = tr.e;
    for (Eigen::Index k = 0; k < steps; ++k)
      data(k, 1 + n) = tr.e.row(k).norm();
    wapss::write_csv(join_path(out_dir, "error.csv"), names, data);
  }

  // estimate.csv: t, y_r, yhat_r (per remote row when there are several)
  {
    const Eigen::Index p_r = m.p_r();
    std::vector<std::string> names = {"t"};
    for (Eigen::Index r = 0; r < p_r; ++r) {
      const std::string suffix =
          p_r > 1 ? "_" + std::to_string(r + 1) : std::string();
      names.push_back("y_r" + suffix);
      names.push_back("yhat_r" + suffix);
    }
    Matrix data(steps, 1 + 2 * p_r);
    data.col(0) = tr.times;
    for (Eigen::Index r = 0; r < p_r; ++r) {
      data.col(1 + 2 * r) = tr.y_r.col(r);
      data.col(2 + 2 * r) = tr.yhat_r.col(r);
    }
    wapss::write_csv(join_path(out_dir, "estimate.csv"), names, data);
  }
}

int run_observer(const Options& opt) {
  wapss::LtiModel m;
  int code = kExitOk;
  if (!load_study_model(opt, m, code)) return code;
  std::filesystem::create_directories(opt.out);

  const wapss::Pulse pulse = make_pulse(opt);
  const Vector x0 = Vector::Zero(m.n());

  if (opt.kind == "uio") {
    const wapss::UioExistence existence = wapss::check_uio_existence(m);
    if (!existence.accepted) {
      std::cerr << "unknown-input observer does not exist for this model:\n";
      for (const std::string& reason : existence.reasons)
        std::cerr << "  - " << reason << "\n";
      return kExitObserverExistence;
    }
    wapss::UioDesign design;
    try {
      design = wapss::design_uio(m);
    } catch (const wapss::NotDetectable& err) {
      std::cerr << "unknown-input observer design failed: " << err.what()
                << "\n";
      return kExitObserverExistence;
    }
    // The estimator starts aligned with the plant; the run shows that the
    // pulse never leaks into the estimation error.
    const Vector xhat0 = x0;
    const wapss::Trajectory tr = wapss::simulate_estimation(
        m, design.observer, pulse, x0, xhat0, opt.t_end, opt.dt);
    write_estimation_outputs(m, tr, opt.out);
    wapss::save_observer(design.observer,
                         join_path(opt.out, "observer.json"));
    wapss::save_certificate(design.certificate,
                            join_path(opt.out, "certificate.json"));
    return kExitOk;
  }

  // Luenberger: seeded initial estimate offset, rate given by --alpha.
  wapss::LuenbergerDesign design;
  try {
    design = wapss::design_luenberger(m, opt.alpha);
  } catch (const wapss::NotDetectable& err) {
    std::cerr << "observer design failed: " << err.what() << "\n";
    return kExitObserverExistence;
  } catch (const wapss::RateInfeasible& err) {
    std::cerr << "observer design failed: " << err.what() << "\n";
    return kExitObserverExistence;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector xhat0(m.n());
  for (Eigen::Index i = 0; i < m.n(); ++i) xhat0(i) = normal(rng);
  const wapss::Trajectory tr = wapss::simulate_estimation(
      m, design.observer, pulse, x0, xhat0, opt.t_end, opt.dt);
  write_estimation_outputs(m, tr, opt.out);
  wapss::save_observer(wapss::as_uio_form(m, design.observer),
                       join_path(opt.out, "observer.json"));
  wapss::save_certificate(design.certificate,
                          join_path(opt.out, "certificate.json"));
  return kExitOk;
}

int run_closedloop(const Options& opt) {
  wapss::LtiModel m;
  int code = kExitOk;
  if (!load_study_model(opt, m, code)) return code;
  std::filesystem::create_directories(opt.out);

  const wapss::Pulse pulse = make_pulse(opt);
  const wapss::SignalSelector selector;  // defaults: G2 input, dw2 vs dw4

  const wapss::UioExistence existence = wapss::check_uio_existence(m);
  if (!existence.accepted) {
    std::cerr << "unknown-input observer does not exist for this model:\n";
    for (const std::string& reason : existence.reasons)
      std::cerr << "  - " << reason << "\n";
    return kExitObserverExistence;
  }
  wapss::UioDesign design;
  try {
    design = wapss::design_uio(m);
  } catch (const wapss::NotDetectable& err) {
    std::cerr << "unknown-input observer design failed: " << err.what()
              << "\n";
    return kExitObserverExistence;
  }

  std::vector<double> grid;
  try {
    grid = make_gain_grid(opt);
  } catch (const wapss::Error& err) {
    std::cerr << "bad k-grid: " << err.what() << "\n";
    return kExitTuningFailure;
  }
  wapss::TuneResult tuned;
  try {
    tuned = wapss::tune_static_gain(m, design.observer, grid, selector);
  } catch (const wapss::NoStabilizingGain& err) {
    std::cerr << "tuning failed: " << err.what() << "\n";
    return kExitTuningFailure;
  }

  const wapss::SelectedRows rows = wapss::resolve_selector(m, selector);
  const Vector diff_row = rows.local - rows.remote;

  // Open loop: pulse response with no feedback.
  const wapss::Trajectory open_tr =
      wapss::simulate_plant(m, {}, pulse, {}, opt.t_end, opt.dt);
  {
    Matrix data(open_tr.times.size(), 2);
    data.col(0) = open_tr.times;
    data.col(1) = open_tr.x * diff_row;
    wapss::write_csv(join_path(opt.out, "dw24_open.csv"), {"t", "dw24"},
                     data);
  }

  // Closed loop at the selected gain; dw24 is the true speed difference and
  // dw24_synth the synthesized one the feedback actually uses.
  const wapss::Trajectory closed_tr = wapss::simulate_closed_loop(
      m, design.observer, tuned.controller.k, pulse, opt.t_end, opt.dt,
      selector);
  Vector dw24_closed = closed_tr.x * rows.local - closed_tr.x * rows.remote;
  Vector dw24_synth =
      closed_tr.x * rows.local - closed_tr.xhat * rows.remote;
  {
    Matrix data(closed_tr.times.size(), 3);
    data.col(0) = closed_tr.times;
    data.col(1) = dw24_closed;
    data.col(2) = dw24_synth;
    wapss::write_csv(join_path(opt.out, "dw24_closed.csv"),
                     {"t", "dw24", "dw24_synth"}, data);
  }

  {
    std::ofstream out(join_path(opt.out, "tuning.json"), std::ios::binary);
    out << wapss::tuning_report_to_json_text(tuned.report);
  }

  const wapss::EnvelopeVerdict verdict =
      wapss::measure_envelope(closed_tr.times, dw24_closed, pulse.start,
                              pulse.start + pulse.width);
  std::printf(
      "envelope verdict: %s (k=%.6g, peak=%.6g, tail=%.6g, ratio=%.6g, "
      "threshold=0.1)\n",
      verdict.pass ? "PASS" : "FAIL", tuned.controller.k, verdict.peak,
      verdict.tail, verdict.ratio);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wide-area power swing study tool"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--model", opt.model,
                    "model JSON path, or 'builtin' for the bundled two-area "
                    "benchmark")
        ->capture_default_str();
    sub->add_option("--out", opt.out, "output directory")
        ->capture_default_str();
    sub->add_option("--t-end", opt.t_end, "simulation horizon [s]")
        ->capture_default_str();
    sub->add_option("--dt", opt.dt, "time step [s]")->capture_default_str();
    sub->add_option("--pulse", opt.pulse,
                    "disturbance pulse start,width,amplitude")
        ->delimiter(',')
        ->expected(3);
    sub->add_option("--seed", opt.seed, "seed for randomized choices")
        ->capture_default_str();
  };

  CLI::App* modal = app.add_subcommand(
      "modal", "eigenstructure, swing modes, and loop ranking");
  add_common(modal);

  CLI::App* observer = app.add_subcommand(
      "observer", "observer design and estimation-error study");
  add_common(observer);
  observer
      ->add_option("--kind", opt.kind, "observer kind: luenberger or uio")
      ->check(CLI::IsMember({"luenberger", "uio"}))
      ->capture_default_str();
  observer
      ->add_option("--alpha", opt.alpha,
                   "decay rate for the Luenberger design")
      ->capture_default_str();

  CLI::App* closedloop = app.add_subcommand(
      "closedloop", "static wide-area feedback tuning and damping study");
  add_common(closedloop);
  closedloop
      ->add_option("--k-grid", opt.k_grid, "gain grid start,step,end")
      ->delimiter(',')
      ->expected(3);

  CLI11_PARSE(app, argc, argv);

  try {
    if (modal->parsed()) return run_modal(opt);
    if (observer->parsed()) return run_observer(opt);
    if (closedloop->parsed()) return run_closedloop(opt);
  } catch (const wapss::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
