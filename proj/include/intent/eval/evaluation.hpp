#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "intent/data/dataset.hpp"
#include "intent/model/model.hpp"

namespace intent::eval {

using core::Index;
using core::Points;
using core::TrajectoryWindow;

/// Mean Euclidean distance over steps. Throws ShapeError on mismatched or
/// empty inputs.
double ade(const Points<double>& predicted, const Points<double>& actual);
/// Euclidean distance between the final points.
double fde(const Points<double>& predicted, const Points<double>& actual);

/// Repeats the last observed displacement `t_pred` times.
Points<double> constant_velocity_predict(const TrajectoryWindow& window, Index t_pred);
inline Points<double> constant_velocity_predict(const TrajectoryWindow& window) {
  return constant_velocity_predict(window, window.future.size());
}

struct MetricsReport {
  std::vector<double> ade;
  std::vector<double> fde;
  double ade_mean = 0;
  double fde_mean = 0;
  std::size_t count = 0;
  data::Unit unit = data::Unit::Meters;
};

/// Predicts futures for a contiguous block of windows.
using Predictor = std::function<std::vector<Points<double>>(std::span<const TrajectoryWindow>)>;

/// Worker count: INTENT_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
unsigned worker_threads();

/// Runs `predict` over fixed-size blocks on up to `threads` workers and
/// reduces in window order, so the result does not depend on the thread
/// count. Throws ConfigError on an empty window list.
MetricsReport evaluate(std::span<const TrajectoryWindow> windows, const Predictor& predict, data::Unit unit,
                       unsigned threads = worker_threads());

MetricsReport evaluate_model(const ad::ParamSet& params, const model::ModelConfig& config,
                             std::span<const TrajectoryWindow> windows, data::Unit unit,
                             unsigned threads = worker_threads());
MetricsReport evaluate_constant_velocity(std::span<const TrajectoryWindow> windows, data::Unit unit,
                                         unsigned threads = worker_threads());

/// Per-window table with a header line: scene, agent, start_frame, ade, fde.
void write_metrics_table(std::ostream& out, const MetricsReport& report, std::span<const TrajectoryWindow> windows);
/// ade_mean, fde_mean, n_windows and unit as key=value lines.
void write_metrics_summary(std::ostream& out, const MetricsReport& report);

struct TimingReport {
  double training_seconds = 0;
  double inference_ms_per_window = 0;
  std::size_t n_windows = 0;
};

/// Times single-window forward passes after one warm-up pass. The mean is
/// over `repetitions` sweeps of all windows. Throws ConfigError when
/// repetitions is 0 or there are no windows.
TimingReport benchmark_timing(const ad::ParamSet& params, const model::ModelConfig& config,
                              std::span<const TrajectoryWindow> windows, std::size_t repetitions,
                              double training_seconds = 0);

void write_timing(std::ostream& out, const TimingReport& report);

/// "scene:agent:start_frame".
std::string window_id(const TrajectoryWindow& w);

/// One tab-separated row per window: id, hard label, soft label, R_h.
void export_representations(const ad::ParamSet& params, const model::ModelConfig& config,
                            std::span<const TrajectoryWindow> windows, std::ostream& out);
void export_representations(const ad::ParamSet& params, const model::ModelConfig& config,
                            std::span<const TrajectoryWindow> windows, const std::string& path);

}  // namespace intent::eval
