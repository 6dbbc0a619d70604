#include "intent/eval/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "intent/config.hpp"
#include "intent/errors.hpp"

namespace intent::eval {

namespace {

void check_pair(const Points<double>& p, const Points<double>& a) {
  if (p.rows() != a.rows() || p.cols() != 2 || a.cols() != 2) {
    throw ShapeError("predicted and actual trajectories differ in length");
  }
  if (p.rows() == 0) throw ShapeError("cannot score an empty trajectory");
}

// Windows per predictor call. Fixed so that results do not depend on how
// blocks are spread over threads.
constexpr std::size_t kBlock = 256;

}  // namespace

double ade(const Points<double>& predicted, const Points<double>& actual) {
  check_pair(predicted, actual);
  return (predicted - actual).rowwise().norm().mean();
}

double fde(const Points<double>& predicted, const Points<double>& actual) {
  check_pair(predicted, actual);
  const Index last = predicted.rows() - 1;
  return (predicted.row(last) - actual.row(last)).norm();
}

Points<double> constant_velocity_predict(const TrajectoryWindow& window, Index t_pred) {
  const auto& obs = window.observation;
  core::validate(obs, 2);
  const core::Location<double> last = obs.back();
  const core::Location<double> step = last - obs.at(obs.size() - 2);
  Points<double> out(t_pred, 2);
  for (Index k = 0; k < t_pred; ++k) out.row(k) = (last + static_cast<double>(k + 1) * step).transpose();
  return out;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("INTENT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MetricsReport evaluate(std::span<const TrajectoryWindow> windows, const Predictor& predict, data::Unit unit,
                       unsigned threads) {
  if (windows.empty()) throw ConfigError("cannot evaluate an empty window set");
  for (const auto& w : windows) {
    if (!w.has_future()) throw ShapeError("window " + window_id(w) + " has no ground-truth future");
  }
  MetricsReport report;
  report.unit = unit;
  report.count = windows.size();
  report.ade.resize(windows.size());
  report.fde.resize(windows.size());

  const std::size_t n_blocks = (windows.size() + kBlock - 1) / kBlock;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n_blocks);
  const auto work = [&] {
    for (std::size_t b; (b = next++) < n_blocks;) {
      try {
        const std::size_t first = b * kBlock;
        const auto block = windows.subspan(first, std::min(kBlock, windows.size() - first));
        const auto preds = predict(block);
        if (preds.size() != block.size()) throw ShapeError("predictor returned the wrong number of trajectories");
        for (std::size_t i = 0; i < block.size(); ++i) {
          report.ade[first + i] = ade(preds[i], block[i].future.points);
          report.fde[first + i] = fde(preds[i], block[i].future.points);
        }
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_blocks));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  double a = 0, f = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    a += report.ade[i];
    f += report.fde[i];
  }
  report.ade_mean = a / static_cast<double>(windows.size());
  report.fde_mean = f / static_cast<double>(windows.size());
  return report;
}

MetricsReport evaluate_model(const ad::ParamSet& params, const model::ModelConfig& config,
                             std::span<const TrajectoryWindow> windows, data::Unit unit, unsigned threads) {
  model::check_params(params, config);
  return evaluate(
      windows,
      [&](std::span<const TrajectoryWindow> block) {
        std::vector<Points<double>> out;
        for (auto& o : model::predict(params, config, block)) out.push_back(std::move(o.predicted));
        return out;
      },
      unit, threads);
}

MetricsReport evaluate_constant_velocity(std::span<const TrajectoryWindow> windows, data::Unit unit,
                                         unsigned threads) {
  return evaluate(
      windows,
      [](std::span<const TrajectoryWindow> block) {
        std::vector<Points<double>> out;
        for (const auto& w : block) out.push_back(constant_velocity_predict(w));
        return out;
      },
      unit, threads);
}

std::string window_id(const TrajectoryWindow& w) {
  return (w.scene_id.empty() ? std::string("-") : w.scene_id) + ":" + std::to_string(w.agent_id) + ":" +
         std::to_string(w.start_frame);
}

void write_metrics_table(std::ostream& out, const MetricsReport& report, std::span<const TrajectoryWindow> windows) {
  out << "scene\tagent\tstart_frame\tade\tfde\n";
  for (std::size_t i = 0; i < report.count; ++i) {
    const auto& w = windows[i];
    out << (w.scene_id.empty() ? "-" : w.scene_id) << '\t' << w.agent_id << '\t' << w.start_frame << '\t'
        << format_double(report.ade[i]) << '\t' << format_double(report.fde[i]) << '\n';
  }
}

void write_metrics_summary(std::ostream& out, const MetricsReport& report) {
  out << "ade_mean=" << format_double(report.ade_mean) << '\n'
      << "fde_mean=" << format_double(report.fde_mean) << '\n'
      << "n_windows=" << report.count << '\n'
      << "unit=" << data::to_string(report.unit) << '\n';
}

TimingReport benchmark_timing(const ad::ParamSet& params, const model::ModelConfig& config,
                              std::span<const TrajectoryWindow> windows, std::size_t repetitions,
                              double training_seconds) {
  if (repetitions == 0) throw ConfigError("benchmark_timing needs at least one repetition");
  if (windows.empty()) throw ConfigError("benchmark_timing needs at least one window");
  model::check_params(params, config);
  double sink = 0;
  for (const auto& w : windows) sink += model::model_forward(w, params, config).predicted(0, 0);

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (std::size_t r = 0; r < repetitions; ++r) {
    for (const auto& w : windows) sink += model::model_forward(w, params, config).predicted(0, 0);
  }
  const double elapsed = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  if (!std::isfinite(sink)) throw NumericError("non-finite prediction during timing");

  TimingReport report;
  report.training_seconds = training_seconds;
  report.n_windows = windows.size();
  report.inference_ms_per_window = elapsed / static_cast<double>(repetitions * windows.size());
  return report;
}

void write_timing(std::ostream& out, const TimingReport& report) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", report.inference_ms_per_window);
  out << "training_seconds=" << format_double(report.training_seconds) << '\n'
      << "inference_ms_per_window=" << buf << '\n'
      << "timed_windows=" << report.n_windows << '\n';
}

void export_representations(const ad::ParamSet& params, const model::ModelConfig& config,
                            std::span<const TrajectoryWindow> windows, std::ostream& out) {
  for (std::size_t first = 0; first < windows.size(); first += kBlock) {
    const auto block = windows.subspan(first, std::min(kBlock, windows.size() - first));
    const auto outputs = model::predict(params, config, block);
    for (std::size_t i = 0; i < block.size(); ++i) {
      const auto& o = outputs[i];
      out << window_id(block[i]) << '\t';
      if (o.hard_label < core::kNumIntentions) out << to_string(static_cast<core::Intention>(o.hard_label));
      else out << o.hard_label;
      for (Index k = 0; k < o.soft_label.size(); ++k) out << '\t' << format_double(o.soft_label(k));
      for (Index k = 0; k < o.representation.size(); ++k) out << '\t' << format_double(o.representation(k));
      out << '\n';
    }
  }
}

void export_representations(const ad::ParamSet& params, const model::ModelConfig& config,
                            std::span<const TrajectoryWindow> windows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  export_representations(params, config, windows, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace intent::eval
