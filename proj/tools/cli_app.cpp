#include "cli_app.hpp"

#include <array>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "intent/errors.hpp"
#include "intent/eval/evaluation.hpp"
#include "run_config.hpp"
#include "svg_plot.hpp"

namespace intent::cli {

namespace {

using core::Index;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data;
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scene;
  std::string dataset;
  std::string model;
  std::string baseline;
  std::string log;
  bool tail = false;
  bool with_observed = false;
  bool timing = false;
  bool verbose = false;
  std::size_t max_windows = 16;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data, "Dataset root directory")->required();
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--set", o.sets, "Override one config key (key=value), repeatable");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--scene", o.scene, "Held-out scene");
  cmd->add_option("--dataset", o.dataset, "ethucy, sdd or kitti");
}

// Defaults, then the config file, then --set, then dedicated flags.
RunConfig resolve_config(const Options& o) {
  RunConfig rc;
  if (!o.config.empty()) rc.load_file(o.config);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!o.dataset.empty()) rc.set("dataset", o.dataset);
  if (!o.scene.empty()) rc.set("scene", o.scene);
  if (o.seed) rc.set("seed", std::to_string(*o.seed));
  rc.resolve();
  return rc;
}

data::WindowConfig windows_for(const RunConfig& rc, const model::ModelConfig& mc) {
  return {mc.t_obs, mc.t_pred, rc.stride};
}

// Training side: every scene but the held-out one, or all windows.
std::vector<core::TrajectoryWindow> training_windows(const data::Dataset& ds, const std::string& scene) {
  return scene.empty() ? ds.all_windows() : ds.split(scene).train;
}

// Evaluation side: the held-out scene, or all windows.
std::vector<core::TrajectoryWindow> test_windows(const data::Dataset& ds, const std::string& scene) {
  return scene.empty() ? ds.all_windows() : data::build_windows(ds.scene(scene), ds.windows);
}

// Final t_obs points of every track long enough, with no future segment.
std::vector<core::TrajectoryWindow> tail_windows(const data::Dataset& ds, const std::string& scene, Index t_obs) {
  std::vector<core::TrajectoryWindow> out;
  for (const auto& s : ds.scenes) {
    if (!scene.empty() && s.name != scene) continue;
    const auto step = data::frame_step(s);
    for (const auto& t : data::tracks(s)) {
      const Index n = t.points.rows();
      if (n < t_obs) continue;
      core::TrajectoryWindow w;
      w.observation = core::Trajectory(t.points.bottomRows(t_obs), s.dt);
      w.future.dt = s.dt;
      w.agent_id = t.agent_id;
      w.scene_id = s.name;
      w.start_frame = t.first_frame + (n - t_obs) * step;
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::int64_t frame_step_of(const data::Dataset& ds, const std::string& scene) {
  return data::frame_step(ds.scene(scene));
}

// Output file or the given fallback stream.
struct Sink {
  std::ofstream file;
  std::ostream* stream;
  Sink(const std::string& path, std::ostream& fallback) : stream(&fallback) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    stream = &file;
  }
  std::ostream& operator*() { return *stream; }
  void close(const std::string& path) {
    if (!file.is_open()) return;
    file.close();
    if (!file) throw IoError("failed writing '" + path + "'");
  }
};

model::Checkpoint require_model(const Options& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  return model::load_checkpoint(o.model);
}

void print_loss(std::ostream& out, const train::LossBreakdown& l) {
  out << "classification_loss=" << format_double(l.classification) << '\n'
      << "contrastive_loss=" << format_double(l.contrastive) << '\n'
      << "prediction_loss=" << format_double(l.prediction) << '\n'
      << "total_loss=" << format_double(l.total) << '\n';
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  auto rc = resolve_config(o);
  const auto ds = data::load_dataset(rc.dataset, o.data, rc.window_config());
  const auto windows = training_windows(ds, rc.scene);
  const auto labeled = train::label_windows(windows, rc.model.t_obs, rc.labeling);

  const std::string ckpt = o.out.empty() ? "model.intm" : o.out;
  const std::string log_path = o.log.empty() ? ckpt + ".log.tsv" : o.log;
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot open '" + log_path + "' for writing");
  train::write_log_header(log);
  const auto result = train::train(labeled, rc.model, rc.training, train::PairRelation::defaults(),
                                   [&](const train::EpochLog& e) {
                                     train::write_log_line(log, e);
                                     if (o.verbose) train::write_log_line(err, e);
                                     return true;
                                   });
  log.close();
  if (!log) throw IoError("failed writing '" + log_path + "'");
  model::save_checkpoint(ckpt, rc.model, result.params);

  out << "windows=" << labeled.size() << '\n';
  if (!result.history.empty()) print_loss(out, result.history.back().mean);
  out << "training_seconds=" << format_double(result.seconds) << '\n'
      << "checkpoint=" << ckpt << '\n'
      << "log=" << log_path << '\n';
  return kSuccess;
}

int cmd_eval(const Options& o, std::ostream& out) {
  auto rc = resolve_config(o);
  eval::MetricsReport report;
  std::vector<core::TrajectoryWindow> windows;
  data::Dataset ds;
  std::optional<model::Checkpoint> ck;
  if (!o.baseline.empty()) {
    if (o.baseline != "const-vel") throw UsageError("unknown baseline '" + o.baseline + "' (expected const-vel)");
    ds = data::load_dataset(rc.dataset, o.data, rc.window_config());
    windows = test_windows(ds, rc.scene);
    report = eval::evaluate_constant_velocity(windows, ds.unit);
  } else {
    ck = require_model(o);
    ds = data::load_dataset(rc.dataset, o.data, windows_for(rc, ck->config));
    windows = test_windows(ds, rc.scene);
    report = eval::evaluate_model(ck->params, ck->config, windows, ds.unit);
  }
  eval::write_metrics_summary(out, report);
  if (!o.out.empty()) {
    Sink table(o.out, out);
    eval::write_metrics_table(*table, report, windows);
    table.close(o.out);
  }
  if (o.timing) {
    if (!ck) throw UsageError("--timing needs --model");
    eval::write_timing(out, eval::benchmark_timing(ck->params, ck->config, windows, 1));
  }
  return kSuccess;
}

int cmd_label(const Options& o, std::ostream& out, std::ostream& err) {
  auto rc = resolve_config(o);
  const auto ds = data::load_dataset(rc.dataset, o.data, rc.window_config());
  const auto windows = training_windows(ds, rc.scene);
  const auto labeled = train::label_windows(windows, rc.model.t_obs, rc.labeling);

  Sink sink(o.out, out);
  std::array<std::size_t, core::kNumIntentions + 1> counts{};
  for (const auto& l : labeled) {
    const auto& w = l.window;
    *sink << w.scene_id << '\t' << w.agent_id << '\t' << w.start_frame << '\t' << to_string(l.label) << '\n';
    ++counts[static_cast<std::size_t>(l.label)];
  }
  sink.close(o.out);
  // The histogram shares stdout only when the table went to a file.
  std::ostream& hist = o.out.empty() || o.out == "-" ? err : out;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    hist << to_string(static_cast<core::Intention>(k)) << '=' << counts[k] << '\n';
  }
  hist << "total=" << labeled.size() << '\n';
  return kSuccess;
}

// Windows for inference subcommands, matched to the checkpoint's lengths.
std::vector<core::TrajectoryWindow> inference_windows(const Options& o, const RunConfig& rc,
                                                      const model::ModelConfig& mc, data::Dataset& ds) {
  ds = data::load_dataset(rc.dataset, o.data, windows_for(rc, mc));
  if (!rc.scene.empty()) ds.scene(rc.scene);
  return o.tail ? tail_windows(ds, rc.scene, mc.t_obs) : test_windows(ds, rc.scene);
}

int cmd_predict(const Options& o, std::ostream& out) {
  auto rc = resolve_config(o);
  const auto ck = require_model(o);
  data::Dataset ds;
  const auto windows = inference_windows(o, rc, ck.config, ds);
  const auto outputs = model::predict(ck.params, ck.config, windows);

  Sink sink(o.out, out);
  auto& s = *sink;
  std::string scene;
  std::map<std::string, std::int64_t> steps;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (i == 0 || w.scene_id != scene) {
      scene = w.scene_id;
      s << "# scene " << scene << '\n';
    }
    if (!steps.count(scene)) steps[scene] = frame_step_of(ds, scene);
    const auto step = steps[scene];
    const auto row = [&](Index k, double x, double y, int flag) {
      s << w.start_frame + k * step << ' ' << w.agent_id << ' ' << format_double(x) << ' ' << format_double(y)
        << ' ' << flag << '\n';
    };
    if (o.with_observed) {
      for (Index k = 0; k < w.observation.size(); ++k) row(k, w.observation.points(k, 0), w.observation.points(k, 1), 0);
    }
    const auto& p = outputs[i].predicted;
    for (Index k = 0; k < p.rows(); ++k) row(w.observation.size() + k, p(k, 0), p(k, 1), 1);
  }
  sink.close(o.out);
  return kSuccess;
}

int cmd_export(const Options& o, std::ostream& out) {
  auto rc = resolve_config(o);
  const auto ck = require_model(o);
  data::Dataset ds;
  const auto windows = inference_windows(o, rc, ck.config, ds);
  Sink sink(o.out, out);
  eval::export_representations(ck.params, ck.config, windows, *sink);
  sink.close(o.out);
  return kSuccess;
}

int cmd_plot(const Options& o, std::ostream& out) {
  auto rc = resolve_config(o);
  std::optional<model::Checkpoint> ck;
  if (!o.model.empty()) ck = model::load_checkpoint(o.model);
  if (!o.baseline.empty() && o.baseline != "const-vel") {
    throw UsageError("unknown baseline '" + o.baseline + "' (expected const-vel)");
  }
  if (ck && !o.baseline.empty()) throw UsageError("--model and --baseline are exclusive");
  const model::ModelConfig mc = ck ? ck->config : rc.model;
  data::Dataset ds;
  auto windows = inference_windows(o, rc, mc, ds);
  if (windows.size() > o.max_windows) windows.resize(o.max_windows);

  std::vector<PlotWindow> panels;
  std::vector<model::ModelOutput> outputs;
  if (ck) outputs = model::predict(ck->params, ck->config, windows);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    PlotWindow p{eval::window_id(w), w.observation.points, w.future.points, {}};
    if (ck) {
      const int h = outputs[i].hard_label;
      p.title += " " + (h < core::kNumIntentions ? std::string(to_string(static_cast<core::Intention>(h)))
                                                 : "class" + std::to_string(h));
      p.prediction = outputs[i].predicted;
    } else if (!o.baseline.empty()) {
      p.prediction = eval::constant_velocity_predict(w, mc.t_pred);
    }
    panels.push_back(std::move(p));
  }
  Sink sink(o.out, out);
  write_svg(*sink, panels);
  sink.close(o.out);
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intention-aware trajectory prediction", "intent"};
  app.require_subcommand(1);
  Options o;

  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common(train_cmd, o);
  train_cmd->add_option("--out", o.out, "Checkpoint path (default model.intm)");
  train_cmd->add_option("--log", o.log, "Training log path (default <out>.log.tsv)");
  train_cmd->add_flag("--verbose,-v", o.verbose, "Echo the training log to stderr");

  auto* eval_cmd = app.add_subcommand("eval", "Report ADE/FDE on the held-out scene");
  add_common(eval_cmd, o);
  eval_cmd->add_option("--model", o.model, "Checkpoint");
  eval_cmd->add_option("--baseline", o.baseline, "Evaluate a baseline instead (const-vel)");
  eval_cmd->add_option("--out", o.out, "Per-window metrics table");
  eval_cmd->add_flag("--timing", o.timing, "Also time single-window inference");

  auto* label_cmd = app.add_subcommand("label", "Assign rule-based intention labels to training windows");
  add_common(label_cmd, o);
  label_cmd->add_option("--out", o.out, "Label table (default stdout)");

  auto* predict_cmd = app.add_subcommand("predict", "Write predicted trajectories in world coordinates");
  add_common(predict_cmd, o);
  predict_cmd->add_option("--model", o.model, "Checkpoint")->required();
  predict_cmd->add_option("--out", o.out, "Output file (default stdout)");
  predict_cmd->add_flag("--tail", o.tail, "Forecast from the last observed points of every track");
  predict_cmd->add_flag("--with-observed", o.with_observed, "Also write the observed rows (flag 0)");

  auto* export_cmd = app.add_subcommand("export-repr", "Export soft labels and representations");
  add_common(export_cmd, o);
  export_cmd->add_option("--model", o.model, "Checkpoint")->required();
  export_cmd->add_option("--out", o.out, "Output file (default stdout)");
  export_cmd->add_flag("--tail", o.tail, "Use the last observed points of every track");

  auto* plot_cmd = app.add_subcommand("plot", "Draw windows as an SVG");
  add_common(plot_cmd, o);
  plot_cmd->add_option("--model", o.model, "Checkpoint for predictions");
  plot_cmd->add_option("--baseline", o.baseline, "Baseline predictions (const-vel)");
  plot_cmd->add_option("--out", o.out, "SVG path (default stdout)");
  plot_cmd->add_option("--max-windows", o.max_windows, "Number of windows drawn")->check(CLI::PositiveNumber);
  plot_cmd->add_flag("--tail", o.tail, "Use the last observed points of every track");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, out, err);
    if (eval_cmd->parsed()) return cmd_eval(o, out);
    if (label_cmd->parsed()) return cmd_label(o, out, err);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (export_cmd->parsed()) return cmd_export(o, out);
    if (plot_cmd->parsed()) return cmd_plot(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace intent::cli
