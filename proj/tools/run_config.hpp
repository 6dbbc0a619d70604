#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "intent/config.hpp"
#include "intent/data/dataset.hpp"
#include "intent/model/config.hpp"
#include "intent/train/training.hpp"

namespace intent::cli {

/// Everything a subcommand can be configured with. Values are layered:
/// built-in defaults, then a config file, then command-line flags.
struct RunConfig {
  model::ModelConfig model;
  train::TrainingConfig training;
  core::LabelingThresholds labeling;
  data::DatasetKind dataset = data::DatasetKind::EthUcy;
  std::string scene;
  double horizon = 4.0;  // seconds, KITTI only
  core::Index stride = 1;

  /// Throws ConfigError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  void apply(const std::vector<ConfigEntry>& entries, const std::string& source);
  void load_file(const std::string& path);

  /// Window lengths: dataset conventions unless t_obs / t_pred were given.
  data::WindowConfig window_config() const;
  /// Copies the resolved window lengths into the model config and validates.
  void resolve();

  std::vector<std::pair<std::string, std::string>> to_entries() const;

 private:
  std::set<std::string> explicit_;
};

}  // namespace intent::cli
