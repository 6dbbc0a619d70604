#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intent/core/trajectory.hpp"

namespace intent::data {

using core::Index;
using core::TrajectoryWindow;

enum class Unit { Meters, Pixels };

std::string to_string(Unit u);
Unit unit_from_string(const std::string& s);

struct Record {
  std::int64_t frame = 0;
  std::int64_t agent_id = 0;
  double x = 0;
  double y = 0;

  friend bool operator==(const Record&, const Record&) = default;
};

/// All records of one scene, in file order.
struct RawScene {
  std::string name;
  std::vector<Record> records;
  double dt = 0.4;
  Unit unit = Unit::Meters;
};

/// Parses the four-column text format: frame, agent id, x, y separated by
/// spaces or tabs; '#' starts a comment. Frame and id may be written as
/// integral decimals ("10.0"). Throws ParseError naming the line for bad
/// rows or a duplicate (frame, agent) pair.
RawScene parse_trajectory_stream(std::istream& in, const std::string& source, Unit unit, double dt,
                                 std::string name = {});
/// Throws IoError if the file cannot be read.
RawScene parse_trajectory_file(const std::string& path, Unit unit, double dt, std::string name = {});

/// Writes records in the four-column format; parsing the output gives back
/// the same records.
void write_scene(std::ostream& out, const RawScene& scene);

/// Frame spacing of the scene: the most common positive difference between
/// consecutive frames of the same agent (smallest on ties). 1 if undefined.
std::int64_t frame_step(const RawScene& scene);

/// Maximal runs of one agent sampled at exactly the scene's frame step.
struct Track {
  std::int64_t agent_id = 0;
  std::int64_t first_frame = 0;
  core::Points<double> points;
};

/// Tracks ordered by agent id then first frame. Gaps split an agent.
std::vector<Track> tracks(const RawScene& scene);

struct WindowConfig {
  Index t_obs = 8;
  Index t_pred = 12;
  Index stride = 1;

  /// Throws ConfigError unless t_obs >= 2, t_pred >= 1 and stride >= 1.
  void validate() const;
};

/// Sliding windows of t_obs + t_pred points over every long-enough track,
/// ordered by agent then start frame.
std::vector<TrajectoryWindow> build_windows(const RawScene& scene, const WindowConfig& config);

struct Split {
  std::vector<TrajectoryWindow> train;
  std::vector<TrajectoryWindow> test;
};

/// Test windows come from `held_out`, training windows from every other
/// scene. Throws ConfigError for an unknown name or an empty training side.
Split leave_one_out_split(std::span<const RawScene> scenes, const std::string& held_out,
                          const WindowConfig& config);

enum class DatasetKind { EthUcy, Sdd, Kitti };

std::string to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& s);

/// Window lengths and sampling interval conventional for each benchmark.
/// KITTI observes 20 steps (2 s) and predicts 10 steps per second of horizon.
WindowConfig default_window_config(DatasetKind kind, double horizon_seconds = 4.0);
double default_dt(DatasetKind kind);

struct Dataset {
  DatasetKind kind = DatasetKind::EthUcy;
  std::string root;
  double dt = 0.4;
  Unit unit = Unit::Meters;
  WindowConfig windows;
  std::vector<RawScene> scenes;  // ordered by name

  const RawScene& scene(const std::string& name) const;
  std::vector<std::string> scene_names() const;
  std::vector<TrajectoryWindow> all_windows() const;
  Split split(const std::string& held_out) const { return leave_one_out_split(scenes, held_out, windows); }
};

/// Loads a dataset root. With a `dataset.cfg` manifest (keys dt, unit and
/// scene.<name>=<relative path>) the listed files are read; otherwise every
/// *.txt file in the directory becomes a scene named after its stem. Throws
/// IoError when no scene file exists and ConfigError when the declared unit
/// or dt contradicts the dataset kind.
Dataset load_dataset(DatasetKind kind, const std::string& root,
                     const std::optional<WindowConfig>& windows = std::nullopt);

inline constexpr const char* kManifestName = "dataset.cfg";

}  // namespace intent::data
