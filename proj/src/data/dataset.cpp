#include "intent/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "intent/config.hpp"
#include "intent/errors.hpp"

namespace intent::data {

namespace fs = std::filesystem;

std::string to_string(Unit u) { return u == Unit::Meters ? "meters" : "pixels"; }

Unit unit_from_string(const std::string& s) {
  if (s == "meters" || s == "m") return Unit::Meters;
  if (s == "pixels" || s == "px") return Unit::Pixels;
  throw ConfigError("unknown unit '" + s + "' (expected meters or pixels)");
}

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::EthUcy: return "ethucy";
    case DatasetKind::Sdd: return "sdd";
    case DatasetKind::Kitti: return "kitti";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "ethucy" || s == "eth-ucy") return DatasetKind::EthUcy;
  if (s == "sdd") return DatasetKind::Sdd;
  if (s == "kitti") return DatasetKind::Kitti;
  throw ConfigError("unknown dataset kind '" + s + "' (expected ethucy, sdd or kitti)");
}

namespace {

bool parse_field(std::string_view tok, double& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_integral(std::string_view tok, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec == std::errc() && ptr == tok.data() + tok.size()) return true;
  double d = 0;
  if (!parse_field(tok, d) || d != std::floor(d) || std::abs(d) > 9e15) return false;
  out = static_cast<std::int64_t>(d);
  return true;
}

}  // namespace

RawScene parse_trajectory_stream(std::istream& in, const std::string& source, Unit unit, double dt,
                                 std::string name) {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  RawScene scene;
  scene.name = std::move(name);
  scene.dt = dt;
  scene.unit = unit;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(std::move(t));
    if (tok.empty()) continue;
    const auto fail = [&](const std::string& why) {
      return ParseError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    if (tok.size() != 4) throw fail("expected 4 columns, got " + std::to_string(tok.size()));
    Record r;
    if (!parse_integral(tok[0], r.frame)) throw fail("bad frame '" + tok[0] + "'");
    if (!parse_integral(tok[1], r.agent_id)) throw fail("bad agent id '" + tok[1] + "'");
    if (!parse_field(tok[2], r.x)) throw fail("bad x '" + tok[2] + "'");
    if (!parse_field(tok[3], r.y)) throw fail("bad y '" + tok[3] + "'");
    if (!seen.insert({r.frame, r.agent_id}).second) {
      throw fail("duplicate record for frame " + std::to_string(r.frame) + ", agent " + std::to_string(r.agent_id));
    }
    scene.records.push_back(r);
  }
  return scene;
}

RawScene parse_trajectory_file(const std::string& path, Unit unit, double dt, std::string name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path + "'");
  if (name.empty()) name = fs::path(path).stem().string();
  return parse_trajectory_stream(in, path, unit, dt, std::move(name));
}

void write_scene(std::ostream& out, const RawScene& scene) {
  for (const auto& r : scene.records) {
    out << r.frame << '\t' << r.agent_id << '\t' << format_double(r.x) << '\t' << format_double(r.y) << '\n';
  }
}

namespace {

std::map<std::int64_t, std::vector<Record>> by_agent(const RawScene& scene) {
  std::map<std::int64_t, std::vector<Record>> agents;
  for (const auto& r : scene.records) agents[r.agent_id].push_back(r);
  for (auto& [_, recs] : agents) {
    std::sort(recs.begin(), recs.end(), [](const Record& a, const Record& b) { return a.frame < b.frame; });
  }
  return agents;
}

}  // namespace

std::int64_t frame_step(const RawScene& scene) {
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& [_, recs] : by_agent(scene)) {
    for (std::size_t i = 1; i < recs.size(); ++i) ++counts[recs[i].frame - recs[i - 1].frame];
  }
  std::int64_t best = 1;
  std::size_t best_count = 0;
  for (const auto& [diff, n] : counts) {
    if (n > best_count) {
      best = diff;
      best_count = n;
    }
  }
  return best;
}

std::vector<Track> tracks(const RawScene& scene) {
  const std::int64_t step = frame_step(scene);
  std::vector<Track> out;
  for (const auto& [agent, recs] : by_agent(scene)) {
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= recs.size(); ++i) {
      if (i < recs.size() && recs[i].frame - recs[i - 1].frame == step) continue;
      Track t{agent, recs[begin].frame, core::Points<double>(static_cast<Index>(i - begin), 2)};
      for (std::size_t k = begin; k < i; ++k) t.points.row(static_cast<Index>(k - begin)) << recs[k].x, recs[k].y;
      out.push_back(std::move(t));
      begin = i;
    }
  }
  return out;
}

void WindowConfig::validate() const {
  if (t_obs < 2) throw ConfigError("t_obs must be at least 2");
  if (t_pred < 1) throw ConfigError("t_pred must be at least 1");
  if (stride < 1) throw ConfigError("stride must be at least 1");
}

std::vector<TrajectoryWindow> build_windows(const RawScene& scene, const WindowConfig& config) {
  config.validate();
  const std::int64_t step = frame_step(scene);
  const Index len = config.t_obs + config.t_pred;
  std::vector<TrajectoryWindow> out;
  for (const auto& track : tracks(scene)) {
    for (Index s = 0; s + len <= track.points.rows(); s += config.stride) {
      TrajectoryWindow w;
      w.observation = {track.points.middleRows(s, config.t_obs), scene.dt};
      w.future = {track.points.middleRows(s + config.t_obs, config.t_pred), scene.dt};
      w.agent_id = track.agent_id;
      w.scene_id = scene.name;
      w.start_frame = track.first_frame + s * step;
      out.push_back(std::move(w));
    }
  }
  return out;
}

Split leave_one_out_split(std::span<const RawScene> scenes, const std::string& held_out,
                          const WindowConfig& config) {
  const bool known = std::any_of(scenes.begin(), scenes.end(), [&](const RawScene& s) { return s.name == held_out; });
  if (!known) throw ConfigError("unknown scene '" + held_out + "'");
  if (scenes.size() < 2) throw ConfigError("leave-one-out needs at least two scenes");
  Split split;
  for (const auto& s : scenes) {
    auto w = build_windows(s, config);
    auto& dst = s.name == held_out ? split.test : split.train;
    dst.insert(dst.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return split;
}

double default_dt(DatasetKind kind) { return kind == DatasetKind::Kitti ? 0.1 : 0.4; }

WindowConfig default_window_config(DatasetKind kind, double horizon_seconds) {
  if (kind != DatasetKind::Kitti) return {8, 12, 1};
  const double steps = horizon_seconds * 10.0;
  if (!(steps >= 1) || steps != std::round(steps)) throw ConfigError("KITTI horizon must be a multiple of 0.1 s");
  return {20, static_cast<Index>(steps), 1};
}

const RawScene& Dataset::scene(const std::string& name) const {
  for (const auto& s : scenes) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown scene '" + name + "'");
}

std::vector<std::string> Dataset::scene_names() const {
  std::vector<std::string> out;
  for (const auto& s : scenes) out.push_back(s.name);
  return out;
}

std::vector<TrajectoryWindow> Dataset::all_windows() const {
  std::vector<TrajectoryWindow> out;
  for (const auto& s : scenes) {
    auto w = build_windows(s, windows);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

Dataset load_dataset(DatasetKind kind, const std::string& root, const std::optional<WindowConfig>& windows) {
  if (!fs::is_directory(root)) throw IoError("dataset root '" + root + "' is not a directory");
  Dataset ds;
  ds.kind = kind;
  ds.root = root;
  ds.dt = default_dt(kind);
  ds.unit = kind == DatasetKind::Sdd ? Unit::Pixels : Unit::Meters;
  ds.windows = windows.value_or(default_window_config(kind));
  ds.windows.validate();

  std::map<std::string, fs::path> files;
  const fs::path manifest = fs::path(root) / kManifestName;
  if (fs::exists(manifest)) {
    bool unit_set = false;
    for (const auto& e : parse_config_file(manifest.string())) {
      if (e.key == "dt") {
        const double dt = parse_double(e.key, e.value);
        if (std::abs(dt - default_dt(kind)) > 1e-9) {
          throw ConfigError(manifest.string() + ": dt=" + e.value + " does not match " + to_string(kind) +
                            " (" + format_double(default_dt(kind)) + " s)");
        }
        ds.dt = dt;
      } else if (e.key == "unit") {
        ds.unit = unit_from_string(e.value);
        unit_set = true;
      } else if (e.key.rfind("scene.", 0) == 0 && e.key.size() > 6) {
        files[e.key.substr(6)] = fs::path(root) / e.value;
      } else {
        throw ConfigError(manifest.string() + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
      }
    }
    if (unit_set && kind != DatasetKind::Sdd && ds.unit != Unit::Meters) {
      throw ConfigError(to_string(kind) + " coordinates must be in meters, manifest declares " + to_string(ds.unit));
    }
    for (const auto& [name, path] : files) {
      if (!fs::exists(path)) throw IoError("scene file '" + path.string() + "' listed in manifest does not exist");
    }
  } else {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files[entry.path().stem().string()] = entry.path();
      }
    }
  }
  if (files.empty()) throw IoError("no scene files found in '" + root + "'");
  for (const auto& [name, path] : files) {
    ds.scenes.push_back(parse_trajectory_file(path.string(), ds.unit, ds.dt, name));
  }
  return ds;
}

}  // namespace intent::data
