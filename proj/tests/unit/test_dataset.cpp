#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "intent/data/dataset.hpp"
#include "intent/errors.hpp"

using namespace intent;
using namespace intent::data;
namespace fs = std::filesystem;

namespace {

RawScene parse(const std::string& text, const std::string& name = "s") {
  std::istringstream in(text);
  return parse_trajectory_stream(in, "<test>", Unit::Meters, 0.4, name);
}

// One agent, `n` consecutive frames spaced by 10, moving along x.
std::string track_text(int agent, int n, int first_frame = 0) {
  std::ostringstream out;
  for (int i = 0; i < n; ++i) out << first_frame + 10 * i << ' ' << agent << ' ' << 0.5 * i << ' ' << agent << '\n';
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("intent_ds_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

}  // namespace

TEST_CASE("parse four-column files") {
  const auto s = parse("0 1 1.5 2.5\n10\t1\t1.75  2.0\n# comment\n\n10.0 2.0 -3 4e-1  # trailing\n");
  REQUIRE(s.records.size() == 3);
  CHECK(s.records[2] == Record{10, 2, -3.0, 0.4});
  CHECK(s.records[1].x == 1.75);

  CHECK_THROWS_WITH_AS(parse("0 1 1 1\na b c d\n"), doctest::Contains("<test>:2"), ParseError);
  CHECK_THROWS_WITH_AS(parse("0 1 1\n"), doctest::Contains("4 columns"), ParseError);
  CHECK_THROWS_WITH_AS(parse("1.5 1 1 1\n"), doctest::Contains("frame"), ParseError);
  CHECK_THROWS_WITH_AS(parse("0 1 nan 1\n"), doctest::Contains("bad x"), ParseError);
  CHECK_THROWS_WITH_AS(parse("0 1 1 1\n0 1 2 2\n"), doctest::Contains("duplicate"), ParseError);
  CHECK_THROWS_AS(parse_trajectory_file("/nonexistent/file.txt", Unit::Meters, 0.4), IoError);
}

TEST_CASE("write and re-parse round trip") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  RawScene s;
  for (int i = 0; i < 500; ++i) s.records.push_back({i / 7, i % 7, u(rng), u(rng) * 1e-7});
  std::stringstream ss;
  write_scene(ss, s);
  const auto back = parse_trajectory_stream(ss, "<rt>", Unit::Meters, 0.4);
  CHECK(back.records == s.records);
}

TEST_CASE("frame step and gap splitting") {
  const auto s = parse(track_text(1, 5) + track_text(2, 3, 100));
  CHECK(frame_step(s) == 10);
  CHECK(tracks(s).size() == 2);
  // Agent 3 with a gap between frame 20 and 60.
  const auto g = parse("0 3 0 0\n10 3 1 0\n20 3 2 0\n60 3 3 0\n70 3 4 0\n");
  const auto t = tracks(g);
  REQUIRE(t.size() == 2);
  CHECK(t[0].points.rows() == 3);
  CHECK(t[1].first_frame == 60);
  CHECK(t[1].points(1, 0) == 4.0);
  // Unsorted input is ordered by frame within the agent.
  const auto shuffled = parse("20 1 2 0\n0 1 0 0\n10 1 1 0\n");
  REQUIRE(tracks(shuffled).size() == 1);
  CHECK(tracks(shuffled)[0].points(2, 0) == 2.0);
}

TEST_CASE("window counts") {
  const WindowConfig cfg{8, 12, 1};
  CHECK(build_windows(parse(track_text(1, 20)), cfg).size() == 1);
  CHECK(build_windows(parse(track_text(1, 21)), cfg).size() == 2);
  CHECK(build_windows(parse(track_text(1, 19)), cfg).empty());
  CHECK(build_windows(parse(track_text(1, 30)), WindowConfig{8, 12, 5}).size() == 3);
  CHECK_THROWS_AS(build_windows(parse(track_text(1, 30)), WindowConfig{1, 12, 1}), ConfigError);
  CHECK_THROWS_AS(build_windows(parse(track_text(1, 30)), WindowConfig{8, 12, 0}), ConfigError);

  const auto s = parse(track_text(2, 22) + track_text(1, 25, 500), "zara");
  const auto w = build_windows(s, cfg);
  REQUIRE(w.size() == 9);
  for (const auto& x : w) {
    CHECK(x.observation.size() == 8);
    CHECK(x.future.size() == 12);
    CHECK(x.scene_id == "zara");
  }
  // Ordered by agent then start frame.
  CHECK(w[0].agent_id == 1);
  CHECK(w[0].start_frame == 500);
  CHECK(w[1].start_frame == 510);
  CHECK(w[6].agent_id == 2);
  CHECK(w[6].observation.at(0).x() == 0.0);
  CHECK(w[7].observation.at(0).x() == 0.5);
  CHECK(w[7].future.at(0).x() == 0.5 * 9);
}

TEST_CASE("leave-one-out split") {
  std::vector<RawScene> scenes;
  int n = 20;
  for (const char* name : {"eth", "hotel", "univ", "zara1", "zara2"}) scenes.push_back(parse(track_text(1, n++), name));
  const WindowConfig cfg;
  const auto split = leave_one_out_split(scenes, "zara1", cfg);
  CHECK(split.test.size() == 4);
  CHECK(split.train.size() == 1 + 2 + 3 + 5);
  for (const auto& w : split.train) CHECK(w.scene_id != "zara1");
  for (const auto& w : split.test) CHECK(w.scene_id == "zara1");
  std::size_t total = 0;
  for (const auto& s : scenes) total += build_windows(s, cfg).size();
  CHECK(split.train.size() + split.test.size() == total);
  CHECK_THROWS_AS(leave_one_out_split(scenes, "nowhere", cfg), ConfigError);
  CHECK_THROWS_AS(leave_one_out_split(std::span(scenes).first(1), "eth", cfg), ConfigError);
}

TEST_CASE("default window configs") {
  const auto k = default_window_config(DatasetKind::Kitti, 4.0);
  CHECK(k.t_obs == 20);
  CHECK(k.t_pred == 40);
  CHECK(default_window_config(DatasetKind::Kitti, 1.0).t_pred == 10);
  const auto e = default_window_config(DatasetKind::EthUcy);
  CHECK(e.t_obs == 8);
  CHECK(e.t_pred == 12);
  CHECK(default_dt(DatasetKind::Kitti) == 0.1);
  CHECK(default_dt(DatasetKind::Sdd) == 0.4);
  CHECK(dataset_kind_from_string("kitti") == DatasetKind::Kitti);
  CHECK_THROWS_AS(dataset_kind_from_string("nuscenes"), ConfigError);
}

TEST_CASE("load_dataset from a directory") {
  TempDir dir;
  CHECK_THROWS_AS(load_dataset(DatasetKind::EthUcy, dir.path.string()), IoError);
  CHECK_THROWS_AS(load_dataset(DatasetKind::EthUcy, (dir.path / "missing").string()), IoError);

  dir.write("b.txt", track_text(1, 21));
  dir.write("a.txt", track_text(4, 20));
  dir.write("notes.md", "ignored");
  const auto ds = load_dataset(DatasetKind::EthUcy, dir.path.string());
  CHECK(ds.scene_names() == std::vector<std::string>{"a", "b"});
  CHECK(ds.all_windows().size() == 3);
  CHECK(ds.split("a").test.size() == 1);

  dir.write(kManifestName, "dt=0.4\nunit=meters\nscene.first=b.txt\n");
  const auto m = load_dataset(DatasetKind::EthUcy, dir.path.string());
  CHECK(m.scene_names() == std::vector<std::string>{"first"});

  dir.write(kManifestName, "dt=0.1\nscene.first=b.txt\n");
  CHECK_THROWS_AS(load_dataset(DatasetKind::EthUcy, dir.path.string()), ConfigError);
  dir.write(kManifestName, "unit=pixels\nscene.first=b.txt\n");
  CHECK_THROWS_AS(load_dataset(DatasetKind::EthUcy, dir.path.string()), ConfigError);
  CHECK(load_dataset(DatasetKind::Sdd, dir.path.string()).unit == Unit::Pixels);
  dir.write(kManifestName, "scene.first=absent.txt\n");
  CHECK_THROWS_AS(load_dataset(DatasetKind::EthUcy, dir.path.string()), IoError);
  dir.write(kManifestName, "colour=blue\n");
  CHECK_THROWS_AS(load_dataset(DatasetKind::EthUcy, dir.path.string()), ConfigError);
}
