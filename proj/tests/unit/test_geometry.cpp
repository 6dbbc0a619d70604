#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "intent/core/features.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace intent::core;
using intent::ShapeError;
namespace t = intent::testing;

namespace {

Trajectory line(std::initializer_list<std::pair<double, double>> pts, double dt) {
  Points<double> m(static_cast<Index>(pts.size()), 2);
  Index i = 0;
  for (auto [x, y] : pts) m.row(i++) << x, y;
  return {m, dt};
}

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("velocity sequence") {
  CHECK(velocity_sequence(line({{0, 0}, {0.4, 0}, {0.8, 0}}, 0.4), 3)
            .isApprox(Sequence<double>::Ones(3)));
  CHECK(velocity_sequence(line({{2, 3}, {2, 3}, {2, 3}, {2, 3}}, 0.1), 4).isZero(0));

  const auto v = velocity_sequence(line({{0, 0}, {3, 4}}, 1.0), 2);
  REQUIRE(v.size() == 2);
  CHECK(v(0) == doctest::Approx(5.0));
  CHECK(v(1) == v(0));

  CHECK_THROWS_AS(velocity_sequence(line({{0, 0}, {1, 1}}, 1.0), 3), ShapeError);
}

TEST_CASE("velocity sequence is invariant under rigid motion") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto traj = t::random_trajectory(rng, 12);
    const auto moved = t::rigid(traj, t::uniform(rng, 0, 6.3), t::uniform(rng, -9, 9),
                                t::uniform(rng, -9, 9));
    CHECK((velocity_sequence(traj, 12) - velocity_sequence(moved, 12)).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("radian sequence branches") {
  CHECK(radian_sequence(line({{0, 0}, {1, 0}}, 1), 2)(0) == 0.0);
  CHECK(radian_sequence(line({{0, 0}, {0, 1}}, 1), 2)(0) == doctest::Approx(kPi / 2));
  CHECK(radian_sequence(line({{1, 0}, {0, 0}}, 1), 2)(0) == doctest::Approx(-kPi));

  // stationary step carries the previous heading; a leading stationary step is 0
  const auto r = radian_sequence(line({{0, 0}, {0, 0}, {0, 1}, {0, 1}, {1, 1}}, 1), 5);
  CHECK(r(0) == 0.0);
  CHECK(r(1) == doctest::Approx(kPi / 2));
  CHECK(r(2) == doctest::Approx(kPi / 2));
  CHECK(r(3) == doctest::Approx(0.0));
  CHECK(r(4) == r(3));
}

TEST_CASE("radian sequence matches atan2 modulo 2 pi") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto traj = t::random_trajectory(rng, 10);
    const auto r = radian_sequence(traj, 10);
    for (Index k = 0; k + 1 < 10; ++k) {
      const Location<double> d = traj.at(k + 1) - traj.at(k);
      CHECK(r(k) >= -kPi);
      CHECK(r(k) <= kPi);
      const double diff = std::remainder(r(k) - std::atan2(d.y(), d.x()), 2 * kPi);
      CHECK(std::abs(diff) < 1e-9);
    }
  }
}

TEST_CASE("rotation radian") {
  auto p = rotation_params(line({{1, 1}, {1, 3}, {1, 5}}, 1), 3);
  CHECK(p.phi == doctest::Approx(kPi / 2));
  CHECK(p.flip_branch);
  CHECK(p.origin == Location<double>(1, 1));

  p = rotation_params(line({{0, 0}, {1, 0}}, 1), 2);
  CHECK(p.phi == 0.0);
  CHECK_FALSE(p.flip_branch);

  p = rotation_params(line({{0, 0}, {-1, 1}}, 1), 2);
  CHECK(p.phi == doctest::Approx(3 * kPi / 4));

  // degenerate chord: pure translation
  p = rotation_params(line({{2, 2}, {3, 3}, {2, 2}}, 1), 3);
  CHECK(p.phi == 0.0);
  CHECK_FALSE(p.flip_branch);
}

TEST_CASE("transform of a vertical line lands on the x axis") {
  Points<double> pts(6, 2);
  for (Index i = 0; i < 6; ++i) pts.row(i) << 0, static_cast<double>(i);
  const Trajectory traj(pts, 0.4);
  const auto out = transform(traj, rotation_params(traj, 6));

  // oracle: explicit rotation by -pi/2
  Eigen::Matrix2d rot;
  rot << 0, 1, -1, 0;
  for (Index i = 0; i < 6; ++i) {
    const Eigen::Vector2d expected = rot * traj.at(i);
    CHECK(std::abs(out.points(i, 0) - expected.x()) < 1e-12);
    CHECK(std::abs(out.points(i, 1) - expected.y()) < 1e-12);
    CHECK(out.points(i, 0) == doctest::Approx(static_cast<double>(i)));
  }
}

TEST_CASE("transform agrees with an atan2 rotation oracle") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const Index n = 20, t_obs = 8;
    const auto traj = t::random_trajectory(rng, n);
    const auto params = rotation_params(traj, t_obs);
    const auto out = transform(traj, params);
    const auto expected = intent::oracle::atan2_canonical(intent::oracle::to_pts(traj.points), t_obs);
    for (Index k = 0; k < n; ++k) {
      CHECK(std::abs(out.points(k, 0) - expected[k].x) < 1e-9);
      CHECK(std::abs(out.points(k, 1) - expected[k].y) < 1e-9);
    }
    CHECK(out.points(0, 0) == 0.0);
    CHECK(out.points(0, 1) == 0.0);
    CHECK(std::abs(out.points(t_obs - 1, 1)) < 1e-9);
    CHECK(out.points(t_obs - 1, 0) >= -1e-9);
  }
}

TEST_CASE("inverse transform") {
  std::mt19937_64 rng(23);
  TransformParams identity;
  const auto traj = t::random_trajectory(rng, 7);
  CHECK(inverse_transform(traj, identity).points == traj.points);
  CHECK(transform(traj, identity).points == traj.points);

  for (int i = 0; i < 500; ++i) {
    const auto tr = t::random_trajectory(rng, 15);
    TransformParams p;
    p.phi = t::uniform(rng, 0, kPi);
    p.origin = Location<double>(t::uniform(rng, -5, 5), t::uniform(rng, -5, 5));
    p.flip_branch = t::uniform(rng, 0, 1) < 0.5;

    // oracle: build the forward map from the x^c/x^s/y^c/y^s terms and invert it
    const double c = std::cos(p.phi), s = std::sin(p.phi);
    Eigen::Matrix2d fwd;
    if (p.flip_branch) fwd << c, s, -s, c;
    else fwd << c, -s, s, c;
    const Eigen::Matrix2d inv = fwd.inverse();

    const auto round = inverse_transform(transform(tr, p), p);
    const auto back = inverse_transform(tr, p);
    for (Index k = 0; k < tr.size(); ++k) {
      CHECK((round.at(k) - tr.at(k)).cwiseAbs().maxCoeff() < 1e-9);
      const Eigen::Vector2d expected = inv * tr.at(k) + p.origin;
      CHECK((back.at(k) - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("trend count") {
  CHECK(trend_count(Sequence<double>((Sequence<double>(4) << 1, 2, 3, 4).finished())) == 0);
  CHECK(trend_count(Sequence<double>((Sequence<double>(4) << 4, 3, 2, 1).finished())) == 3);
  const Sequence<double> s = (Sequence<double>(5) << 1, 1, 0, 2, 0).finished();
  CHECK(trend_count(s) == 2);
  CHECK(trend_count(-s) == 1);
  CHECK_THROWS_AS(trend_count(Sequence<double>::Zero(1)), ShapeError);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    Sequence<double> r(12);
    for (Index k = 0; k < 12; ++k) r(k) = std::floor(t::uniform(rng, 0, 4));
    Index ties = 0;
    for (Index k = 1; k < 12; ++k) ties += r(k) == r(k - 1);
    CHECK(trend_count(r) + trend_count(-r) == 11 - ties);
  }
}

TEST_CASE("intention labels on worked cases") {
  const LabelingThresholds th;
  const auto z = Sequence<double>::Zero(20);

  CHECK(assign_intention_label<double>(z, z, Sequence<double>::Constant(20, 0.005), z, th) ==
        Intention::Static);

  Sequence<double> x = Sequence<double>::LinSpaced(20, 0, 7.6);
  CHECK(assign_intention_label<double>(x, z, Sequence<double>::Ones(20), z, th) ==
        Intention::Straight);

  const Sequence<double> y = Sequence<double>::LinSpaced(20, 0, 1.0);
  const Sequence<double> r = Sequence<double>::LinSpaced(20, 0, 0.5);
  CHECK(assign_intention_label<double>(x, y, Sequence<double>::Constant(20, 0.15), r, th) ==
        Intention::Left);
  CHECK(assign_intention_label<double>(x, (-y).eval(), Sequence<double>::Constant(20, 0.15),
                                       (-r).eval(), th) == Intention::Right);

  // backwards motion in the canonical frame is not labeled
  const Sequence<double> back = Sequence<double>::LinSpaced(20, 7.6, 0);
  CHECK(assign_intention_label<double>(back, y, Sequence<double>::Constant(20, 0.15), r, th) ==
        Intention::Unlabeled);
}

TEST_CASE("labeling is deterministic and agrees with the line-by-line oracle") {
  const LabelingThresholds th;
  std::mt19937_64 rng(99);
  const t::ClassGenerator gen;
  for (int i = 0; i < 2000; ++i) {
    const auto cls = static_cast<Intention>(i % 5);
    const auto traj = gen(cls, rng);
    const auto label = label_trajectory(traj, 8, th);
    CHECK(label == label_trajectory(traj, 8, th));
    CHECK(label == intent::oracle::label(traj, 8, th));
  }
}

TEST_CASE("thresholds validation") {
  LabelingThresholds th;
  CHECK_NOTHROW(th.validate());
  th.v_lr = 0.5;
  CHECK_THROWS_AS(th.validate(), intent::ConfigError);
  th = {};
  th.thresh_y = -1;
  CHECK_THROWS_AS(th.validate(), intent::ConfigError);
  CHECK(intention_from_string("left") == Intention::Left);
  CHECK_FALSE(intention_from_string("up").has_value());
}

TEST_CASE("feature extraction") {
  std::mt19937_64 rng(8);
  const auto traj = t::random_trajectory(rng, 20);
  const auto window = make_window(traj, 8);

  const auto train = extract_observation_features(window, LabelingThresholds{});
  CHECK(train.features.length() == 8);
  CHECK(train.features.radians.size() == 8);
  CHECK(train.features.transformed_y.size() == 8);
  CHECK(train.features.last_location == traj.at(7));
  CHECK(train.label.has_value());
  CHECK(std::abs(train.features.transformed_y(7)) < 1e-9);

  auto eval_window = window;
  eval_window.future = {};
  const auto eval = extract_observation_features(eval_window, LabelingThresholds{});
  CHECK_FALSE(eval.label.has_value());
  CHECK(eval.features.velocities == train.features.velocities);

  Points<double> still = Points<double>::Constant(20, 2, 3.0);
  const auto fs = extract_observation_features(make_window(Trajectory(still, 0.4), 8),
                                               LabelingThresholds{});
  CHECK(fs.features.velocities.isZero(0));
  CHECK(fs.features.transformed_y.isZero(0));
  CHECK(fs.label == Intention::Static);
}

TEST_CASE("class generator produces its own label") {
  const LabelingThresholds th;
  std::mt19937_64 rng(31);
  const t::ClassGenerator gen;
  for (int c = 0; c < kNumIntentions; ++c) {
    const auto cls = static_cast<Intention>(c);
    int hits = 0;
    for (int i = 0; i < 1000; ++i) hits += label_trajectory(gen(cls, rng), 8, th) == cls;
    CAPTURE(to_string(cls));
    CHECK(hits == 1000);
  }
}
