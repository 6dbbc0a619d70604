#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "intent/errors.hpp"

namespace intent::core {

using Index = Eigen::Index;

template <typename Scalar>
using Location = Eigen::Matrix<Scalar, 2, 1>;

/// n x 2 matrix, one location per row.
template <typename Scalar>
using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

template <typename Scalar>
using Sequence = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniformly sampled sequence of 2D locations.
template <typename Scalar>
struct BasicTrajectory {
  Points<Scalar> points;
  Scalar dt{Scalar(0.4)};

  BasicTrajectory() = default;
  BasicTrajectory(Points<Scalar> pts, Scalar step) : points(std::move(pts)), dt(step) {}

  Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
  Location<Scalar> at(Index i) const { return points.row(i).transpose(); }
  Location<Scalar> front() const { return at(0); }
  Location<Scalar> back() const { return at(size() - 1); }

  /// First `count` points, sharing dt.
  BasicTrajectory head(Index count) const { return {points.topRows(count), dt}; }
  BasicTrajectory tail(Index count) const { return {points.bottomRows(count), dt}; }

  bool is_finite() const { return points.allFinite() && std::isfinite(dt); }
};

using Trajectory = BasicTrajectory<double>;

/// Throws ShapeError unless the trajectory has at least `min_points` finite points and dt > 0.
template <typename Scalar>
void validate(const BasicTrajectory<Scalar>& traj, Index min_points = 2) {
  if (traj.size() < min_points) {
    throw ShapeError("trajectory has " + std::to_string(traj.size()) + " points, need at least " +
                     std::to_string(min_points));
  }
  if (!(traj.dt > Scalar(0))) throw ShapeError("trajectory dt must be positive");
  if (!traj.is_finite()) throw ShapeError("trajectory contains non-finite values");
}

/// Observation followed (in time) by an optional future segment.
template <typename Scalar>
struct BasicTrajectoryWindow {
  BasicTrajectory<Scalar> observation;
  BasicTrajectory<Scalar> future;  // empty at inference
  std::int64_t agent_id{0};
  std::string scene_id;
  std::int64_t start_frame{0};

  bool has_future() const { return !future.empty(); }

  /// Observation and future concatenated.
  BasicTrajectory<Scalar> complete() const {
    Points<Scalar> pts(observation.size() + future.size(), 2);
    pts.topRows(observation.size()) = observation.points;
    if (has_future()) pts.bottomRows(future.size()) = future.points;
    return {std::move(pts), observation.dt};
  }
};

using TrajectoryWindow = BasicTrajectoryWindow<double>;

/// Splits a complete trajectory into a window with `t_obs` observed points.
template <typename Scalar>
BasicTrajectoryWindow<Scalar> make_window(const BasicTrajectory<Scalar>& traj, Index t_obs) {
  if (t_obs < 2 || t_obs > traj.size()) throw ShapeError("invalid observation length");
  BasicTrajectoryWindow<Scalar> w;
  w.observation = traj.head(t_obs);
  if (traj.size() > t_obs) w.future = traj.tail(traj.size() - t_obs);
  else w.future.dt = traj.dt;
  return w;
}

}  // namespace intent::core
