#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "intent/core/trajectory.hpp"

namespace intent::core {

/// Per-step speed over the first `t_obs` points. The last element repeats the
/// one before it, since there is no successor to difference against.
template <typename Scalar>
Sequence<Scalar> velocity_sequence(const BasicTrajectory<Scalar>& traj, Index t_obs) {
  if (t_obs < 2) throw ShapeError("velocity sequence needs t_obs >= 2");
  validate(traj, t_obs);
  const auto pts = traj.points.topRows(t_obs);
  Sequence<Scalar> v(t_obs);
  v.head(t_obs - 1) =
      (pts.bottomRows(t_obs - 1) - pts.topRows(t_obs - 1)).rowwise().norm() / traj.dt;
  v(t_obs - 1) = v(t_obs - 2);
  return v;
}

/// Heading of the step `from -> to` by the arcsin case analysis. Agrees with
/// atan2(dy, dx) except that motion along -x yields -pi rather than +pi.
/// Returns false for a zero-length step.
template <typename Scalar>
bool step_heading(const Location<Scalar>& from, const Location<Scalar>& to, Scalar& out) {
  const Location<Scalar> d = to - from;
  const Scalar len = d.norm();
  if (!(len > Scalar(0))) return false;
  const Scalar rad = std::asin(std::clamp(d.y() / len, Scalar(-1), Scalar(1)));
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (to.x() > from.x()) out = rad;
  else if (to.y() > from.y()) out = pi - rad;
  else out = -rad - pi;
  return true;
}

/// Per-step heading in [-pi, pi] over the first `t_obs` points. Stationary
/// steps carry the previous heading forward (0 for the first step).
template <typename Scalar>
Sequence<Scalar> radian_sequence(const BasicTrajectory<Scalar>& traj, Index t_obs) {
  if (t_obs < 2) throw ShapeError("radian sequence needs t_obs >= 2");
  validate(traj, t_obs);
  Sequence<Scalar> r(t_obs);
  Scalar prev(0);
  for (Index t = 0; t + 1 < t_obs; ++t) {
    Scalar h;
    if (step_heading<Scalar>(traj.at(t), traj.at(t + 1), h)) prev = h;
    r(t) = prev;
  }
  r(t_obs - 1) = r(t_obs - 2);
  return r;
}

/// Rotation that puts the observation chord L_1 -> L_{t_obs} on the +x axis.
template <typename Scalar>
struct BasicTransformParams {
  Scalar phi{0};                   // in [0, pi]
  Location<Scalar> origin{Location<Scalar>::Zero()};
  bool flip_branch{false};         // chord has positive dy: rotate by -phi

  /// 2x2 linear part mapping (L - origin) into the canonical frame.
  Eigen::Matrix<Scalar, 2, 2> linear() const {
    const Scalar c = std::cos(phi), s = std::sin(phi);
    Eigen::Matrix<Scalar, 2, 2> m;
    if (flip_branch) m << c, s, -s, c;
    else m << c, -s, s, c;
    return m;
  }
};

using TransformParams = BasicTransformParams<double>;

template <typename Scalar>
BasicTransformParams<Scalar> rotation_params(const BasicTrajectory<Scalar>& traj, Index t_obs) {
  validate(traj, std::max<Index>(t_obs, 1));
  BasicTransformParams<Scalar> p;
  p.origin = traj.front();
  const Location<Scalar> d = traj.at(t_obs - 1) - p.origin;
  if (d.x() == Scalar(0) && d.y() == Scalar(0)) return p;  // static: translation only
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (d.x() == Scalar(0)) {
    p.phi = pi / 2;
  } else {
    const Scalar a = std::abs(std::atan(d.y() / d.x()));
    p.phi = d.x() > Scalar(0) ? a : pi - a;
  }
  p.flip_branch = d.y() > Scalar(0);
  return p;
}

template <typename Scalar>
Points<Scalar> transform_points(const Points<Scalar>& pts, const BasicTransformParams<Scalar>& p) {
  return (pts.rowwise() - p.origin.transpose()) * p.linear().transpose();
}

/// Exact inverse of transform_points: the linear part is orthogonal.
template <typename Scalar>
Points<Scalar> inverse_transform_points(const Points<Scalar>& pts,
                                        const BasicTransformParams<Scalar>& p) {
  return (pts * p.linear()).rowwise() + p.origin.transpose();
}

template <typename Scalar>
BasicTrajectory<Scalar> transform(const BasicTrajectory<Scalar>& traj,
                                  const BasicTransformParams<Scalar>& p) {
  return {transform_points(traj.points, p), traj.dt};
}

template <typename Scalar>
BasicTrajectory<Scalar> inverse_transform(const BasicTrajectory<Scalar>& traj,
                                          const BasicTransformParams<Scalar>& p) {
  return {inverse_transform_points(traj.points, p), traj.dt};
}

/// Number of strict decreases between consecutive elements.
template <typename Derived>
Index trend_count(const Eigen::DenseBase<Derived>& seq) {
  const Index n = seq.size();
  if (n < 2) throw ShapeError("trend count needs at least 2 elements");
  const auto& s = seq.derived();
  Index count = 0;
  for (Index i = 1; i < n; ++i) {
    if (s(i) - s(i - 1) < 0) ++count;
  }
  return count;
}

}  // namespace intent::core
