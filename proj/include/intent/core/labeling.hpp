#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "intent/core/geometry.hpp"

namespace intent::core {

/// Intention classes. The first four double as class indices in model outputs.
enum class Intention : int { Straight = 0, Left = 1, Right = 2, Static = 3, Unlabeled = 4 };

inline constexpr int kNumIntentions = 4;

constexpr std::string_view to_string(Intention i) {
  switch (i) {
    case Intention::Straight: return "straight";
    case Intention::Left: return "left";
    case Intention::Right: return "right";
    case Intention::Static: return "static";
    case Intention::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::optional<Intention> intention_from_string(std::string_view s);

/// Thresholds of the rule-based labeler. Speeds are in dataset units per second.
struct LabelingThresholds {
  double thresh_v = 5;             // max tolerated count of trend violations
  double thresh_y = 5;             // std(y') bound for the left/right branch
  double thresh_y_straight = 0.5;  // tighter std(y') bound for the straight branch
  double v_a = 0.01;
  double v_s = 0.2;
  double v_lr = 0.1;

  /// Throws ConfigError unless all values are nonnegative and v_a < v_lr < v_s.
  void validate() const;
};

/// Population standard deviation.
template <typename Derived>
typename Derived::Scalar population_std(const Eigen::DenseBase<Derived>& s) {
  const auto& d = s.derived();
  const auto mean = d.mean();
  return std::sqrt((d.array() - mean).square().mean());
}

/// Rule-based label from canonical-frame coordinates, speeds and headings of a
/// complete trajectory. Branch order matters: static, straight, then right
/// before left.
template <typename Scalar>
Intention assign_intention_label(const Sequence<Scalar>& x_transformed,
                                 const Sequence<Scalar>& y_transformed,
                                 const Sequence<Scalar>& velocities, const Sequence<Scalar>& radians,
                                 const LabelingThresholds& th) {
  const Scalar mean_v = velocities.mean();
  if (mean_v < th.v_a) return Intention::Static;

  const Scalar std_y = population_std(y_transformed);
  const bool forward = static_cast<double>(trend_count(x_transformed)) <= th.thresh_v;
  if (mean_v > th.v_s && std_y < th.thresh_y_straight && forward) return Intention::Straight;

  if (mean_v > th.v_lr && std_y < th.thresh_y && forward) {
    const auto within = [&](Index c) { return static_cast<double>(c) <= th.thresh_v; };
    if (within(trend_count(-y_transformed)) && within(trend_count(-radians))) return Intention::Right;
    if (within(trend_count(y_transformed)) && within(trend_count(radians))) return Intention::Left;
  }
  return Intention::Unlabeled;
}

/// Labels a complete trajectory whose canonical frame is taken from its first
/// `t_obs` points.
template <typename Scalar>
Intention label_trajectory(const BasicTrajectory<Scalar>& complete, Index t_obs,
                           const LabelingThresholds& th) {
  const auto params = rotation_params(complete, t_obs);
  const Points<Scalar> canon = transform_points(complete.points, params);
  const Index n = complete.size();
  return assign_intention_label<Scalar>(canon.col(0), canon.col(1), velocity_sequence(complete, n),
                                        radian_sequence(complete, n), th);
}

}  // namespace intent::core
