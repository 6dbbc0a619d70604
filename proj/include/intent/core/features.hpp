#pragma once

#include <optional>

#include "intent/core/labeling.hpp"

namespace intent::core {

template <typename Scalar>
struct BasicObservationFeatures {
  Sequence<Scalar> velocities;     // D^v
  Sequence<Scalar> radians;        // D^r
  Sequence<Scalar> transformed_y;  // D^y
  Location<Scalar> last_location{Location<Scalar>::Zero()};  // world frame

  Index length() const { return velocities.size(); }
};

using ObservationFeatures = BasicObservationFeatures<double>;

template <typename Scalar>
struct BasicFeatureExtraction {
  BasicObservationFeatures<Scalar> features;
  BasicTransformParams<Scalar> params;
  std::optional<Intention> label;  // only when labeling was requested on a window with a future
};

using FeatureExtraction = BasicFeatureExtraction<double>;

/// Velocity, heading and canonical-y sequences of the observation, the
/// canonicalizing transform, and (training only) the rule-based label of the
/// complete window.
template <typename Scalar>
BasicFeatureExtraction<Scalar> extract_observation_features(
    const BasicTrajectoryWindow<Scalar>& window,
    const std::optional<LabelingThresholds>& labeling = std::nullopt) {
  const auto& obs = window.observation;
  const Index t_obs = obs.size();
  validate(obs, 2);

  BasicFeatureExtraction<Scalar> out;
  out.params = rotation_params(obs, t_obs);
  out.features.velocities = velocity_sequence(obs, t_obs);
  out.features.radians = radian_sequence(obs, t_obs);
  out.features.transformed_y = transform_points(obs.points, out.params).col(1);
  out.features.last_location = obs.back();

  if (labeling && window.has_future()) {
    out.label = label_trajectory(window.complete(), t_obs, *labeling);
  }
  return out;
}

}  // namespace intent::core
