#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "intent/core/trajectory.hpp"

namespace intent::model {

using core::Index;

struct ModelConfig {
  Index t_obs = 8;
  Index t_pred = 12;
  Index n_classes = 4;
  Index embed_dim = 32;
  Index hidden_dim = 64;
  bool hard_mixture = false;                  // decode with the argmax head only
  bool use_raw_coordinates = false;           // skip the feature extractor
  bool operate_in_transformed_frame = false;  // predict in the canonical frame

  /// Throws ConfigError on non-positive sizes or hidden_dim not divisible by 4.
  void validate() const;

  /// Assigns one field by key; returns false for unknown keys.
  bool set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> to_entries() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace intent::model
