#include "intent/core/labeling.hpp"

#include "intent/errors.hpp"

namespace intent::core {

std::optional<Intention> intention_from_string(std::string_view s) {
  for (int i = 0; i <= kNumIntentions; ++i) {
    const auto cls = static_cast<Intention>(i);
    if (to_string(cls) == s) return cls;
  }
  return std::nullopt;
}

void LabelingThresholds::validate() const {
  for (double v : {thresh_v, thresh_y, thresh_y_straight, v_a, v_s, v_lr}) {
    if (!(v >= 0)) throw ConfigError("labeling thresholds must be nonnegative");
  }
  if (!(v_a < v_lr && v_lr < v_s)) throw ConfigError("labeling speeds must satisfy v_a < v_lr < v_s");
}

}  // namespace intent::core
