#include "intent/model/config.hpp"

#include "intent/config.hpp"
#include "intent/errors.hpp"

namespace intent::model {

void ModelConfig::validate() const {
  if (t_obs < 2) throw ConfigError("t_obs must be at least 2");
  if (t_pred < 1) throw ConfigError("t_pred must be at least 1");
  if (n_classes < 1) throw ConfigError("n_classes must be positive");
  if (embed_dim < 1) throw ConfigError("embed_dim must be positive");
  if (hidden_dim < 4 || hidden_dim % 4 != 0) {
    throw ConfigError("hidden_dim must be a positive multiple of 4, got " + std::to_string(hidden_dim));
  }
}

bool ModelConfig::set(const std::string& key, const std::string& value) {
  if (key == "t_obs") t_obs = parse_int(key, value);
  else if (key == "t_pred") t_pred = parse_int(key, value);
  else if (key == "n_classes") n_classes = parse_int(key, value);
  else if (key == "embed_dim") embed_dim = parse_int(key, value);
  else if (key == "hidden_dim") hidden_dim = parse_int(key, value);
  else if (key == "hard_mixture") hard_mixture = parse_bool(key, value);
  else if (key == "use_raw_coordinates") use_raw_coordinates = parse_bool(key, value);
  else if (key == "operate_in_transformed_frame" || key == "transformed") {
    operate_in_transformed_frame = parse_bool(key, value);
  } else {
    return false;
  }
  return true;
}

std::vector<std::pair<std::string, std::string>> ModelConfig::to_entries() const {
  const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {{"t_obs", std::to_string(t_obs)},
          {"t_pred", std::to_string(t_pred)},
          {"n_classes", std::to_string(n_classes)},
          {"embed_dim", std::to_string(embed_dim)},
          {"hidden_dim", std::to_string(hidden_dim)},
          {"hard_mixture", b(hard_mixture)},
          {"use_raw_coordinates", b(use_raw_coordinates)},
          {"operate_in_transformed_frame", b(operate_in_transformed_frame)}};
}

}  // namespace intent::model
