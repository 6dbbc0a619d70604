#include "run_config.hpp"

#include "intent/errors.hpp"

namespace intent::cli {

void RunConfig::set(const std::string& key, const std::string& value) {
  auto& th = labeling;
  if (key == "dataset") dataset = data::dataset_kind_from_string(value);
  else if (key == "scene") scene = value;
  else if (key == "horizon") horizon = parse_double(key, value);
  else if (key == "stride") stride = parse_int(key, value);
  else if (key == "thresh_v") th.thresh_v = parse_double(key, value);
  else if (key == "thresh_y") th.thresh_y = parse_double(key, value);
  else if (key == "thresh_vy") th.thresh_v = th.thresh_y = parse_double(key, value);
  else if (key == "thresh_y_straight") th.thresh_y_straight = parse_double(key, value);
  else if (key == "v_a") th.v_a = parse_double(key, value);
  else if (key == "v_s") th.v_s = parse_double(key, value);
  else if (key == "v_lr") th.v_lr = parse_double(key, value);
  else if (!model.set(key, value) && !training.set(key, value)) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  explicit_.insert(key);
}

void RunConfig::apply(const std::vector<ConfigEntry>& entries, const std::string& source) {
  for (const auto& e : entries) {
    try {
      set(e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(source + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) { apply(parse_config_file(path), path); }

data::WindowConfig RunConfig::window_config() const {
  data::WindowConfig w = data::default_window_config(dataset, horizon);
  if (explicit_.count("t_obs")) w.t_obs = model.t_obs;
  if (explicit_.count("t_pred")) w.t_pred = model.t_pred;
  w.stride = stride;
  return w;
}

void RunConfig::resolve() {
  const auto w = window_config();
  w.validate();
  model.t_obs = w.t_obs;
  model.t_pred = w.t_pred;
  model.validate();
  training.validate();
  labeling.validate();
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_entries() const {
  std::vector<std::pair<std::string, std::string>> out{{"dataset", data::to_string(dataset)},
                                                       {"scene", scene},
                                                       {"horizon", format_double(horizon)},
                                                       {"stride", std::to_string(stride)}};
  for (auto& kv : model.to_entries()) out.push_back(std::move(kv));
  for (auto& kv : training.to_entries()) out.push_back(std::move(kv));
  const auto& th = labeling;
  for (const auto& [k, v] : {std::pair{"thresh_v", th.thresh_v}, {"thresh_y", th.thresh_y},
                             {"thresh_y_straight", th.thresh_y_straight}, {"v_a", th.v_a}, {"v_s", th.v_s},
                             {"v_lr", th.v_lr}}) {
    out.emplace_back(k, format_double(v));
  }
  return out;
}

}  // namespace intent::cli
