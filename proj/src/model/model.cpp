#include "intent/model/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "intent/errors.hpp"

namespace intent::model {
namespace {

using ad::Tensor;

struct LayerSpec {
  std::string name;
  Index in;
  Index out;
};

std::vector<LayerSpec> layer_specs(const ModelConfig& c) {
  std::vector<LayerSpec> specs;
  if (c.use_raw_coordinates) {
    specs.push_back({"rep.raw", 2 * c.t_obs, 3 * c.embed_dim});
  } else {
    specs.push_back({"rep.velocity", c.t_obs, c.embed_dim});
    specs.push_back({"rep.radian", c.t_obs, c.embed_dim});
    specs.push_back({"rep.transformed_y", c.t_obs, c.embed_dim});
  }
  specs.push_back({"rep.base", 3 * c.embed_dim, c.hidden_dim});
  specs.push_back({"rep.proj", c.hidden_dim, c.n_classes});
  for (Index t = 0; t < c.t_pred; ++t) {
    const std::string p = predictor_prefix(t);
    specs.push_back({p + "location", 2, c.embed_dim});
    specs.push_back({p + "combiner", c.hidden_dim + c.embed_dim, c.hidden_dim});
    specs.push_back({p + "gate_input", c.hidden_dim, 4 * c.hidden_dim});
    specs.push_back({p + "gate_hidden", c.hidden_dim, 4 * c.hidden_dim});
    for (Index k = 0; k < c.n_classes; ++k) specs.push_back({p + "head" + std::to_string(k), c.hidden_dim, 2});
  }
  return specs;
}

template <typename Leaf>
ModelParams bind_with(const ModelConfig& c, Leaf&& leaf) {
  const auto layer = [&](const std::string& name) {
    return Affine{leaf(name + ".weight"), leaf(name + ".bias")};
  };
  ModelParams m;
  auto& r = m.representation;
  if (c.use_raw_coordinates) {
    r.raw = layer("rep.raw");
  } else {
    r.velocity = layer("rep.velocity");
    r.radian = layer("rep.radian");
    r.transformed_y = layer("rep.transformed_y");
  }
  r.rep = layer("rep.base");
  r.proj = layer("rep.proj");
  for (Index t = 0; t < c.t_pred; ++t) {
    const std::string p = predictor_prefix(t);
    LocationPredictorParams lp{layer(p + "location"), layer(p + "combiner"), layer(p + "gate_input"),
                               layer(p + "gate_hidden"), {}};
    for (Index k = 0; k < c.n_classes; ++k) lp.heads.push_back(layer(p + "head" + std::to_string(k)));
    m.predictors.push_back(std::move(lp));
  }
  return m;
}

void check_window(const core::TrajectoryWindow& w, const ModelConfig& c) {
  if (w.observation.size() != c.t_obs) {
    throw ShapeError("window observation has " + std::to_string(w.observation.size()) +
                     " points, model expects t_obs=" + std::to_string(c.t_obs));
  }
}

}  // namespace

std::string predictor_prefix(Index t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pred.%03ld.", static_cast<long>(t));
  return buf;
}

ParamSet init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ParamSet params;
  for (const auto& spec : layer_specs(config)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor w = Tensor::zeros({spec.out, spec.in});
    for (Index i = 0; i < w.size(); ++i) w.values(i) = dist(rng);
    Tensor b = Tensor::zeros({spec.out});
    for (Index i = 0; i < b.size(); ++i) b.values(i) = dist(rng);
    params.add(spec.name + ".weight", std::move(w));
    params.add(spec.name + ".bias", std::move(b));
  }
  return params;
}

void check_params(const ParamSet& params, const ModelConfig& config) {
  const auto specs = layer_specs(config);
  if (params.size() != 2 * specs.size()) {
    throw ConfigError("parameter set has " + std::to_string(params.size()) + " tensors, config needs " +
                      std::to_string(2 * specs.size()));
  }
  for (const auto& spec : specs) {
    const auto expect = [&](const std::string& name, const ad::Shape& shape) {
      if (!params.contains(name)) throw ConfigError("missing parameter '" + name + "'");
      if (params.at(name).value.shape != shape) {
        throw ConfigError("parameter '" + name + "' has shape " + ad::to_string(params.at(name).value.shape) +
                          ", expected " + ad::to_string(shape));
      }
    };
    expect(spec.name + ".weight", {spec.out, spec.in});
    expect(spec.name + ".bias", {spec.out});
  }
}

ModelParams bind(ad::Tape& tape, ParamSet& params, const ModelConfig& config) {
  check_params(params, config);
  return bind_with(config, [&](const std::string& n) { return tape.param(params.at(n)); });
}

ModelParams bind_frozen(ad::Tape& tape, const ParamSet& params, const ModelConfig& config) {
  check_params(params, config);
  return bind_with(config, [&](const std::string& n) { return tape.frozen(params.at(n)); });
}

BatchInput prepare_batch(std::span<const core::TrajectoryWindow> windows, const ModelConfig& config) {
  const auto B = static_cast<Index>(windows.size());
  const Index T = config.t_obs;
  BatchInput in;
  in.velocities.resize(B, T);
  in.radians.resize(B, T);
  in.transformed_y.resize(B, T);
  in.raw.resize(B, 2 * T);
  in.last_location.resize(B, 2);
  in.frames.reserve(windows.size());
  for (Index b = 0; b < B; ++b) {
    const auto& w = windows[static_cast<std::size_t>(b)];
    check_window(w, config);
    const auto ex = core::extract_observation_features(w);
    in.velocities.row(b) = ex.features.velocities.transpose();
    in.radians.row(b) = ex.features.radians.transpose();
    in.transformed_y.row(b) = ex.features.transformed_y.transpose();
    core::TransformParams frame;
    frame.origin = ex.params.origin;
    if (config.operate_in_transformed_frame) frame = ex.params;
    const core::Points<double> local = core::transform_points(w.observation.points, frame);
    in.raw.row(b) = Eigen::Map<const Eigen::RowVectorXd>(Matrix(local).data(), 2 * T);
    in.last_location.row(b) = local.row(T - 1);
    in.frames.push_back(frame);
  }
  return in;
}

Matrix prepare_targets(std::span<const core::TrajectoryWindow> windows, const BatchInput& batch,
                       const ModelConfig& config) {
  const auto B = static_cast<Index>(windows.size());
  Matrix out(B, 2 * config.t_pred);
  for (Index b = 0; b < B; ++b) {
    const auto& w = windows[static_cast<std::size_t>(b)];
    if (w.future.size() != config.t_pred) {
      throw ShapeError("window future has " + std::to_string(w.future.size()) + " points, expected t_pred=" +
                       std::to_string(config.t_pred));
    }
    const Matrix local = core::transform_points(w.future.points, batch.frames[static_cast<std::size_t>(b)]);
    out.row(b) = Eigen::Map<const Eigen::RowVectorXd>(local.data(), local.size());
  }
  return out;
}

Var encode_features(Var velocities, Var radians, Var transformed_y, const RepresentationParams& p) {
  return ad::concat({ad::tanh(p.velocity(velocities)), ad::tanh(p.radian(radians)),
                     ad::tanh(p.transformed_y(transformed_y))});
}

RepresentationOutput representation_forward(Var features, const RepresentationParams& p) {
  RepresentationOutput out;
  out.representation = ad::tanh(p.rep(features));
  out.projection = p.proj(out.representation);
  out.soft_label = ad::softmax(out.projection);
  return out;
}

Var location_predictor_forward(Var last_location, Var representation, Var mixture,
                               const LocationPredictorParams& p) {
  ad::Tape& tape = representation.tape();
  const Var embedded = ad::tanh(p.location(last_location));
  const Var combined = ad::tanh(p.combiner(ad::concat({representation, embedded})));

  // Zero hidden and cell state; the hidden-state path is kept so the layer
  // matches the gate equation even though it only contributes its bias.
  const Var zero_state = tape.constant(ad::Tensor::zeros(representation.shape()));
  const auto [i, f, c, o] = ad::split4(p.gate_input(combined) + p.gate_hidden(zero_state));
  (void)o;
  const Var cell = ad::sigmoid(f) * zero_state + ad::sigmoid(i) * ad::tanh(c);
  const Var h = ad::sigmoid(c) * ad::tanh(cell);

  Var out;
  for (std::size_t k = 0; k < p.heads.size(); ++k) {
    const Var term = ad::scale_rows(p.heads[k](h), ad::column(mixture, static_cast<Index>(k)));
    out = out.valid() ? out + term : term;
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    Index best = 0;
    m.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

ForwardResult forward(ad::Tape& tape, const ModelParams& params, const BatchInput& batch,
                      const ModelConfig& config) {
  const auto& rp = params.representation;
  Var features;
  if (config.use_raw_coordinates) {
    features = ad::tanh(rp.raw(tape.constant(Tensor::from_matrix(batch.raw))));
  } else {
    features = encode_features(tape.constant(Tensor::from_matrix(batch.velocities)),
                               tape.constant(Tensor::from_matrix(batch.radians)),
                               tape.constant(Tensor::from_matrix(batch.transformed_y)), rp);
  }
  ForwardResult out;
  out.representation = representation_forward(features, rp);
  out.hard_labels = argmax_rows(out.representation.soft_label.mat());
  if (config.hard_mixture) {
    Matrix onehot = Matrix::Zero(batch.size(), config.n_classes);
    for (Index b = 0; b < batch.size(); ++b) onehot(b, out.hard_labels[static_cast<std::size_t>(b)]) = 1.0;
    out.mixture = tape.constant(Tensor::from_matrix(onehot));
  } else {
    out.mixture = out.representation.soft_label;
  }
  const Var last = tape.constant(Tensor::from_matrix(batch.last_location));
  for (const auto& predictor : params.predictors) {
    out.steps.push_back(location_predictor_forward(last, out.representation.representation, out.mixture, predictor));
  }
  out.prediction = ad::concat(std::span<const Var>(out.steps));
  return out;
}

std::vector<ModelOutput> predict(const ParamSet& params, const ModelConfig& config,
                                 std::span<const core::TrajectoryWindow> windows) {
  std::vector<ModelOutput> outputs;
  if (windows.empty()) return outputs;
  const BatchInput batch = prepare_batch(windows, config);
  ad::Tape tape;
  const ModelParams bound = bind_frozen(tape, params, config);
  const ForwardResult res = forward(tape, bound, batch, config);
  const auto rh = res.representation.representation.mat();
  const auto rz = res.representation.projection.mat();
  const auto soft = res.representation.soft_label.mat();
  const auto pred = res.prediction.mat();
  outputs.reserve(windows.size());
  for (Index b = 0; b < batch.size(); ++b) {
    ModelOutput o;
    o.representation = rh.row(b).transpose();
    o.projection = rz.row(b).transpose();
    o.soft_label = soft.row(b).transpose();
    o.hard_label = res.hard_labels[static_cast<std::size_t>(b)];
    const Matrix local = Eigen::Map<const Matrix>(pred.row(b).data(), config.t_pred, 2);
    o.predicted = core::inverse_transform_points(core::Points<double>(local), batch.frames[static_cast<std::size_t>(b)]);
    outputs.push_back(std::move(o));
  }
  return outputs;
}

ModelOutput model_forward(const core::TrajectoryWindow& window, const ParamSet& params,
                          const ModelConfig& config) {
  return std::move(predict(params, config, std::span<const core::TrajectoryWindow>(&window, 1)).front());
}

namespace {
constexpr const char* kMagic = "INTENT-CKPT";
}

void save_checkpoint(std::ostream& out, const ModelConfig& config, const ParamSet& params) {
  out << kMagic << ' ' << Checkpoint::kVersion << '\n';
  for (const auto& [k, v] : config.to_entries()) out << k << '=' << v << '\n';
  out << "end\n";
  params.save(out);
  if (!out) throw IoError("failed to write checkpoint");
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_checkpoint(out, config, params);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::string line;
  const std::string magic = std::string(kMagic) + ' ';
  if (!std::getline(in, line) || line.rfind(magic, 0) != 0) {
    throw ParseError("bad magic bytes: not an INTENT checkpoint");
  }
  if (line != magic + std::to_string(Checkpoint::kVersion)) {
    throw ParseError("unsupported checkpoint version '" + line.substr(magic.size()) + "' (expected " +
                     std::to_string(Checkpoint::kVersion) + ")");
  }
  Checkpoint ck;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError("truncated checkpoint header");
    if (line == "end") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("malformed checkpoint header line '" + line + "'");
    try {
      if (!ck.config.set(line.substr(0, eq), line.substr(eq + 1))) {
        throw ParseError("unknown checkpoint header key '" + line.substr(0, eq) + "'");
      }
    } catch (const ConfigError& e) {
      throw ParseError(std::string("checkpoint header: ") + e.what());
    }
  }
  try {
    ck.config.validate();
    ck.params = ParamSet::load(in);
    check_params(ck.params, ck.config);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint does not match its header: ") + e.what());
  }
  return ck;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace intent::model
