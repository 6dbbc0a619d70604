#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "intent/autodiff/ops.hpp"
#include "intent/core/features.hpp"
#include "intent/model/config.hpp"

namespace intent::model {

using ad::ParamSet;
using ad::Var;
using Matrix = ad::RowMatrix<double>;

/// Weight and bias handles of one affine layer, bound to a tape.
struct Affine {
  Var weight;
  Var bias;
  Var operator()(Var x) const { return ad::affine(x, weight, bias); }
};

/// Feature encoders, base encoder Rep and projection encoder Proj.
struct RepresentationParams {
  Affine velocity, radian, transformed_y;  // t_obs -> embed_dim each
  Affine raw;                              // 2 t_obs -> 3 embed_dim (raw-coordinate variant)
  Affine rep;                              // 3 embed_dim -> hidden_dim
  Affine proj;                             // hidden_dim -> n_classes
};

/// One time step's predictor. Exactly t_pred of these exist.
struct LocationPredictorParams {
  Affine location;  // 2 -> embed_dim
  Affine combiner;  // hidden_dim + embed_dim -> hidden_dim
  Affine gate_input;
  Affine gate_hidden;  // applied to the zero hidden state
  std::vector<Affine> heads;  // n_classes of hidden_dim -> 2
};

struct ModelParams {
  RepresentationParams representation;
  std::vector<LocationPredictorParams> predictors;
};

/// Creates every parameter with values uniform in +-1/sqrt(fan_in).
ParamSet init_params(const ModelConfig& config, std::uint64_t seed);

/// Binds parameters as trainable leaves. Throws ConfigError if any is missing
/// or misshapen for `config`.
ModelParams bind(ad::Tape& tape, ParamSet& params, const ModelConfig& config);
/// Binds parameters as read-only leaves for inference.
ModelParams bind_frozen(ad::Tape& tape, const ParamSet& params, const ModelConfig& config);

/// Checks names and shapes of `params` against `config`.
void check_params(const ParamSet& params, const ModelConfig& config);

/// Name prefix of predictor t (0-based), e.g. "pred.03.".
std::string predictor_prefix(Index t);

/// Network inputs for B windows. Locations are expressed in the prediction
/// frame: translated to the first observed point and, in transformed mode,
/// rotated into the canonical frame.
struct BatchInput {
  Matrix velocities;     // B x t_obs
  Matrix radians;        // B x t_obs
  Matrix transformed_y;  // B x t_obs
  Matrix raw;            // B x 2 t_obs (prediction-frame observation)
  Matrix last_location;  // B x 2
  std::vector<core::TransformParams> frames;

  Index size() const { return last_location.rows(); }
};

/// Feature extraction and frame bookkeeping for a batch of windows.
BatchInput prepare_batch(std::span<const core::TrajectoryWindow> windows, const ModelConfig& config);

/// Ground-truth future of each window in its prediction frame, B x 2 t_pred.
Matrix prepare_targets(std::span<const core::TrajectoryWindow> windows, const BatchInput& batch,
                       const ModelConfig& config);

/// F = concat(MLP^s(D^v), MLP^r(D^r), MLP^y(D^y)).
Var encode_features(Var velocities, Var radians, Var transformed_y, const RepresentationParams& p);

struct RepresentationOutput {
  Var representation;  // R_h
  Var projection;      // R_z
  Var soft_label;      // softmax(R_z)
};

RepresentationOutput representation_forward(Var features, const RepresentationParams& p);

/// One predicted location per row: R_c from the embedded last location and
/// R_h, LSTM-style gates with zero hidden and cell state, then the mixture of
/// per-class heads weighted by `mixture` (B x n_classes).
Var location_predictor_forward(Var last_location, Var representation, Var mixture,
                               const LocationPredictorParams& p);

struct ForwardResult {
  RepresentationOutput representation;
  Var mixture;                  // soft label, or one-hot argmax in hard mode
  std::vector<Var> steps;       // t_pred entries of B x 2
  Var prediction;               // B x 2 t_pred, prediction frame
  std::vector<int> hard_labels;
};

ForwardResult forward(ad::Tape& tape, const ModelParams& params, const BatchInput& batch,
                      const ModelConfig& config);

/// Argmax per row, lowest index on ties.
std::vector<int> argmax_rows(const Matrix& m);

/// Inference result for one window. Locations are in world coordinates.
struct ModelOutput {
  Eigen::VectorXd representation;
  Eigen::VectorXd projection;
  Eigen::VectorXd soft_label;
  int hard_label = 0;
  core::Points<double> predicted;
};

std::vector<ModelOutput> predict(const ParamSet& params, const ModelConfig& config,
                                 std::span<const core::TrajectoryWindow> windows);
ModelOutput model_forward(const core::TrajectoryWindow& window, const ParamSet& params,
                          const ModelConfig& config);

/// Checkpoint: text header with the config, then the parameter binary.
struct Checkpoint {
  static constexpr int kVersion = 1;
  ModelConfig config;
  ParamSet params;
};

void save_checkpoint(std::ostream& out, const ModelConfig& config, const ParamSet& params);
void save_checkpoint(const std::string& path, const ModelConfig& config, const ParamSet& params);
/// Throws ParseError on a bad magic line, version mismatch or corrupt data.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace intent::model
