#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "intent/core/labeling.hpp"
#include "intent/model/model.hpp"

namespace intent::train {

using core::Index;
using core::Intention;
using ad::Var;
using model::Matrix;

struct TrainingConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double temperature = 0.1;
  double conf = 0.0;
  double learning_rate = 1e-3;
  double decay_rate = 0.1;
  Index epochs_per_decay = 20;
  Index epochs = 100;
  Index batch_size = 64;
  Index n_contrastive = -1;  // negative: batch_size / 2
  std::uint64_t seed = 0;
  bool augment = false;

  /// Throws ConfigError when temperature <= 0, alpha or beta < 0, conf
  /// outside [0, 1], or counts are out of range.
  void validate() const;
  bool set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> to_entries() const;
  Index contrastive_count() const { return n_contrastive < 0 ? batch_size / 2 : n_contrastive; }
};

/// Unordered class pairs that count as positive or negative for contrastive
/// clustering.
struct PairRelation {
  std::set<std::pair<int, int>> positive;
  std::set<std::pair<int, int>> negative;

  /// Same-class pairs and (straight, left), (straight, right) are positive;
  /// (left, right) and static against any moving class are negative.
  static PairRelation defaults(int n_classes = core::kNumIntentions);
  bool is_positive(int a, int b) const;
  bool is_negative(int a, int b) const;
  /// Throws ConfigError if the sets overlap or a same-class pair is missing.
  void validate(int n_classes) const;
};

/// Batch-row indices of one positive and one negative pair.
struct ContrastiveExample {
  std::pair<Index, Index> positive;
  std::pair<Index, Index> negative;
};

/// Draws min(n, #positive pairs, #negative pairs) examples. Positive and
/// negative pairs are each drawn uniformly without replacement from the
/// eligible pairs among `candidates` (batch rows) using their labels. Empty
/// when either kind has no eligible pair.
std::vector<ContrastiveExample> sample_contrastive_examples(std::span<const Index> candidates,
                                                            std::span<const int> labels,
                                                            const PairRelation& relation, std::size_t n,
                                                            std::mt19937_64& rng);

/// -sum_c truth[c] log(soft[c]), log clamped at 1e-12. Throws ShapeError
/// unless truth is one-hot with the same length as soft.
double classification_loss(const Eigen::VectorXd& soft, const Eigen::VectorXd& truth);
/// Mean cross-entropy over the given rows of a B x N soft-label tensor.
Var classification_loss(Var soft, std::span<const Index> rows, std::span<const int> labels);

/// Mean over examples of -log of the two-way softmax of cosine similarities
/// divided by the temperature. Throws ShapeError on an empty list.
Var contrastive_loss(Var projections, std::span<const ContrastiveExample> examples, double temperature);
/// Scalar form for one example given its two similarities.
double contrastive_loss(double sim_positive, double sim_negative, double temperature);

/// Sum over steps of squared Euclidean distance. Throws ShapeError on a
/// length mismatch.
double prediction_loss(const core::Points<double>& predicted, const core::Points<double>& actual);
/// Batch mean of the per-window sum of squared distances; both B x 2 t_pred.
Var prediction_loss(Var predicted, const Matrix& target);

struct MaskedSets {
  std::vector<Index> classification;
  std::vector<Index> contrastive;
  std::vector<Index> prediction;
};

/// Windows that are unlabeled or whose soft label peaks below `conf` leave
/// the classification and contrastive sets; every window stays in the
/// prediction set.
MaskedSets mask_batch(std::span<const Intention> labels, const Matrix& soft, double conf);

struct LossBreakdown {
  double classification = 0;
  double contrastive = 0;
  double prediction = 0;
  double total = 0;
};

inline double total_loss(double classification, double contrastive, double prediction, double alpha,
                         double beta) {
  return alpha * classification + beta * contrastive + prediction;
}

/// Random rotation in [0, 2 pi) about the origin, then translation with
/// components in [-10, 10].
core::Trajectory augment_trajectory(const core::Trajectory& traj, std::mt19937_64& rng);
/// Applies one random rigid motion to observation and future together.
core::TrajectoryWindow augment_window(const core::TrajectoryWindow& window, std::mt19937_64& rng);

double lr_at_epoch(const TrainingConfig& config, Index epoch);

/// A window with its precomputed rule-based label.
struct LabeledWindow {
  core::TrajectoryWindow window;
  Intention label = Intention::Unlabeled;
};

std::vector<LabeledWindow> label_windows(std::span<const core::TrajectoryWindow> windows, Index t_obs,
                                         const core::LabelingThresholds& thresholds);

/// Losses of one minibatch on a live tape.
struct BatchLoss {
  Var total;
  LossBreakdown values;
  std::vector<int> hard_labels;
  std::size_t n_examples = 0;
};

BatchLoss batch_loss(ad::Tape& tape, ad::ParamSet& params, const model::ModelConfig& model_config,
                     const TrainingConfig& config, std::span<const LabeledWindow> batch,
                     const PairRelation& relation, std::mt19937_64& contrastive_rng);

struct EpochLog {
  Index epoch = 0;
  double learning_rate = 0;
  LossBreakdown mean;
  double seconds = 0;
};

struct TrainResult {
  ad::ParamSet params;
  std::vector<EpochLog> history;
  double seconds = 0;
  std::uint64_t steps = 0;
};

/// Called after every epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochLog&)>;

/// Seeded minibatch training with Adam. Throws ConfigError for an empty
/// dataset and NumericError naming the epoch and batch on a non-finite loss.
TrainResult train(std::span<const LabeledWindow> data, const model::ModelConfig& model_config,
                  const TrainingConfig& config, const PairRelation& relation = PairRelation::defaults(),
                  const EpochCallback& on_epoch = {});

/// One tab-separated line: epoch, lr, L_r, L_c, L_p, total, wall seconds.
void write_log_line(std::ostream& out, const EpochLog& log);
void write_log_header(std::ostream& out);

}  // namespace intent::train
