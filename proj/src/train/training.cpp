#include "intent/train/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "intent/config.hpp"
#include "intent/errors.hpp"

namespace intent::train {

using ad::Tensor;

void TrainingConfig::validate() const {
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
  if (alpha < 0 || beta < 0) throw ConfigError("alpha and beta must be non-negative");
  if (!(conf >= 0 && conf <= 1)) throw ConfigError("conf must lie in [0, 1]");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(decay_rate >= 0 && decay_rate < 1)) throw ConfigError("decay_rate must lie in [0, 1)");
  if (epochs_per_decay < 1) throw ConfigError("epochs_per_decay must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

bool TrainingConfig::set(const std::string& key, const std::string& value) {
  if (key == "alpha") alpha = parse_double(key, value);
  else if (key == "beta") beta = parse_double(key, value);
  else if (key == "temperature") temperature = parse_double(key, value);
  else if (key == "conf") conf = parse_double(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "decay_rate") decay_rate = parse_double(key, value);
  else if (key == "epochs_per_decay") epochs_per_decay = parse_int(key, value);
  else if (key == "epochs") epochs = parse_int(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "n_contrastive") n_contrastive = parse_int(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "augment") augment = parse_bool(key, value);
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> TrainingConfig::to_entries() const {
  return {{"alpha", format_double(alpha)},
          {"beta", format_double(beta)},
          {"temperature", format_double(temperature)},
          {"conf", format_double(conf)},
          {"learning_rate", format_double(learning_rate)},
          {"decay_rate", format_double(decay_rate)},
          {"epochs_per_decay", std::to_string(epochs_per_decay)},
          {"epochs", std::to_string(epochs)},
          {"batch_size", std::to_string(batch_size)},
          {"n_contrastive", std::to_string(n_contrastive)},
          {"seed", std::to_string(seed)},
          {"augment", augment ? "true" : "false"}};
}

namespace {

std::pair<int, int> ordered(int a, int b) { return a <= b ? std::pair{a, b} : std::pair{b, a}; }

constexpr int kStraight = static_cast<int>(Intention::Straight);
constexpr int kLeft = static_cast<int>(Intention::Left);
constexpr int kRight = static_cast<int>(Intention::Right);
constexpr int kStatic = static_cast<int>(Intention::Static);

}  // namespace

PairRelation PairRelation::defaults(int n_classes) {
  PairRelation r;
  for (int c = 0; c < n_classes; ++c) r.positive.insert({c, c});
  if (n_classes >= core::kNumIntentions) {
    r.positive.insert(ordered(kStraight, kLeft));
    r.positive.insert(ordered(kStraight, kRight));
    r.negative.insert(ordered(kLeft, kRight));
    r.negative.insert(ordered(kStatic, kStraight));
    r.negative.insert(ordered(kStatic, kLeft));
    r.negative.insert(ordered(kStatic, kRight));
  }
  return r;
}

bool PairRelation::is_positive(int a, int b) const { return positive.count(ordered(a, b)) != 0; }
bool PairRelation::is_negative(int a, int b) const { return negative.count(ordered(a, b)) != 0; }

void PairRelation::validate(int n_classes) const {
  for (int c = 0; c < n_classes; ++c) {
    if (!is_positive(c, c)) throw ConfigError("pair relation must treat same-class pairs as positive");
  }
  for (const auto& p : positive) {
    if (negative.count(p) != 0) throw ConfigError("pair relation has a pair that is both positive and negative");
  }
}

std::vector<ContrastiveExample> sample_contrastive_examples(std::span<const Index> candidates,
                                                            std::span<const int> labels,
                                                            const PairRelation& relation, std::size_t n,
                                                            std::mt19937_64& rng) {
  std::vector<std::pair<Index, Index>> pos, neg;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      const Index a = candidates[i], b = candidates[j];
      const int la = labels[static_cast<std::size_t>(a)], lb = labels[static_cast<std::size_t>(b)];
      if (relation.is_positive(la, lb)) pos.emplace_back(a, b);
      else if (relation.is_negative(la, lb)) neg.emplace_back(a, b);
    }
  }
  const std::size_t k = std::min({n, pos.size(), neg.size()});
  // Partial Fisher-Yates on each list.
  const auto draw = [&](std::vector<std::pair<Index, Index>>& v) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
      std::swap(v[i], v[pick(rng)]);
    }
  };
  draw(pos);
  draw(neg);
  std::vector<ContrastiveExample> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({pos[i], neg[i]});
  return out;
}

double classification_loss(const Eigen::VectorXd& soft, const Eigen::VectorXd& truth) {
  if (soft.size() != truth.size()) throw ShapeError("classification_loss: length mismatch");
  Index hot = -1;
  for (Index c = 0; c < truth.size(); ++c) {
    if (truth(c) == 1.0 && hot < 0) hot = c;
    else if (truth(c) != 0.0) hot = -2;
  }
  if (hot < 0) throw ShapeError("classification_loss: truth is not one-hot");
  return -std::log(std::max(soft(hot), 1e-12));
}

Var classification_loss(Var soft, std::span<const Index> rows, std::span<const int> labels) {
  if (rows.empty()) throw ShapeError("classification_loss: no rows");
  const Index n = soft.value().cols();
  Matrix onehot = Matrix::Zero(static_cast<Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int l = labels[static_cast<std::size_t>(rows[i])];
    if (l < 0 || l >= n) throw ShapeError("classification_loss: label out of range");
    onehot(static_cast<Index>(i), l) = 1.0;
  }
  const Var picked = ad::gather_rows(soft, rows);
  const Var weighted = ad::log(picked) * soft.tape().constant(Tensor::from_matrix(onehot));
  return ad::scale(ad::sum(weighted), -1.0 / static_cast<double>(rows.size()));
}

Var contrastive_loss(Var projections, std::span<const ContrastiveExample> examples, double temperature) {
  if (examples.empty()) throw ShapeError("contrastive_loss: no examples");
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
  std::vector<Index> p1, p2, n1, n2;
  for (const auto& e : examples) {
    p1.push_back(e.positive.first);
    p2.push_back(e.positive.second);
    n1.push_back(e.negative.first);
    n2.push_back(e.negative.second);
  }
  const Var sp = ad::cosine_similarity(ad::gather_rows(projections, p1), ad::gather_rows(projections, p2));
  const Var sn = ad::cosine_similarity(ad::gather_rows(projections, n1), ad::gather_rows(projections, n2));
  // -log(e^{p/T} / (e^{p/T} + e^{n/T})) = softplus((n - p) / T)
  return ad::mean(ad::softplus(ad::scale(sn - sp, 1.0 / temperature)));
}

double contrastive_loss(double sim_positive, double sim_negative, double temperature) {
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
  const double x = (sim_negative - sim_positive) / temperature;
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double prediction_loss(const core::Points<double>& predicted, const core::Points<double>& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw ShapeError("prediction_loss: length mismatch");
  }
  return (predicted - actual).rowwise().squaredNorm().sum();
}

Var prediction_loss(Var predicted, const Matrix& target) {
  const Tensor& v = predicted.value();
  if (v.rows() != target.rows() || v.cols() != target.cols()) throw ShapeError("prediction_loss: shape mismatch");
  const Var diff = predicted - predicted.tape().constant(Tensor::from_matrix(target));
  return ad::scale(ad::sum(diff * diff), 1.0 / static_cast<double>(target.rows()));
}

MaskedSets mask_batch(std::span<const Intention> labels, const Matrix& soft, double conf) {
  MaskedSets sets;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = static_cast<Index>(i);
    sets.prediction.push_back(row);
    if (labels[i] == Intention::Unlabeled) continue;
    if (soft.row(row).maxCoeff() < conf) continue;
    sets.classification.push_back(row);
    sets.contrastive.push_back(row);
  }
  return sets;
}

core::Trajectory augment_trajectory(const core::Trajectory& traj, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  const double a = angle(rng);
  const double tx = shift(rng), ty = shift(rng);
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  core::Points<double> pts = traj.points * r.transpose();
  pts.rowwise() += Eigen::RowVector2d(tx, ty);
  return {std::move(pts), traj.dt};
}

core::TrajectoryWindow augment_window(const core::TrajectoryWindow& window, std::mt19937_64& rng) {
  const core::Trajectory moved = augment_trajectory(window.complete(), rng);
  core::TrajectoryWindow out = window;
  const Index n = window.observation.size();
  out.observation = moved.head(n);
  if (window.has_future()) out.future = moved.tail(moved.size() - n);
  return out;
}

double lr_at_epoch(const TrainingConfig& config, Index epoch) {
  if (epoch < 0) throw ConfigError("epoch must be non-negative");
  return config.learning_rate *
         std::pow(1.0 - config.decay_rate, static_cast<double>(epoch / config.epochs_per_decay));
}

std::vector<LabeledWindow> label_windows(std::span<const core::TrajectoryWindow> windows, Index t_obs,
                                         const core::LabelingThresholds& thresholds) {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    out.push_back({w, core::label_trajectory(w.complete(), t_obs, thresholds)});
  }
  return out;
}

BatchLoss batch_loss(ad::Tape& tape, ad::ParamSet& params, const model::ModelConfig& model_config,
                     const TrainingConfig& config, std::span<const LabeledWindow> batch,
                     const PairRelation& relation, std::mt19937_64& contrastive_rng) {
  std::vector<core::TrajectoryWindow> windows;
  std::vector<Intention> labels;
  windows.reserve(batch.size());
  for (const auto& lw : batch) {
    windows.push_back(lw.window);
    labels.push_back(lw.label);
  }
  const model::BatchInput input = model::prepare_batch(windows, model_config);
  const Matrix target = model::prepare_targets(windows, input, model_config);
  const model::ModelParams bound = model::bind(tape, params, model_config);
  const model::ForwardResult fwd = model::forward(tape, bound, input, model_config);

  BatchLoss out;
  out.hard_labels = fwd.hard_labels;
  const MaskedSets sets = mask_batch(labels, fwd.representation.soft_label.mat(), config.conf);

  const Var lp = prediction_loss(fwd.prediction, target);
  out.values.prediction = lp.item();
  Var total = lp;

  if (!sets.classification.empty()) {
    std::vector<int> truth;
    for (Intention l : labels) truth.push_back(static_cast<int>(l));
    const Var lr = classification_loss(fwd.representation.soft_label, sets.classification, truth);
    out.values.classification = lr.item();
    if (config.alpha > 0) total = total + ad::scale(lr, config.alpha);
  }

  const Index nc = config.contrastive_count();
  if (nc > 0) {
    const auto examples = sample_contrastive_examples(sets.contrastive, fwd.hard_labels, relation,
                                                      static_cast<std::size_t>(nc), contrastive_rng);
    out.n_examples = examples.size();
    if (!examples.empty()) {
      const Var lc = contrastive_loss(fwd.representation.projection, examples, config.temperature);
      out.values.contrastive = lc.item();
      if (config.beta > 0) total = total + ad::scale(lc, config.beta);
    }
  }
  out.total = total;
  out.values.total = total.item();
  return out;
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return std::mt19937_64(seq);
}

}  // namespace

TrainResult train(std::span<const LabeledWindow> data, const model::ModelConfig& model_config,
                  const TrainingConfig& config, const PairRelation& relation, const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  relation.validate(static_cast<int>(model_config.n_classes));
  if (data.empty()) throw ConfigError("training dataset is empty");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  TrainResult result;
  result.params = model::init_params(model_config, config.seed);
  auto shuffle_rng = stream(config.seed, 1);
  auto augment_rng = stream(config.seed, 2);
  auto contrastive_rng = stream(config.seed, 3);

  std::vector<std::size_t> order(data.size());
  std::vector<LabeledWindow> batch;
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const auto epoch_start = clock::now();
    const double lr = lr_at_epoch(config, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochLog log;
    log.epoch = epoch;
    log.learning_rate = lr;
    std::size_t n_batches = 0;
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = first; i < last; ++i) {
        const LabeledWindow& lw = data[order[i]];
        batch.push_back(config.augment ? LabeledWindow{augment_window(lw.window, augment_rng), lw.label} : lw);
      }
      try {
        ad::Tape tape;
        const BatchLoss loss = batch_loss(tape, result.params, model_config, config, batch, relation, contrastive_rng);
        result.params.zero_grad();
        tape.backward(loss.total);
        ad::adam_step(result.params, ad::AdamOptions{.learning_rate = lr});
        log.mean.classification += loss.values.classification;
        log.mean.contrastive += loss.values.contrastive;
        log.mean.prediction += loss.values.prediction;
        log.mean.total += loss.values.total;
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(n_batches) + ": " +
                           e.what());
      }
      ++n_batches;
      ++result.steps;
    }
    const double nb = static_cast<double>(n_batches);
    log.mean.classification /= nb;
    log.mean.contrastive /= nb;
    log.mean.prediction /= nb;
    log.mean.total /= nb;
    log.seconds = std::chrono::duration<double>(clock::now() - epoch_start).count();
    result.history.push_back(log);
    if (on_epoch && !on_epoch(log)) break;
  }
  result.seconds = std::chrono::duration<double>(clock::now() - start).count();
  return result;
}

void write_log_header(std::ostream& out) {
  out << "epoch\tlr\tclassification\tcontrastive\tprediction\ttotal\twall_seconds\n";
}

void write_log_line(std::ostream& out, const EpochLog& log) {
  out << log.epoch << '\t' << format_double(log.learning_rate) << '\t' << format_double(log.mean.classification)
      << '\t' << format_double(log.mean.contrastive) << '\t' << format_double(log.mean.prediction) << '\t'
      << format_double(log.mean.total) << '\t' << format_double(log.seconds) << '\n';
}

}  // namespace intent::train
