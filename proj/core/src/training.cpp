#include "mfgcn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "mfgcn/rng.hpp"

namespace mfgcn::train {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("train config: learning_rate must be > 0");
  if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
  if (early_stop_patience < 0) throw std::invalid_argument("train config: patience must be >= 0");
  if (early_stop_patience > max_epochs) {
    throw std::invalid_argument("train config: patience exceeds max_epochs");
  }
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (k_folds < 2) throw std::invalid_argument("train config: k_folds must be >= 2");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw std::invalid_argument("train config: validation_fraction must be in [0,1)");
  }
}

std::vector<FoldSplit> kfold_split(const std::vector<std::string>& ids,
                                   const std::vector<int>& labels, int k, std::uint64_t seed) {
  if (ids.size() != labels.size()) {
    throw std::invalid_argument("kfold_split: ids and labels lengths differ");
  }
  const int n = static_cast<int>(ids.size());
  if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
  if (k > n) {
    throw std::invalid_argument("kfold_split: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(n) + " subjects");
  }

  // Group by label, shuffle each group, then deal the concatenated stream
  // round-robin: per-class counts per fold differ by at most one, and the
  // continuous dealing index keeps global fold sizes within one of each
  // other as well.
  std::map<int, std::vector<int>> by_label;
  for (int i = 0; i < n; ++i) by_label[labels[i]].push_back(i);

  Rng rng(seed);
  std::vector<int> stream;
  stream.reserve(n);
  for (auto& [label, members] : by_label) {
    rng.shuffle(members);
    stream.insert(stream.end(), members.begin(), members.end());
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) folds[f].fold_index = f;
  std::vector<int> fold_of(n, 0);
  for (int pos = 0; pos < n; ++pos) fold_of[stream[pos]] = pos % k;

  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < k; ++f) {
      (f == fold_of[i] ? folds[f].test_ids : folds[f].train_ids).push_back(ids[i]);
    }
  }
  return folds;
}

AdamState AdamState::for_params(const std::vector<ad::Tensor>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const auto& p : params) {
    s.m.emplace_back(p.size(), 0.0);
    s.v.emplace_back(p.size(), 0.0);
  }
  return s;
}

std::vector<ad::Tensor> adam_step(const std::vector<ad::Tensor>& params,
                                  const std::vector<ad::Tensor>& grads, AdamState& state,
                                  double learning_rate, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: params/grads/state sizes differ");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));

  std::vector<ad::Tensor> updated;
  updated.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const auto& g = grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                  " does not match parameter " + p.shape_str());
    }
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto pd = p.data();
    const auto gd = g.data();
    std::vector<double> next(p.size());
    for (std::size_t j = 0; j < next.size(); ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * gd[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * gd[j] * gd[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      next[j] = pd[j] - learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
    updated.emplace_back(p.rows(), p.cols(), std::move(next), /*requires_grad=*/true);
  }
  return updated;
}

ad::Tensor cross_entropy_loss(ad::Tape& tape, const ad::Tensor& probabilities,
                              const std::vector<int>& labels) {
  return ad::cross_entropy(tape, probabilities, labels);
}

namespace {

double batch_loss(model::MffbmModel& model, const model::Dataset& batch,
                  const std::vector<int>& labels) {
  ad::Tape tape;
  const auto fwd = model.forward(tape, batch);
  return ad::cross_entropy(tape, fwd.probs, labels).item();
}

std::vector<ad::Tensor> snapshot(const std::vector<ad::Tensor>& params) {
  std::vector<ad::Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.detached(/*requires_grad=*/true));
  return out;
}

}  // namespace

TrainResult train(model::MffbmModel& model, const model::Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");

  const int n = static_cast<int>(data.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  rng.shuffle(order);

  // seeded validation carve-out; training-loss fallback on tiny cohorts
  int n_val = static_cast<int>(std::lround(cfg.validation_fraction * n));
  if (cfg.validation_fraction > 0.0 && n >= 5) n_val = std::max(1, n_val);
  if (n_val >= n) n_val = 0;
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());

  model::Dataset val_set;
  std::vector<int> val_labels;
  for (int i : val_idx) {
    val_set.push_back(data[i]);
    val_labels.push_back(data[i].label);
  }

  AdamState state = AdamState::for_params(model.params());

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<ad::Tensor> best_params = snapshot(model.params());
  int epochs_since_improvement = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    int n_batches = 0;

    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
      model::Dataset batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(data[train_idx[i]]);
        labels.push_back(data[train_idx[i]].label);
      }
      ad::Tape tape;
      model.watch_params(tape);
      const auto fwd = model.forward(tape, batch);
      const ad::Tensor loss = ad::cross_entropy(tape, fwd.probs, labels);
      const double loss_value = loss.item();
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 "; run aborted");
      }
      epoch_loss += loss_value;
      ++n_batches;

      const auto grads = ad::backward(tape, loss);
      std::vector<ad::Tensor> aligned;
      aligned.reserve(model.params().size());
      for (const auto& p : model.params()) {
        auto it = grads.find(p.id());
        aligned.push_back(it != grads.end() ? it->second : ad::Tensor::zeros(p.rows(), p.cols()));
      }
      model.set_params(adam_step(model.params(), aligned, state, cfg.learning_rate));
      for (const auto& p : model.params()) {
        if (!p.all_finite()) {
          throw std::runtime_error("train: non-finite parameter after update at epoch " +
                                   std::to_string(epoch) + "; run aborted");
        }
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = n_batches > 0 ? epoch_loss / n_batches : 0.0;
    if (!val_set.empty()) {
      stats.val_loss = batch_loss(model, val_set, val_labels);
    } else {
      stats.val_loss = stats.train_loss;
    }
    if (!std::isfinite(stats.val_loss)) {
      throw std::runtime_error("train: non-finite validation loss at epoch " +
                               std::to_string(epoch) + "; run aborted");
    }
    result.history.push_back(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      result.best_epoch = epoch;
      best_params = snapshot(model.params());
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
      if (epochs_since_improvement > cfg.early_stop_patience) {
        result.early_stopped = true;
        break;
      }
    }
  }

  model.set_params(std::move(best_params));
  result.best_val_loss = best_val;
  return result;
}

Prediction predict(const model::MffbmModel& model, const model::Dataset& data) {
  if (data.empty()) throw std::invalid_argument("predict: empty dataset");
  ad::Tape tape;
  const auto fwd = model.forward(tape, data);
  Prediction out;
  const int n = fwd.probs.rows(), c = fwd.probs.cols();
  out.scores.resize(n);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    out.scores[i].resize(c);
    int best = 0;
    for (int j = 0; j < c; ++j) {
      out.scores[i][j] = fwd.probs.at(i, j);
      if (out.scores[i][j] > out.scores[i][best]) best = j;  // ties keep lowest index
    }
    out.labels[i] = best;
  }
  return out;
}

std::vector<std::vector<int>> augment_permutations(int n_blocks, int times, std::uint64_t seed) {
  std::vector<std::vector<int>> perms;
  std::vector<int> identity(n_blocks);
  std::iota(identity.begin(), identity.end(), 0);
  perms.push_back(identity);
  Rng rng(seed);
  for (int t = 0; t < times; ++t) {
    std::vector<int> p = identity;
    rng.shuffle(p);
    perms.push_back(std::move(p));
  }
  return perms;
}

AugmentResult augment_shuffle_responses(const std::vector<FeatureBlock>& sample, int times,
                                        std::uint64_t seed) {
  AugmentResult out;
  if (times < 0) throw std::invalid_argument("augment_shuffle_responses: times must be >= 0");
  if (sample.size() < 2) {
    out.samples.push_back(sample);
    out.applied = false;
    return out;
  }
  const auto perms = augment_permutations(static_cast<int>(sample.size()), times, seed);
  for (const auto& perm : perms) {
    std::vector<FeatureBlock> shuffled;
    shuffled.reserve(sample.size());
    for (int idx : perm) shuffled.push_back(sample[idx]);
    out.samples.push_back(std::move(shuffled));
  }
  out.applied = true;
  return out;
}

std::vector<std::vector<double>> permute_row_blocks(const std::vector<std::vector<double>>& rows,
                                                    int n_blocks,
                                                    const std::vector<int>& permutation) {
  if (n_blocks < 1) throw std::invalid_argument("permute_row_blocks: n_blocks must be >= 1");
  if (static_cast<int>(permutation.size()) != n_blocks) {
    throw std::invalid_argument("permute_row_blocks: permutation size differs from n_blocks");
  }
  const int n = static_cast<int>(rows.size());
  const int base = n / n_blocks;
  const int extra = n % n_blocks;
  // contiguous blocks; the first `extra` blocks get one extra row
  std::vector<std::pair<int, int>> spans;
  int pos = 0;
  for (int b = 0; b < n_blocks; ++b) {
    const int len = base + (b < extra ? 1 : 0);
    spans.emplace_back(pos, len);
    pos += len;
  }
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (int idx : permutation) {
    const auto [start, len] = spans[idx];
    for (int i = 0; i < len; ++i) out.push_back(rows[start + i]);
  }
  return out;
}

}  // namespace mfgcn::train
