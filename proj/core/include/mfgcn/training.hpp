#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgcn/metrics.hpp"
#include "mfgcn/model.hpp"
#include "mfgcn/tensor.hpp"

namespace mfgcn::train {

struct TrainConfig {
  double learning_rate = 0.001;
  int max_epochs = 500;
  int early_stop_patience = 50;
  int batch_size = 16;
  std::uint64_t seed = 0;
  int k_folds = 10;
  Task task = Task::three_class;
  double validation_fraction = 0.1;

  void validate() const;
};

struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Seeded subject-wise k-fold split, stratified by label where counts allow;
/// fold sizes differ by at most one.
std::vector<FoldSplit> kfold_split(const std::vector<std::string>& ids,
                                   const std::vector<int>& labels, int k, std::uint64_t seed);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long t = 0;

  static AdamState for_params(const std::vector<ad::Tensor>& params);
};

/// Bias-corrected Adam update; returns the updated parameter tensors.
std::vector<ad::Tensor> adam_step(const std::vector<ad::Tensor>& params,
                                  const std::vector<ad::Tensor>& grads, AdamState& state,
                                  double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                                  double eps = 1e-8);

/// Mean negative log-likelihood with a 1e-12 probability floor, recorded on
/// the tape for gradient propagation.
ad::Tensor cross_entropy_loss(ad::Tape& tape, const ad::Tensor& probabilities,
                              const std::vector<int>& labels);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  bool early_stopped = false;
};

/// Minibatch Adam with early stopping on a seeded 10% validation carve-out
/// of the training data; the best-validation parameters are restored before
/// returning.  Non-finite losses abort the run.
TrainResult train(model::MffbmModel& model, const model::Dataset& data, const TrainConfig& cfg);

struct Prediction {
  std::vector<int> labels;
  std::vector<std::vector<double>> scores;
};

/// Argmax predictions (ties resolve to the lowest class index).
Prediction predict(const model::MffbmModel& model, const model::Dataset& data);

/// Response-block permutations for shuffle augmentation: the identity order
/// first, then `times` seeded permutations.
std::vector<std::vector<int>> augment_permutations(int n_blocks, int times, std::uint64_t seed);

using FeatureBlock = std::vector<std::vector<double>>;

struct AugmentResult {
  std::vector<std::vector<FeatureBlock>> samples;  // original first
  bool applied = false;  // false when the sample has fewer than 2 blocks
};

/// Seeded shuffles of response-block order; the original sample is retained.
AugmentResult augment_shuffle_responses(const std::vector<FeatureBlock>& sample, int times,
                                        std::uint64_t seed);

/// Split a feature matrix into `n_blocks` contiguous row blocks and rebuild
/// it under a block permutation.
std::vector<std::vector<double>> permute_row_blocks(const std::vector<std::vector<double>>& rows,
                                                    int n_blocks,
                                                    const std::vector<int>& permutation);

}  // namespace mfgcn::train
