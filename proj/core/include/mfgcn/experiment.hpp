#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgcn/manifest.hpp"
#include "mfgcn/metrics.hpp"
#include "mfgcn/model.hpp"
#include "mfgcn/training.hpp"

namespace mfgcn::io {

/// A pipeline failure annotated with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentConfig {
  train::TrainConfig train;
  model::ModelConfig model;  // encoder specs resolved from the data at load
  FeatureParams features;
  int audio_max_len = 64;
  int video_max_len = 32;
  int gaze_max_len = 12;
  int augment_times = 0;   // response-shuffle copies per training subject
  int augment_blocks = 12;
  bool parallel_folds = false;

  /// Merge overrides from a JSON config file onto the defaults.
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  std::string to_json_string() const;
};

struct FoldOutcome {
  int fold_index = 0;
  train::MetricsReport report;
  std::vector<std::string> test_ids;
  std::vector<int> y_true;
  std::vector<int> y_pred;
  std::vector<std::vector<double>> y_scores;
  train::TrainResult training;
};

struct ExperimentResult {
  std::filesystem::path run_dir;
  std::vector<train::FoldSplit> folds;
  std::vector<FoldOutcome> outcomes;
  train::MetricsReport pooled;  // evaluated over all folds' test predictions
  double mean_weighted_f2 = 0.0;
  double mean_weighted_recall = 0.0;
  double mean_accuracy = 0.0;
};

/// Copy a training fold and append `times` response-shuffled variants of
/// every subject; test data is never touched.
model::Dataset augment_training_set(const model::Dataset& train_set, int times, int n_blocks,
                                    std::uint64_t seed);

/// Features -> folds -> per-fold training -> aggregated reports, all written
/// under a fresh timestamped directory below `out_root`.  Failures leave a
/// FAILED marker beside any partial outputs.
ExperimentResult run_experiment(const DatasetManifest& manifest, const ExperimentConfig& config,
                                const std::filesystem::path& out_root,
                                const std::string& label = "");

struct AblationResult {
  std::filesystem::path run_dir;
  ExperimentResult with_cross_modality;
  ExperimentResult without_cross_modality;
};

/// Paired runs on identical folds and seeds: the configured model against
/// the trunk-bypassed (n_layers = 0) variant.
AblationResult ablate_cross_modality(const DatasetManifest& manifest,
                                     const ExperimentConfig& config,
                                     const std::filesystem::path& out_root);

/// Rebuild the human-readable summary and figures for a finished run.
void emit_report(const std::filesystem::path& run_dir);

// --- spectrum analysis ----------------------------------------------------

struct SpectrumRow {
  std::string family;
  int n = 0;
  double lambda = 0.0;
  std::string kernel;
  double numeric_response = 0.0;
  double analytic_response = 0.0;
  double abs_error = 0.0;
};

struct SpectrumRequest {
  std::string family;  // complete | cycle | path | erdos_renyi
  int n = 3;
  std::vector<std::string> kernels = {"adjacency", "k1", "k2", "kcombined"};
  double phi = 0.5;
  double a = 0.5;
  double er_prob = 0.4;
  std::uint64_t er_seed = 7;
};

/// Numeric frequency responses against their closed forms.  Polynomial
/// kernels use the eigenvalues of I - A_norm; the `gcn` profile row pairs
/// the kernel with the no-self-loop Laplacian spectrum and requires a
/// regular graph.
std::vector<SpectrumRow> analyze_spectrum(const SpectrumRequest& request);

void write_spectrum_csv(const std::filesystem::path& path, const std::vector<SpectrumRow>& rows);

}  // namespace mfgcn::io
