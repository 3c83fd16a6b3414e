#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfgcn/audio_features.hpp"
#include "mfgcn/metrics.hpp"
#include "mfgcn/model.hpp"

namespace mfgcn::io {

struct GazePairPaths {
  std::filesystem::path fixation;
  std::filesystem::path saliency;
};

/// One subject's score and per-modality file references.  Audio may be a
/// mono PCM WAV (features extracted on load) or a precomputed feature CSV;
/// gaze may be a precomputed metric CSV or fixation/saliency map pairs.
struct SubjectRecord {
  std::string subject_id;
  int phq9 = 0;
  std::optional<std::filesystem::path> audio;
  std::optional<std::filesystem::path> emotion;
  std::optional<std::filesystem::path> gaze;
  std::vector<GazePairPaths> gaze_pairs;
  std::vector<std::string> modalities;  // availability flags; empty = infer from files
};

struct DatasetManifest {
  std::string name;
  std::filesystem::path base_dir;
  std::vector<SubjectRecord> subjects;
};

/// Parse and validate a manifest JSON file: unique subject ids, scores in
/// range, every referenced file present.  Validation is total before any
/// feature computation starts.
DatasetManifest load_manifest(const std::filesystem::path& path);

struct FeatureParams {
  features::AudioParams audio;
  std::uint64_t saliency_seed = 0;
};

bool subject_has_modality(const SubjectRecord& rec, model::Modality m);

/// Resolve one subject's feature matrices for the requested modality subset.
/// WAV audio runs through the spectral extractors; CSV inputs are ingested
/// and validated.  Missing required modalities are rejected, never imputed.
model::SubjectData load_subject_features(const SubjectRecord& rec, const DatasetManifest& manifest,
                                         const FeatureParams& params, model::Modality subset,
                                         train::Task task);

model::Dataset load_dataset(const DatasetManifest& manifest, const FeatureParams& params,
                            model::Modality subset, train::Task task);

/// Gaze metric rows from fixation/saliency comparisons, in report order
/// (auc_borji, auc_judd, cc, kldiv, nss, sim, auc_shuffled, info_gain).
/// Shuffled-AUC negatives come from the other pairs' fixation maps; the
/// uniform map serves as the info-gain baseline.
std::vector<std::vector<double>> gaze_metric_rows(const std::vector<GazePairPaths>& pairs,
                                                  const std::filesystem::path& base_dir,
                                                  std::uint64_t seed);

}  // namespace mfgcn::io
