#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mfgcn/model.hpp"

namespace mfgcn::io {

/// Seeded synthetic cohorts.  `separable` carries a class-dependent offset in
/// every modality; `xor_cross_modal` hides the label in the sign product of
/// the audio and gaze patterns, so no single modality is informative.
struct SyntheticSpec {
  enum class Kind { separable, xor_cross_modal };

  Kind kind = Kind::separable;
  int n_subjects = 30;
  std::uint64_t seed = 0;
  bool audio_as_wav = false;  // emit tone WAVs instead of feature CSVs

  static Kind kind_from_name(const std::string& name);
  static std::string kind_name(Kind kind);
};

/// In-memory cohort with phq9 scores set; labels are left at the three-class
/// mapping and re-derived by loaders for the configured task.
model::Dataset make_synthetic_dataset(const SyntheticSpec& spec);

/// Write manifest.json plus per-subject feature files under `out_dir`.
std::filesystem::path write_synthetic_cohort(const SyntheticSpec& spec,
                                             const std::filesystem::path& out_dir);

}  // namespace mfgcn::io
