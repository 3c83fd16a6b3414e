#pragma once

#include <array>
#include <string>
#include <vector>

namespace mfgcn::features {

/// Canonical column order of the seven per-frame emotion scores.
extern const std::array<std::string, 7> kEmotionNames;

/// Validate per-frame 7-vectors: exactly seven fields per row, every score
/// in [0,1].  Violations are rejected with the offending row index.
std::vector<std::vector<double>> load_emotion_features(
    const std::vector<std::vector<double>>& rows);

}  // namespace mfgcn::features
