#include "mfgcn/emotion.hpp"

#include <stdexcept>

namespace mfgcn::features {

const std::array<std::string, 7> kEmotionNames = {"angry", "disgust",  "fear",   "happy",
                                                  "sad",   "surprise", "neutral"};

std::vector<std::vector<double>> load_emotion_features(
    const std::vector<std::vector<double>>& rows) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 7) {
      throw std::invalid_argument("emotion row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " fields, expected 7");
    }
    for (std::size_t c = 0; c < 7; ++c) {
      const double v = rows[r][c];
      if (v < 0.0 || v > 1.0) {
        throw std::invalid_argument("emotion row " + std::to_string(r) + " field '" +
                                    kEmotionNames[c] + "' = " + std::to_string(v) +
                                    " outside [0,1]");
      }
    }
  }
  return rows;
}

}  // namespace mfgcn::features
