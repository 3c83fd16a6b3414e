#include "mfgcn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "mfgcn/audio_features.hpp"
#include "mfgcn/csv.hpp"
#include "mfgcn/emotion.hpp"
#include "mfgcn/rng.hpp"
#include "mfgcn/saliency.hpp"

namespace mfgcn::io {

namespace fs = std::filesystem;

SyntheticSpec::Kind SyntheticSpec::kind_from_name(const std::string& name) {
  if (name == "separable") return Kind::separable;
  if (name == "xor") return Kind::xor_cross_modal;
  throw std::invalid_argument("unknown synthetic cohort kind '" + name + "' (separable|xor)");
}

std::string SyntheticSpec::kind_name(Kind kind) {
  return kind == Kind::separable ? "separable" : "xor";
}

namespace {

constexpr int kAudioLen = 18, kAudioDim = 10;
constexpr int kVideoLen = 14;
constexpr int kGazeLen = 12, kGazeDim = 8;

std::vector<std::vector<double>> signed_pattern(Rng& rng, int rows, int cols, double sign,
                                                double noise) {
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols, 0.0));
  for (int t = 0; t < rows; ++t) {
    for (int c = 0; c < cols; ++c) {
      const double base = std::sin(0.7 * t + 0.9 * c) + (c % 2 == 0 ? 0.8 : -0.4);
      out[t][c] = sign * base + noise * rng.normal();
    }
  }
  return out;
}

std::vector<std::vector<double>> class_pattern(Rng& rng, int rows, int cols, int cls,
                                               double noise) {
  const double offset = (cls - 1) * 1.2;
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols, 0.0));
  for (int t = 0; t < rows; ++t) {
    for (int c = 0; c < cols; ++c) {
      const double base = 0.4 * std::sin(0.5 * t + c) + (c < cols / 2 ? offset : -offset);
      out[t][c] = base + noise * rng.normal();
    }
  }
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Rows shaped like the per-frame emotion scores: neutral falls and the
/// negative emotions rise with severity.
std::vector<std::vector<double>> emotion_rows(Rng& rng, int rows, int cls, double noise) {
  std::vector<std::vector<double>> out(rows, std::vector<double>(7, 0.0));
  for (int t = 0; t < rows; ++t) {
    out[t][0] = clamp01(0.03 + 0.03 * cls + noise * rng.normal());  // angry
    out[t][1] = clamp01(0.001 + 0.001 * cls);                       // disgust
    out[t][2] = clamp01(0.04 + 0.03 * cls + noise * rng.normal());  // fear
    out[t][3] = clamp01(0.08 + 0.02 * cls + noise * rng.normal());  // happy
    out[t][4] = clamp01(0.05 + 0.05 * cls + noise * rng.normal());  // sad
    out[t][5] = clamp01(0.02 + 0.01 * cls + noise * rng.normal());  // surprise
    out[t][6] = clamp01(0.78 - 0.12 * cls + noise * rng.normal());  // neutral
  }
  return out;
}

std::vector<std::vector<double>> neutral_emotion_rows(Rng& rng, int rows, double noise) {
  return emotion_rows(rng, rows, 1, noise);
}

}  // namespace

model::Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.n_subjects < 1) throw std::invalid_argument("synthetic: n_subjects must be >= 1");
  Rng rng(spec.seed);
  model::Dataset data;
  data.reserve(spec.n_subjects);

  for (int i = 0; i < spec.n_subjects; ++i) {
    model::SubjectData s;
    char id[16];
    std::snprintf(id, sizeof(id), "syn%03d", i);
    s.id = id;

    if (spec.kind == SyntheticSpec::Kind::separable) {
      const int cls = i % 3;
      s.phq9 = cls == 0 ? 2 : (cls == 1 ? 9 : 20);
      s.label = cls;
      s.audio = class_pattern(rng, kAudioLen, kAudioDim, cls, 0.25);
      s.video = emotion_rows(rng, kVideoLen, cls, 0.015);
      s.gaze = class_pattern(rng, kGazeLen, kGazeDim, cls, 0.25);
    } else {
      const double sign_audio = (i & 1) ? 1.0 : -1.0;
      const double sign_gaze = (i & 2) ? 1.0 : -1.0;
      const bool positive = sign_audio * sign_gaze < 0.0;
      s.phq9 = positive ? 20 : 2;
      s.label = positive ? 1 : 0;
      s.audio = signed_pattern(rng, kAudioLen, kAudioDim, sign_audio, 0.75);
      s.video = neutral_emotion_rows(rng, kVideoLen, 0.02);
      s.gaze = signed_pattern(rng, kGazeLen, kGazeDim, sign_gaze, 0.75);
    }
    data.push_back(std::move(s));
  }
  return data;
}

std::filesystem::path write_synthetic_cohort(const SyntheticSpec& spec, const fs::path& out_dir) {
  const model::Dataset data = make_synthetic_dataset(spec);
  fs::create_directories(out_dir / "features");

  nlohmann::json subjects = nlohmann::json::array();
  Rng wav_rng(spec.seed + 0x5741u);
  for (const auto& s : data) {
    nlohmann::json sj;
    sj["id"] = s.id;
    sj["phq9"] = s.phq9;

    if (spec.audio_as_wav) {
      // a class-pitched tone plus noise, enough signal for the extractors
      features::WavData wav;
      wav.sample_rate = 16000;
      wav.samples.resize(8000);
      const double freq = 440.0 * (1.0 + 0.5 * s.label);
      for (std::size_t t = 0; t < wav.samples.size(); ++t) {
        wav.samples[t] = 0.6 * std::sin(2.0 * std::numbers::pi * freq * t / wav.sample_rate) +
                         0.05 * wav_rng.normal();
      }
      const std::string rel = "features/" + s.id + "_audio.wav";
      features::write_wav(out_dir / rel, wav);
      sj["audio"] = rel;
    } else {
      std::vector<std::string> header;
      for (int c = 0; c < kAudioDim; ++c) header.push_back("a" + std::to_string(c));
      const std::string rel = "features/" + s.id + "_audio.csv";
      csv::write_matrix(out_dir / rel, header, s.audio);
      sj["audio"] = rel;
    }

    {
      std::vector<std::string> header(features::kEmotionNames.begin(),
                                      features::kEmotionNames.end());
      const std::string rel = "features/" + s.id + "_emotion.csv";
      csv::write_matrix(out_dir / rel, header, s.video);
      sj["emotion"] = rel;
    }
    {
      std::vector<std::string> header;
      for (const auto& name : features::kSaliencyMetricNames) header.push_back(name);
      const std::string rel = "features/" + s.id + "_gaze.csv";
      csv::write_matrix(out_dir / rel, header, s.gaze);
      sj["gaze"] = rel;
    }
    subjects.push_back(std::move(sj));
  }

  nlohmann::json manifest;
  manifest["name"] = "synthetic-" + SyntheticSpec::kind_name(spec.kind);
  manifest["subjects"] = std::move(subjects);

  const fs::path manifest_path = out_dir / "manifest.json";
  std::ofstream f(manifest_path);
  if (!f) throw std::runtime_error("synthetic: cannot write " + manifest_path.string());
  f << manifest.dump(1) << '\n';
  return manifest_path;
}

}  // namespace mfgcn::io
