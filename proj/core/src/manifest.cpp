#include "mfgcn/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "mfgcn/csv.hpp"
#include "mfgcn/emotion.hpp"
#include "mfgcn/saliency.hpp"

namespace mfgcn::io {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

void require_file(const fs::path& base, const fs::path& p, const std::string& subject,
                  const char* field) {
  const fs::path full = resolve(base, p);
  if (!fs::exists(full)) {
    throw std::runtime_error("manifest: subject '" + subject + "' " + field + " file missing: " +
                             full.string());
  }
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("manifest: cannot open " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest: " + path.string() + " is not valid JSON: " + e.what());
  }

  DatasetManifest m;
  m.name = j.value("name", path.stem().string());
  m.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");

  if (!j.contains("subjects") || !j["subjects"].is_array() || j["subjects"].empty()) {
    throw std::runtime_error("manifest: " + path.string() + " has no subjects");
  }

  std::set<std::string> seen;
  for (const auto& sj : j["subjects"]) {
    SubjectRecord rec;
    rec.subject_id = sj.at("id").get<std::string>();
    if (!seen.insert(rec.subject_id).second) {
      throw std::runtime_error("manifest: duplicate subject id '" + rec.subject_id + "'");
    }
    rec.phq9 = sj.at("phq9").get<int>();
    if (rec.phq9 < 0 || rec.phq9 > 27) {
      throw std::runtime_error("manifest: subject '" + rec.subject_id + "' phq9 score " +
                               std::to_string(rec.phq9) + " outside [0,27]");
    }
    if (sj.contains("audio")) rec.audio = fs::path(sj.at("audio").get<std::string>());
    if (sj.contains("emotion")) rec.emotion = fs::path(sj.at("emotion").get<std::string>());
    if (sj.contains("gaze")) rec.gaze = fs::path(sj.at("gaze").get<std::string>());
    if (sj.contains("gaze_pairs")) {
      for (const auto& pj : sj.at("gaze_pairs")) {
        rec.gaze_pairs.push_back(GazePairPaths{fs::path(pj.at("fixation").get<std::string>()),
                                               fs::path(pj.at("saliency").get<std::string>())});
      }
    }
    if (sj.contains("modalities")) {
      rec.modalities = sj.at("modalities").get<std::vector<std::string>>();
    }

    if (rec.audio) require_file(m.base_dir, *rec.audio, rec.subject_id, "audio");
    if (rec.emotion) require_file(m.base_dir, *rec.emotion, rec.subject_id, "emotion");
    if (rec.gaze) require_file(m.base_dir, *rec.gaze, rec.subject_id, "gaze");
    for (const auto& gp : rec.gaze_pairs) {
      require_file(m.base_dir, gp.fixation, rec.subject_id, "gaze fixation");
      require_file(m.base_dir, gp.saliency, rec.subject_id, "gaze saliency");
    }
    m.subjects.push_back(std::move(rec));
  }
  return m;
}

bool subject_has_modality(const SubjectRecord& rec, model::Modality m) {
  auto flagged = [&rec](const char* name) {
    return rec.modalities.empty() ||
           std::find(rec.modalities.begin(), rec.modalities.end(), name) != rec.modalities.end();
  };
  switch (m) {
    case model::Modality::audio: return rec.audio.has_value() && flagged("audio");
    case model::Modality::video: return rec.emotion.has_value() && flagged("video");
    case model::Modality::gaze:
      return (rec.gaze.has_value() || !rec.gaze_pairs.empty()) && flagged("gaze");
    case model::Modality::ensemble:
      return subject_has_modality(rec, model::Modality::audio) &&
             subject_has_modality(rec, model::Modality::video) &&
             subject_has_modality(rec, model::Modality::gaze);
  }
  return false;
}

std::vector<std::vector<double>> gaze_metric_rows(const std::vector<GazePairPaths>& pairs,
                                                  const fs::path& base_dir, std::uint64_t seed) {
  if (pairs.empty()) throw std::invalid_argument("gaze_metric_rows: no fixation/saliency pairs");

  std::vector<features::Map> fixations;
  std::vector<features::Map> saliencies;
  for (const auto& gp : pairs) {
    fixations.push_back(csv::read_plain_matrix(resolve(base_dir, gp.fixation)));
    saliencies.push_back(csv::read_plain_matrix(resolve(base_dir, gp.saliency)));
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    features::SaliencyPair pair(fixations[i], saliencies[i]);
    std::vector<features::Map> others;
    for (std::size_t j = 0; j < fixations.size(); ++j) {
      if (j != i) others.push_back(fixations[j]);
    }
    const features::Map uniform(pair.fixation.size(),
                                std::vector<double>(pair.fixation[0].size(), 1.0));
    features::SaliencyOptions opts;
    opts.seed = seed + i;
    const auto metrics = features::saliency_metrics(
        pair, others.empty() ? nullptr : &others, &uniform, opts);
    auto values = metrics.ordered_values();
    for (double& v : values) {
      if (std::isnan(v)) v = 0.0;  // single-pair cohorts have no shuffle pool
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

model::SubjectData load_subject_features(const SubjectRecord& rec, const DatasetManifest& manifest,
                                         const FeatureParams& params, model::Modality subset,
                                         train::Task task) {
  auto need = [&](model::Modality m) {
    return subset == model::Modality::ensemble || subset == m;
  };
  auto missing = [&rec](const char* what) {
    return std::runtime_error("subject '" + rec.subject_id + "' lacks required " +
                              std::string(what) + " data (missing modalities fail fast)");
  };

  model::SubjectData s;
  s.id = rec.subject_id;
  s.phq9 = rec.phq9;
  s.label = train::phq9_to_class(rec.phq9, task);

  if (need(model::Modality::audio)) {
    if (!subject_has_modality(rec, model::Modality::audio)) throw missing("audio");
    const fs::path path = resolve(manifest.base_dir, *rec.audio);
    if (path.extension() == ".wav") {
      features::WavData wav = features::read_wav(path);
      auto samples = features::resample_nearest(wav.samples, wav.sample_rate,
                                                params.audio.stft.sample_rate);
      s.audio = features::audio_feature_matrix(samples, params.audio);
    } else {
      s.audio = csv::read_matrix(path).rows;
    }
  }
  if (need(model::Modality::video)) {
    if (!subject_has_modality(rec, model::Modality::video)) throw missing("video (emotion)");
    s.video = features::load_emotion_features(
        csv::read_matrix(resolve(manifest.base_dir, *rec.emotion)).rows);
  }
  if (need(model::Modality::gaze)) {
    if (!subject_has_modality(rec, model::Modality::gaze)) throw missing("gaze");
    if (rec.gaze) {
      s.gaze = csv::read_matrix(resolve(manifest.base_dir, *rec.gaze)).rows;
    } else {
      s.gaze = gaze_metric_rows(rec.gaze_pairs, manifest.base_dir, params.saliency_seed);
    }
  }
  return s;
}

model::Dataset load_dataset(const DatasetManifest& manifest, const FeatureParams& params,
                            model::Modality subset, train::Task task) {
  model::Dataset data;
  data.reserve(manifest.subjects.size());
  for (const auto& rec : manifest.subjects) {
    data.push_back(load_subject_features(rec, manifest, params, subset, task));
  }
  return data;
}

}  // namespace mfgcn::io
