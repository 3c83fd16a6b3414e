#include "mfgcn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfgcn/csv.hpp"
#include "mfgcn/graph_spectral.hpp"
#include "mfgcn/svg.hpp"

namespace mfgcn::io {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config -------------------------------------------------------------------

namespace {

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"max_epochs", c.train.max_epochs},
                {"early_stop_patience", c.train.early_stop_patience},
                {"batch_size", c.train.batch_size},
                {"seed", c.train.seed},
                {"k_folds", c.train.k_folds},
                {"task", train::task_name(c.train.task)},
                {"validation_fraction", c.train.validation_fraction}};
  j["model"] = {{"phi", c.model.phi},
                {"phi_i", c.model.phi_i},
                {"a", c.model.a},
                {"k", c.model.k},
                {"n_layers", c.model.n_layers},
                {"hidden", c.model.hidden},
                {"classes", c.model.classes},
                {"seed", c.model.seed},
                {"encoder_channels", c.model.encoder_channels},
                {"encoder_kernel", c.model.encoder_kernel},
                {"encoder_pool", c.model.encoder_pool},
                {"embedding_dim", c.model.embedding_dim},
                {"head_hidden1", c.model.head_hidden1},
                {"head_hidden2", c.model.head_hidden2},
                {"modality", model::modality_name(c.model.modality)}};
  if (c.model.mask.has_value()) j["model"]["mask"] = *c.model.mask;
  j["features"] = {{"sample_rate", c.features.audio.stft.sample_rate},
                   {"window", c.features.audio.stft.window},
                   {"hop", c.features.audio.stft.hop},
                   {"n_mels", c.features.audio.n_mels},
                   {"n_mfcc", c.features.audio.n_mfcc},
                   {"chroma_cutoff_hz", c.features.audio.chroma_cutoff_hz},
                   {"chroma_ref_hz", c.features.audio.chroma_ref_hz},
                   {"saliency_seed", c.features.saliency_seed}};
  j["audio_max_len"] = c.audio_max_len;
  j["video_max_len"] = c.video_max_len;
  j["gaze_max_len"] = c.gaze_max_len;
  j["augment_times"] = c.augment_times;
  j["augment_blocks"] = c.augment_blocks;
  j["parallel_folds"] = c.parallel_folds;
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config: " + path.string() + " is not valid JSON: " + e.what());
  }

  ExperimentConfig c;
  if (j.contains("train")) {
    const auto& t = j["train"];
    maybe(t, "learning_rate", c.train.learning_rate);
    maybe(t, "max_epochs", c.train.max_epochs);
    maybe(t, "early_stop_patience", c.train.early_stop_patience);
    maybe(t, "batch_size", c.train.batch_size);
    maybe(t, "seed", c.train.seed);
    maybe(t, "k_folds", c.train.k_folds);
    maybe(t, "validation_fraction", c.train.validation_fraction);
    if (t.contains("task")) c.train.task = train::task_from_name(t.at("task").get<std::string>());
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    maybe(m, "phi", c.model.phi);
    maybe(m, "phi_i", c.model.phi_i);
    maybe(m, "a", c.model.a);
    maybe(m, "k", c.model.k);
    maybe(m, "n_layers", c.model.n_layers);
    maybe(m, "hidden", c.model.hidden);
    maybe(m, "seed", c.model.seed);
    maybe(m, "encoder_channels", c.model.encoder_channels);
    maybe(m, "encoder_kernel", c.model.encoder_kernel);
    maybe(m, "encoder_pool", c.model.encoder_pool);
    maybe(m, "embedding_dim", c.model.embedding_dim);
    maybe(m, "head_hidden1", c.model.head_hidden1);
    maybe(m, "head_hidden2", c.model.head_hidden2);
    if (m.contains("modality")) {
      c.model.modality = model::modality_from_name(m.at("modality").get<std::string>());
    }
    if (m.contains("mask")) c.model.mask = m.at("mask").get<std::vector<double>>();
  }
  if (j.contains("features")) {
    const auto& ft = j["features"];
    maybe(ft, "sample_rate", c.features.audio.stft.sample_rate);
    maybe(ft, "window", c.features.audio.stft.window);
    maybe(ft, "hop", c.features.audio.stft.hop);
    maybe(ft, "n_mels", c.features.audio.n_mels);
    maybe(ft, "n_mfcc", c.features.audio.n_mfcc);
    maybe(ft, "chroma_cutoff_hz", c.features.audio.chroma_cutoff_hz);
    maybe(ft, "chroma_ref_hz", c.features.audio.chroma_ref_hz);
    maybe(ft, "saliency_seed", c.features.saliency_seed);
  }
  maybe(j, "audio_max_len", c.audio_max_len);
  maybe(j, "video_max_len", c.video_max_len);
  maybe(j, "gaze_max_len", c.gaze_max_len);
  maybe(j, "augment_times", c.augment_times);
  maybe(j, "augment_blocks", c.augment_blocks);
  maybe(j, "parallel_folds", c.parallel_folds);
  return c;
}

std::string ExperimentConfig::to_json_string() const { return config_to_json(*this).dump(1); }

// --- report serialization -------------------------------------------------------

namespace {

json report_to_json(const train::MetricsReport& r) {
  json j;
  j["n_classes"] = r.n_classes;
  j["n_samples"] = r.n_samples;
  j["confusion"] = r.confusion;
  j["accuracy"] = r.accuracy;
  j["weighted"] = {{"precision", r.weighted_precision},
                   {"recall", r.weighted_recall},
                   {"specificity", r.weighted_specificity},
                   {"f2", r.weighted_f2}};
  json per_class = json::array();
  for (const auto& m : r.per_class) {
    per_class.push_back({{"tp", m.tp},
                         {"fp", m.fp},
                         {"fn", m.fn},
                         {"tn", m.tn},
                         {"support", m.support},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"specificity", m.specificity},
                         {"f2", m.f2},
                         {"no_support", m.no_support}});
  }
  j["per_class"] = std::move(per_class);
  json roc = json::array();
  for (const auto& curve : r.roc) {
    roc.push_back({{"class", curve.class_index}, {"auc", curve.auc}, {"defined", curve.defined}});
  }
  j["roc_auc"] = std::move(roc);
  j["flags"] = r.flags;
  return j;
}

std::string timestamp_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto t = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02d-%02d%02d%02d%03d", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms.count()));
  return buf;
}

fs::path make_run_dir(const fs::path& out_root, const std::string& label) {
  fs::create_directories(out_root);
  std::string base = "run-" + timestamp_now();
  if (!label.empty()) base += "-" + label;
  fs::path dir = out_root / base;
  for (int suffix = 2; fs::exists(dir); ++suffix) {
    dir = out_root / (base + "-" + std::to_string(suffix));
  }
  fs::create_directories(dir);
  return dir;
}

void write_failed_marker(const fs::path& run_dir, const std::string& stage,
                         const std::string& message) {
  std::ofstream f(run_dir / "FAILED");
  f << "stage: " << stage << "\n" << message << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

const std::vector<std::string> kFoldMetricColumns = {
    "accuracy", "weighted_precision", "weighted_recall", "weighted_specificity", "weighted_f2"};

std::vector<double> fold_metric_values(const train::MetricsReport& r) {
  return {r.accuracy, r.weighted_precision, r.weighted_recall, r.weighted_specificity,
          r.weighted_f2};
}

}  // namespace

model::Dataset augment_training_set(const model::Dataset& train_set, int times, int n_blocks,
                                    std::uint64_t seed) {
  model::Dataset out = train_set;
  if (times <= 0) return out;
  for (const auto& subject : train_set) {
    const auto perms = train::augment_permutations(n_blocks, times, seed ^ fnv1a(subject.id));
    for (std::size_t p = 1; p < perms.size(); ++p) {  // index 0 is the identity
      model::SubjectData aug = subject;
      aug.id = subject.id + "#aug" + std::to_string(p);
      aug.audio = train::permute_row_blocks(subject.audio, n_blocks, perms[p]);
      aug.video = train::permute_row_blocks(subject.video, n_blocks, perms[p]);
      aug.gaze = train::permute_row_blocks(subject.gaze, n_blocks, perms[p]);
      out.push_back(std::move(aug));
    }
  }
  return out;
}

namespace {

/// Resolve encoder feature widths from the loaded data and reject
/// inconsistent cohorts.
void resolve_encoder_specs(model::ModelConfig& cfg, const model::Dataset& data,
                           const ExperimentConfig& exp) {
  auto width_of = [](const std::vector<std::vector<double>>& seq) {
    return seq.empty() ? 0 : static_cast<int>(seq[0].size());
  };
  const int max_lens[3] = {exp.audio_max_len, exp.video_max_len, exp.gaze_max_len};
  int widths[3] = {0, 0, 0};
  for (const auto& s : data) {
    const int w[3] = {width_of(s.audio), width_of(s.video), width_of(s.gaze)};
    for (int mi = 0; mi < 3; ++mi) {
      if (w[mi] == 0) continue;
      if (widths[mi] == 0) {
        widths[mi] = w[mi];
      } else if (widths[mi] != w[mi]) {
        throw std::runtime_error("subject '" + s.id + "' feature width " + std::to_string(w[mi]) +
                                 " differs from cohort width " + std::to_string(widths[mi]));
      }
    }
  }
  for (int mi = 0; mi < 3; ++mi) {
    cfg.encoders[mi].feature_dim = widths[mi];
    cfg.encoders[mi].max_len = max_lens[mi];
  }
}

FoldOutcome run_fold(const model::Dataset& data, const ExperimentConfig& config,
                     const train::FoldSplit& fold, const fs::path& run_dir) {
  std::map<std::string, const model::SubjectData*> by_id;
  for (const auto& s : data) by_id[s.id] = &s;

  model::Dataset train_set, test_set;
  for (const auto& id : fold.train_ids) train_set.push_back(*by_id.at(id));
  for (const auto& id : fold.test_ids) test_set.push_back(*by_id.at(id));

  if (config.augment_times > 0) {
    train_set = augment_training_set(train_set, config.augment_times, config.augment_blocks,
                                     config.train.seed);
  }

  model::ModelConfig mc = config.model;
  mc.classes = train::n_classes(config.train.task);
  mc.seed = config.model.seed + 7919ULL * static_cast<std::uint64_t>(fold.fold_index + 1);
  model::MffbmModel model(mc);

  train::TrainConfig tc = config.train;
  tc.seed = config.train.seed + 104729ULL * static_cast<std::uint64_t>(fold.fold_index + 1);

  FoldOutcome out;
  out.fold_index = fold.fold_index;
  out.test_ids = fold.test_ids;
  out.training = train::train(model, train_set, tc);

  const auto pred = train::predict(model, test_set);
  out.y_pred = pred.labels;
  out.y_scores = pred.scores;
  for (const auto& s : test_set) out.y_true.push_back(s.label);
  out.report = train::evaluate(out.y_true, out.y_pred, out.y_scores);

  const fs::path fold_dir = run_dir / ("fold_" + std::to_string(fold.fold_index));
  fs::create_directories(fold_dir);
  model.save(fold_dir / "model.json");
  return out;
}

std::vector<FoldOutcome> run_folds(const model::Dataset& data, const ExperimentConfig& config,
                                   const std::vector<train::FoldSplit>& folds,
                                   const fs::path& run_dir) {
  std::vector<FoldOutcome> outcomes(folds.size());
  if (config.parallel_folds && folds.size() > 1) {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(folds.size());
    for (std::size_t i = 0; i < folds.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          outcomes[i] = run_fold(data, config, folds[i], run_dir);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < folds.size(); ++i) {
      outcomes[i] = run_fold(data, config, folds[i], run_dir);
    }
  }
  return outcomes;
}

void write_fold_artifacts(const fs::path& run_dir, const ExperimentResult& result) {
  // folds.json
  json folds = json::array();
  for (const auto& f : result.folds) {
    folds.push_back(
        {{"fold", f.fold_index}, {"train_ids", f.train_ids}, {"test_ids", f.test_ids}});
  }
  write_text(run_dir / "folds.json", json(folds).dump(1) + "\n");

  // per-fold reports and the box-plot CSV
  csv::Table box;
  box.header.push_back("fold");
  for (const auto& col : kFoldMetricColumns) box.header.push_back(col);
  for (const auto& o : result.outcomes) {
    const fs::path fold_dir = run_dir / ("fold_" + std::to_string(o.fold_index));
    fs::create_directories(fold_dir);
    write_text(fold_dir / "metrics.json", report_to_json(o.report).dump(1) + "\n");

    std::vector<std::string> row{std::to_string(o.fold_index)};
    for (double v : fold_metric_values(o.report)) row.push_back(csv::format_double(v));
    box.rows.push_back(std::move(row));
  }
  csv::write(run_dir / "per_fold_metrics.csv", box);

  // pooled ROC points
  csv::Table roc;
  roc.header = {"class", "fpr", "tpr", "threshold"};
  for (const auto& curve : result.pooled.roc) {
    if (!curve.defined) continue;
    for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
      roc.rows.push_back({std::to_string(curve.class_index), csv::format_double(curve.fpr[i]),
                          csv::format_double(curve.tpr[i]),
                          csv::format_double(curve.thresholds[i])});
    }
  }
  csv::write(run_dir / "roc_pooled.csv", roc);

  // aggregate metrics
  json agg;
  agg["n_folds"] = result.outcomes.size();
  json per_fold = json::array();
  std::vector<double> sums(kFoldMetricColumns.size(), 0.0);
  std::vector<double> sq(kFoldMetricColumns.size(), 0.0);
  for (const auto& o : result.outcomes) {
    const auto vals = fold_metric_values(o.report);
    json jf;
    jf["fold"] = o.fold_index;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      jf[kFoldMetricColumns[i]] = vals[i];
      sums[i] += vals[i];
      sq[i] += vals[i] * vals[i];
    }
    jf["epochs_run"] = o.training.history.size();
    jf["best_epoch"] = o.training.best_epoch;
    per_fold.push_back(std::move(jf));
  }
  agg["folds"] = std::move(per_fold);
  const double nf = static_cast<double>(result.outcomes.size());
  json mean, stdev;
  for (std::size_t i = 0; i < kFoldMetricColumns.size(); ++i) {
    const double mu = sums[i] / nf;
    mean[kFoldMetricColumns[i]] = mu;
    stdev[kFoldMetricColumns[i]] = std::sqrt(std::max(0.0, sq[i] / nf - mu * mu));
  }
  agg["mean"] = std::move(mean);
  agg["std"] = std::move(stdev);
  agg["pooled"] = report_to_json(result.pooled);
  write_text(run_dir / "metrics.json", agg.dump(1) + "\n");
}

ExperimentResult run_experiment_impl(const DatasetManifest& manifest,
                                     const ExperimentConfig& base_config, const fs::path& run_dir,
                                     std::string current_stage_label) {
  ExperimentConfig config = base_config;
  std::string stage = "validate";
  try {
    config.train.validate();
    for (const auto& rec : manifest.subjects) {
      if (!subject_has_modality(rec, config.model.modality)) {
        throw std::runtime_error("subject '" + rec.subject_id + "' lacks data for modality '" +
                                 model::modality_name(config.model.modality) + "'");
      }
    }

    stage = "features";
    model::Dataset data =
        load_dataset(manifest, config.features, config.model.modality, config.train.task);
    resolve_encoder_specs(config.model, data, config);
    write_text(run_dir / "config.json", config.to_json_string() + "\n");

    stage = "folds";
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& s : data) {
      ids.push_back(s.id);
      labels.push_back(s.label);
    }
    auto folds = train::kfold_split(ids, labels, config.train.k_folds, config.train.seed);

    stage = "train";
    ExperimentResult result;
    result.run_dir = run_dir;
    result.folds = folds;
    result.outcomes = run_folds(data, config, folds, run_dir);

    stage = "aggregate";
    std::vector<int> all_true, all_pred;
    std::vector<std::vector<double>> all_scores;
    double f2_sum = 0.0, rec_sum = 0.0, acc_sum = 0.0;
    for (const auto& o : result.outcomes) {
      all_true.insert(all_true.end(), o.y_true.begin(), o.y_true.end());
      all_pred.insert(all_pred.end(), o.y_pred.begin(), o.y_pred.end());
      all_scores.insert(all_scores.end(), o.y_scores.begin(), o.y_scores.end());
      f2_sum += o.report.weighted_f2;
      rec_sum += o.report.weighted_recall;
      acc_sum += o.report.accuracy;
    }
    result.pooled = train::evaluate(all_true, all_pred, all_scores);
    const double nf = static_cast<double>(result.outcomes.size());
    result.mean_weighted_f2 = f2_sum / nf;
    result.mean_weighted_recall = rec_sum / nf;
    result.mean_accuracy = acc_sum / nf;

    stage = "report";
    write_fold_artifacts(run_dir, result);
    return result;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    write_failed_marker(run_dir, current_stage_label.empty() ? stage : current_stage_label + stage,
                        e.what());
    throw StageError(stage, e.what());
  }
}

}  // namespace

ExperimentResult run_experiment(const DatasetManifest& manifest, const ExperimentConfig& config,
                                const fs::path& out_root, const std::string& label) {
  const fs::path run_dir = make_run_dir(out_root, label);
  auto result = run_experiment_impl(manifest, config, run_dir, "");
  emit_report(run_dir);
  return result;
}

AblationResult ablate_cross_modality(const DatasetManifest& manifest,
                                     const ExperimentConfig& config, const fs::path& out_root) {
  if (config.model.modality != model::Modality::ensemble) {
    throw StageError("validate", "ablation requires the ensemble modality");
  }
  if (config.model.n_layers < 1) {
    throw StageError("validate", "ablation needs n_layers >= 1 for the with-arm");
  }
  const fs::path run_dir = make_run_dir(out_root, "ablation");

  AblationResult result;
  result.run_dir = run_dir;

  fs::create_directories(run_dir / "with_cross_modality");
  fs::create_directories(run_dir / "without_cross_modality");

  // identical folds and seeds in both arms; only the trunk differs
  result.with_cross_modality =
      run_experiment_impl(manifest, config, run_dir / "with_cross_modality", "with:");
  emit_report(run_dir / "with_cross_modality");
  ExperimentConfig without = config;
  without.model.n_layers = 0;
  result.without_cross_modality =
      run_experiment_impl(manifest, without, run_dir / "without_cross_modality", "without:");
  emit_report(run_dir / "without_cross_modality");

  json j;
  j["arms"] = json::array({"with_cross_modality", "without_cross_modality"});
  auto arm_json = [](const ExperimentResult& r) {
    json a;
    a["mean_weighted_f2"] = r.mean_weighted_f2;
    a["mean_weighted_recall"] = r.mean_weighted_recall;
    a["mean_accuracy"] = r.mean_accuracy;
    a["pooled"] = report_to_json(r.pooled);
    json per_fold = json::array();
    for (const auto& o : r.outcomes) {
      per_fold.push_back({{"fold", o.fold_index}, {"weighted_f2", o.report.weighted_f2}});
    }
    a["folds"] = std::move(per_fold);
    return a;
  };
  j["with_cross_modality"] = arm_json(result.with_cross_modality);
  j["without_cross_modality"] = arm_json(result.without_cross_modality);
  write_text(run_dir / "ablation.json", j.dump(1) + "\n");
  return result;
}

void emit_report(const fs::path& run_dir) {
  std::ostringstream summary;
  summary << "run directory: " << run_dir.string() << "\n";

  bool have_metrics = false;
  json agg;
  if (fs::exists(run_dir / "metrics.json")) {
    std::ifstream f(run_dir / "metrics.json");
    f >> agg;
    have_metrics = true;
  }

  if (have_metrics) {
    summary << "folds: " << agg["n_folds"].get<int>() << "\n";
    summary << "mean over folds:\n";
    for (const auto& col : kFoldMetricColumns) {
      summary << "  " << col << ": " << agg["mean"][col].get<double>() << " (std "
              << agg["std"][col].get<double>() << ")\n";
    }
    const auto& pooled = agg["pooled"];
    summary << "pooled accuracy: " << pooled["accuracy"].get<double>() << "\n";
    summary << "pooled weighted f2: " << pooled["weighted"]["f2"].get<double>() << "\n";
    for (const auto& roc : pooled["roc_auc"]) {
      summary << "  class " << roc["class"].get<int>() << " auc: ";
      if (roc["defined"].get<bool>()) {
        summary << roc["auc"].get<double>();
      } else {
        summary << "undefined";
      }
      summary << "\n";
    }
  } else {
    summary << "metrics.json: MISSING (incomplete run)\n";
  }

  // ROC figure from the pooled curve points
  if (fs::exists(run_dir / "roc_pooled.csv")) {
    const auto table = csv::read(run_dir / "roc_pooled.csv");
    std::map<int, train::RocCurve> curves;
    for (const auto& row : table.rows) {
      const int cls = static_cast<int>(csv::parse_double(row[0]));
      auto& c = curves[cls];
      c.class_index = cls;
      c.fpr.push_back(csv::parse_double(row[1]));
      c.tpr.push_back(csv::parse_double(row[2]));
      c.thresholds.push_back(csv::parse_double(row[3]));
    }
    std::vector<train::RocCurve> list;
    for (auto& [cls, curve] : curves) {
      if (have_metrics) {
        for (const auto& roc : agg["pooled"]["roc_auc"]) {
          if (roc["class"].get<int>() == cls) curve.auc = roc.value("auc", 0.0);
        }
      }
      list.push_back(curve);
    }
    write_text(run_dir / "roc.svg", svg::render_roc("one-vs-all ROC (pooled folds)", list));
  } else {
    summary << "roc_pooled.csv: MISSING\n";
  }

  // box plot from the per-fold metric CSV
  if (fs::exists(run_dir / "per_fold_metrics.csv")) {
    const auto table = csv::read(run_dir / "per_fold_metrics.csv");
    std::vector<svg::BoxSeries> series;
    for (std::size_t col = 1; col < table.header.size(); ++col) {
      svg::BoxSeries s;
      s.label = table.header[col];
      for (const auto& row : table.rows) s.values.push_back(csv::parse_double(row[col]));
      series.push_back(std::move(s));
    }
    write_text(run_dir / "boxplot.svg", svg::render_box_plot("per-fold metrics", series));
  } else {
    summary << "per_fold_metrics.csv: MISSING\n";
  }

  write_text(run_dir / "summary.txt", summary.str());
}

// --- spectrum analysis ------------------------------------------------------------

namespace {

spectral::ModalityGraph build_family(const SpectrumRequest& req) {
  if (req.n < 1 || req.n > 32) {
    throw std::invalid_argument("analyze_spectrum: n must be in [1,32]");
  }
  if (req.family == "complete") return spectral::ModalityGraph::complete(req.n);
  if (req.family == "cycle") return spectral::ModalityGraph::cycle(req.n);
  if (req.family == "path") return spectral::ModalityGraph::path(req.n);
  if (req.family == "erdos_renyi") {
    return spectral::ModalityGraph::erdos_renyi(req.n, req.er_prob, req.er_seed);
  }
  throw std::invalid_argument("analyze_spectrum: unknown graph family '" + req.family +
                              "' (complete|cycle|path|erdos_renyi)");
}

int regular_degree(const spectral::ModalityGraph& g) {
  int degree = -1;
  for (int i = 0; i < g.n_nodes; ++i) {
    int d = 0;
    for (int j = 0; j < g.n_nodes; ++j) d += static_cast<int>(g.adjacency.at(i, j));
    if (degree < 0) degree = d;
    if (d != degree) return -1;
  }
  return degree;
}

}  // namespace

std::vector<SpectrumRow> analyze_spectrum(const SpectrumRequest& req) {
  const auto g = build_family(req);
  const auto a_norm = spectral::normalize_adjacency(g);
  const auto lap = spectral::laplacian(a_norm);
  const auto decomp = spectral::eigendecompose(lap);
  const auto kernels = spectral::mffbm_kernels(a_norm, req.phi, req.a);

  std::vector<SpectrumRow> rows;
  auto emit = [&](const std::string& kernel_name, const spectral::Mat& kernel,
                  auto analytic_fn, const spectral::SpectralDecomposition& basis) {
    const auto response = spectral::frequency_response(kernel, basis);
    for (std::size_t i = 0; i < response.size(); ++i) {
      SpectrumRow row;
      row.family = req.family;
      row.n = req.n;
      row.lambda = basis.eigenvalues[i];
      row.kernel = kernel_name;
      row.numeric_response = response[i];
      row.analytic_response = analytic_fn(basis.eigenvalues[i]);
      row.abs_error = std::abs(row.numeric_response - row.analytic_response);
      rows.push_back(row);
    }
  };

  const double phi = req.phi, a = req.a;
  for (const auto& name : req.kernels) {
    if (name == "identity") {
      emit(name, spectral::Mat::identity(g.n_nodes), [](double) { return 1.0; }, decomp);
    } else if (name == "adjacency") {
      emit(name, a_norm, [](double l) { return 1.0 - l; }, decomp);
    } else if (name == "laplacian") {
      emit(name, lap, [](double l) { return l; }, decomp);
    } else if (name == "k1") {
      emit(name, kernels.low_two_layer,
           [phi](double l) { return (1.0 - l) * (1.0 - l) - (1.0 - phi) * (1.0 - l); }, decomp);
    } else if (name == "k2") {
      emit(name, kernels.high_two_layer,
           [phi](double l) {
             return (1.0 - l) * (1.0 - l) - phi * (1.0 - l) + (1.0 - phi);
           },
           decomp);
    } else if (name == "kcombined") {
      emit(name, kernels.combined,
           [phi](double l) {
             const double g1 = (1.0 - l) * (1.0 - l) - (1.0 - phi) * (1.0 - l);
             const double g2 = (1.0 - l) * (1.0 - l) - phi * (1.0 - l) + (1.0 - phi);
             return phi * g1 + (1.0 - phi) * g2;
           },
           decomp);
    } else if (name == "highpass") {
      emit(name, spectral::highpass_kernel(a_norm, a),
           [a](double l) { return a * (1.0 - l) - (1.0 - a); }, decomp);
    } else if (name == "highpass_neg") {
      emit(name, spectral::highpass_kernel_negated(a_norm, a),
           [a](double l) { return (1.0 - a) - a * (1.0 - l); }, decomp);
    } else if (name == "block") {
      emit(name, spectral::block_kernel(a_norm, phi, a),
           [phi, a](double l) {
             return phi * (1.0 - l) + (1.0 - phi) * (a * (1.0 - l) - (1.0 - a));
           },
           decomp);
    } else if (name == "gcn") {
      const int p = regular_degree(g);
      if (p < 1) {
        throw std::invalid_argument(
            "analyze_spectrum: the gcn profile requires a regular graph; '" + req.family +
            "' with n=" + std::to_string(req.n) + " is not");
      }
      const auto lap_nl = spectral::laplacian_without_self_loops(g);
      const auto decomp_nl = spectral::eigendecompose(lap_nl);
      emit(name, a_norm, [p](double l) { return spectral::gcn_profile(p, l); }, decomp_nl);
    } else {
      throw std::invalid_argument("analyze_spectrum: unknown kernel '" + name + "'");
    }
  }
  return rows;
}

void write_spectrum_csv(const fs::path& path, const std::vector<SpectrumRow>& rows) {
  csv::Table t;
  t.header = {"family", "n", "lambda", "kernel", "numeric_response", "analytic_response",
              "abs_error"};
  for (const auto& r : rows) {
    t.rows.push_back({r.family, std::to_string(r.n), csv::format_double(r.lambda), r.kernel,
                      csv::format_double(r.numeric_response),
                      csv::format_double(r.analytic_response), csv::format_double(r.abs_error)});
  }
  csv::write(path, t);
}

}  // namespace mfgcn::io
