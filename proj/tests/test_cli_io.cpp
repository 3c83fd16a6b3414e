#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfgcn/csv.hpp"
#include "mfgcn/experiment.hpp"
#include "mfgcn/manifest.hpp"
#include "mfgcn/rng.hpp"
#include "mfgcn/svg.hpp"
#include "mfgcn/synthetic.hpp"

using namespace mfgcn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mfgcn_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Minimal XML well-formedness scan: declarations skipped, every open tag
/// matched by its close tag, self-closing tags allowed.
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const std::size_t end = text.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      if (stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    if (self_closing) tag.pop_back();
    std::string name;
    for (char c : tag) {
      if (c == ' ' || c == '\t' || c == '\n') break;
      name.push_back(c);
    }
    if (name.empty()) return false;
    if (!self_closing) stack.push_back(name);
  }
  return stack.empty();
}

io::ExperimentConfig fast_config(int folds, int epochs) {
  io::ExperimentConfig cfg;
  cfg.train.k_folds = folds;
  cfg.train.max_epochs = epochs;
  cfg.train.early_stop_patience = epochs;
  cfg.train.batch_size = 8;
  cfg.train.seed = 5;
  cfg.model.seed = 5;
  cfg.model.hidden = 10;
  cfg.model.embedding_dim = 10;
  cfg.model.encoder_channels = 5;
  cfg.model.head_hidden1 = 10;
  cfg.model.head_hidden2 = 5;
  cfg.audio_max_len = 18;
  cfg.video_max_len = 14;
  cfg.gaze_max_len = 12;
  return cfg;
}

}  // namespace

TEST_CASE("manifest validation catches every malformed record") {
  const fs::path dir = fresh_dir("manifest");

  // a valid 3-subject cohort written by the synthetic generator
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 3, 1, false};
  const fs::path manifest_path = io::write_synthetic_cohort(spec, dir);
  const auto manifest = io::load_manifest(manifest_path);
  CHECK(manifest.subjects.size() == 3);

  auto write_manifest = [&](const json& j) {
    const fs::path p = dir / "bad.json";
    std::ofstream f(p);
    f << j.dump();
    f.close();
    return p;
  };

  // empty subject list
  json empty;
  empty["subjects"] = json::array();
  CHECK_THROWS_AS(io::load_manifest(write_manifest(empty)), std::runtime_error);

  // duplicate ids
  json dup;
  dup["subjects"] = json::array();
  for (int i = 0; i < 2; ++i) {
    dup["subjects"].push_back({{"id", "same"},
                               {"phq9", 5},
                               {"audio", "features/syn000_audio.csv"},
                               {"emotion", "features/syn000_emotion.csv"},
                               {"gaze", "features/syn000_gaze.csv"}});
  }
  CHECK_THROWS_AS(io::load_manifest(write_manifest(dup)), std::runtime_error);

  // out-of-range score
  json range;
  range["subjects"] = json::array({{{"id", "s"},
                                    {"phq9", 30},
                                    {"audio", "features/syn000_audio.csv"},
                                    {"emotion", "features/syn000_emotion.csv"},
                                    {"gaze", "features/syn000_gaze.csv"}}});
  CHECK_THROWS_AS(io::load_manifest(write_manifest(range)), std::runtime_error);

  // missing file
  json missing;
  missing["subjects"] = json::array({{{"id", "s"},
                                      {"phq9", 5},
                                      {"audio", "features/nope.csv"},
                                      {"emotion", "features/syn000_emotion.csv"},
                                      {"gaze", "features/syn000_gaze.csv"}}});
  CHECK_THROWS_AS(io::load_manifest(write_manifest(missing)), std::runtime_error);

  // the offending record is identified
  try {
    io::load_manifest(write_manifest(range));
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("'s'") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("synthetic cohorts load back with the labels implied by their scores") {
  const fs::path dir = fresh_dir("synload");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 9, 7, false};
  const auto manifest = io::load_manifest(io::write_synthetic_cohort(spec, dir));
  const auto data = io::load_dataset(manifest, io::FeatureParams{}, model::Modality::ensemble,
                                     train::Task::three_class);
  REQUIRE(data.size() == 9);
  const auto reference = io::make_synthetic_dataset(spec);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(data[i].id == reference[i].id);
    CHECK(data[i].label == reference[i].label);
    REQUIRE(data[i].audio.size() == reference[i].audio.size());
    // loss-free CSV round trip of the feature matrices
    for (std::size_t t = 0; t < data[i].audio.size(); ++t) {
      CHECK(std::memcmp(data[i].audio[t].data(), reference[i].audio[t].data(),
                        data[i].audio[t].size() * sizeof(double)) == 0);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("wav-backed synthetic cohorts run the audio extractors at load") {
  const fs::path dir = fresh_dir("synwav");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 3, 11, true};
  const auto manifest = io::load_manifest(io::write_synthetic_cohort(spec, dir));
  io::FeatureParams params;
  const auto data = io::load_dataset(manifest, params, model::Modality::ensemble,
                                     train::Task::three_class);
  REQUIRE(data.size() == 3);
  // mel + chroma + mfcc columns
  const std::size_t width = static_cast<std::size_t>(params.audio.n_mels + 12 + params.audio.n_mfcc);
  for (const auto& s : data) {
    REQUIRE_FALSE(s.audio.empty());
    CHECK(s.audio[0].size() == width);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing modality fails fast under ensemble mode") {
  const fs::path dir = fresh_dir("missingmod");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 3, 3, false};
  const fs::path manifest_path = io::write_synthetic_cohort(spec, dir);

  // strip the gaze entry from one subject
  std::ifstream in(manifest_path);
  json j;
  in >> j;
  in.close();
  j["subjects"][1].erase("gaze");
  std::ofstream out(manifest_path);
  out << j.dump();
  out.close();

  const auto manifest = io::load_manifest(manifest_path);
  CHECK_THROWS_AS(io::load_dataset(manifest, io::FeatureParams{}, model::Modality::ensemble,
                                   train::Task::three_class),
                  std::runtime_error);
  // audio-only mode still loads
  const auto audio_only = io::load_dataset(manifest, io::FeatureParams{}, model::Modality::audio,
                                           train::Task::three_class);
  CHECK(audio_only.size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("gaze metric rows come from fixation/saliency map pairs in report order") {
  const fs::path dir = fresh_dir("gazepairs");
  Rng rng(3);
  std::vector<io::GazePairPaths> pairs;
  for (int p = 0; p < 3; ++p) {
    std::vector<std::vector<double>> fix(6, std::vector<double>(6, 0.0));
    for (int k = 0; k < 5; ++k) fix[rng.below(6)][rng.below(6)] = 1.0;
    std::vector<std::vector<double>> sal(6, std::vector<double>(6, 0.0));
    for (auto& row : sal) {
      for (auto& v : row) v = rng.uniform(0.01, 1.0);
    }
    const fs::path fp = dir / ("fix" + std::to_string(p) + ".csv");
    const fs::path sp = dir / ("sal" + std::to_string(p) + ".csv");
    csv::write_plain_matrix(fp, fix);
    csv::write_plain_matrix(sp, sal);
    pairs.push_back({fp, sp});
  }
  const auto rows = io::gaze_metric_rows(pairs, dir, 1);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 8);
    // auc_borji, auc_judd in [0,1]; kldiv >= 0
    CHECK(row[0] >= 0.0);
    CHECK(row[0] <= 1.0);
    CHECK(row[1] >= 0.0);
    CHECK(row[1] <= 1.0);
    CHECK(row[3] >= -1e-12);
  }
  fs::remove_all(dir);
}

TEST_CASE("csv doubles round-trip bit-exactly") {
  const fs::path dir = fresh_dir("csv");
  Rng rng(17);
  std::vector<std::vector<double>> rows(4, std::vector<double>(5));
  for (auto& row : rows) {
    for (auto& v : row) v = rng.normal() * std::pow(10.0, rng.uniform(-8.0, 8.0));
  }
  rows[0][0] = 1.0 / 3.0;
  rows[0][1] = 1e-300;
  const fs::path path = dir / "m.csv";
  csv::write_matrix(path, {"a", "b", "c", "d", "e"}, rows);
  const auto back = csv::read_matrix(path);
  REQUIRE(back.rows.size() == rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    CHECK(std::memcmp(back.rows[r].data(), rows[r].data(), rows[r].size() * sizeof(double)) == 0);
  }
  fs::remove_all(dir);
}

TEST_CASE("svg output is well-formed XML") {
  std::vector<train::RocCurve> curves(2);
  curves[0].class_index = 0;
  curves[0].fpr = {0.0, 0.2, 1.0};
  curves[0].tpr = {0.0, 0.8, 1.0};
  curves[0].thresholds = {1.0, 0.5, 0.0};
  curves[0].auc = 0.9;
  curves[1].class_index = 1;
  curves[1].defined = false;
  const std::string roc = svg::render_roc("roc <test> & more", curves);
  CHECK(xml_well_formed(roc));

  std::vector<svg::BoxSeries> series = {{"f2", {0.5, 0.6, 0.7, 0.8}},
                                        {"recall", {0.4, 0.5, 0.9, 0.6}}};
  const std::string box = svg::render_box_plot("per-fold", series);
  CHECK(xml_well_formed(box));

  // sanity-check the checker itself
  CHECK_FALSE(xml_well_formed("<a><b></a></b>"));
  CHECK(xml_well_formed("<a><b/></a>"));
}

TEST_CASE("run_experiment writes a complete, reproducible run directory") {
  const fs::path dir = fresh_dir("runexp");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 12, 13, false};
  const auto manifest = io::load_manifest(io::write_synthetic_cohort(spec, dir / "cohort"));
  const auto cfg = fast_config(/*folds=*/3, /*epochs=*/10);

  const auto result = io::run_experiment(manifest, cfg, dir / "runs");
  CHECK(fs::exists(result.run_dir / "config.json"));
  CHECK(fs::exists(result.run_dir / "folds.json"));
  CHECK(fs::exists(result.run_dir / "metrics.json"));
  CHECK(fs::exists(result.run_dir / "per_fold_metrics.csv"));
  CHECK(fs::exists(result.run_dir / "roc_pooled.csv"));
  CHECK(fs::exists(result.run_dir / "roc.svg"));
  CHECK(fs::exists(result.run_dir / "boxplot.svg"));
  CHECK(fs::exists(result.run_dir / "summary.txt"));
  CHECK_FALSE(fs::exists(result.run_dir / "FAILED"));

  // box-plot CSV: one row per fold
  const auto box = csv::read(result.run_dir / "per_fold_metrics.csv");
  CHECK(box.rows.size() == 3);

  // ROC CSV has monotone nondecreasing fpr within each class
  const auto roc = csv::read(result.run_dir / "roc_pooled.csv");
  double prev_fpr = 0.0;
  std::string prev_class;
  for (const auto& row : roc.rows) {
    if (row[0] != prev_class) {
      prev_class = row[0];
      prev_fpr = 0.0;
    }
    const double fpr = csv::parse_double(row[1]);
    CHECK(fpr >= prev_fpr - 1e-15);
    prev_fpr = fpr;
  }

  // SVGs are valid XML
  for (const char* name : {"roc.svg", "boxplot.svg"}) {
    std::ifstream f(result.run_dir / name);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(xml_well_formed(ss.str()));
  }

  // the emitted ROC CSV is a loss-free round trip of the pooled report
  std::size_t roc_rows = 0;
  for (const auto& curve : result.pooled.roc) {
    if (!curve.defined) continue;
    roc_rows += curve.fpr.size();
  }
  REQUIRE(roc.rows.size() == roc_rows);
  std::size_t row_idx = 0;
  for (const auto& curve : result.pooled.roc) {
    if (!curve.defined) continue;
    for (std::size_t i = 0; i < curve.fpr.size(); ++i, ++row_idx) {
      CHECK(csv::parse_double(roc.rows[row_idx][1]) == curve.fpr[i]);
      CHECK(csv::parse_double(roc.rows[row_idx][2]) == curve.tpr[i]);
      CHECK(csv::parse_double(roc.rows[row_idx][3]) == curve.thresholds[i]);
    }
  }

  // per-fold checkpoints load back
  const auto reloaded = model::MffbmModel::load(result.run_dir / "fold_0" / "model.json");
  CHECK(reloaded.config().hidden == cfg.model.hidden);

  // identical seeds reproduce identical aggregated metrics
  const auto rerun = io::run_experiment(manifest, cfg, dir / "runs2");
  CHECK(rerun.mean_weighted_f2 == result.mean_weighted_f2);
  CHECK(rerun.mean_accuracy == result.mean_accuracy);
  CHECK(rerun.pooled.accuracy == result.pooled.accuracy);

  // parallel folds change nothing
  auto par_cfg = cfg;
  par_cfg.parallel_folds = true;
  const auto par = io::run_experiment(manifest, par_cfg, dir / "runs3");
  CHECK(par.mean_weighted_f2 == result.mean_weighted_f2);
  fs::remove_all(dir);
}

TEST_CASE("failed stages leave a FAILED marker and a stage name") {
  const fs::path dir = fresh_dir("failrun");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 5, 17, false};
  const auto manifest = io::load_manifest(io::write_synthetic_cohort(spec, dir / "cohort"));
  auto cfg = fast_config(/*folds=*/8, /*epochs=*/3);  // 8 folds > 5 subjects
  try {
    io::run_experiment(manifest, cfg, dir / "runs");
    CHECK(false);
  } catch (const io::StageError& e) {
    CHECK(e.stage() == "folds");
  }
  bool found_marker = false;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "runs")) {
    if (entry.path().filename() == "FAILED") found_marker = true;
  }
  CHECK(found_marker);
  fs::remove_all(dir);
}

TEST_CASE("augmented samples never derive from test subjects") {
  const fs::path dir = fresh_dir("augiso");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 12, 19, false};
  const auto data = io::make_synthetic_dataset(spec);

  std::vector<std::string> ids;
  std::vector<int> labels;
  for (const auto& s : data) {
    ids.push_back(s.id);
    labels.push_back(s.label);
  }
  const auto folds = train::kfold_split(ids, labels, 3, 19);
  for (const auto& fold : folds) {
    model::Dataset train_set;
    for (const auto& s : data) {
      if (std::find(fold.train_ids.begin(), fold.train_ids.end(), s.id) != fold.train_ids.end()) {
        train_set.push_back(s);
      }
    }
    const auto augmented = io::augment_training_set(train_set, 3, 4, 19);
    CHECK(augmented.size() == train_set.size() * 4);
    const std::set<std::string> test_ids(fold.test_ids.begin(), fold.test_ids.end());
    for (const auto& s : augmented) {
      const std::string base = s.id.substr(0, s.id.find('#'));
      CHECK(test_ids.count(base) == 0);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("ablation emits two arms on identical folds") {
  const fs::path dir = fresh_dir("ablate");
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::xor_cross_modal, 12, 23, false};
  const auto manifest = io::load_manifest(io::write_synthetic_cohort(spec, dir / "cohort"));
  auto cfg = fast_config(/*folds=*/3, /*epochs=*/8);
  cfg.train.task = train::Task::binary;
  cfg.model.classes = 2;
  cfg.model.n_layers = 1;

  const auto result = io::ablate_cross_modality(manifest, cfg, dir / "runs");
  CHECK(fs::exists(result.run_dir / "ablation.json"));

  std::ifstream f(result.run_dir / "ablation.json");
  json j;
  f >> j;
  REQUIRE(j.contains("arms"));
  CHECK(j["arms"].size() == 2);
  CHECK(j.contains("with_cross_modality"));
  CHECK(j.contains("without_cross_modality"));

  // identical folds in both arms
  REQUIRE(result.with_cross_modality.folds.size() == result.without_cross_modality.folds.size());
  for (std::size_t i = 0; i < result.with_cross_modality.folds.size(); ++i) {
    CHECK(result.with_cross_modality.folds[i].test_ids ==
          result.without_cross_modality.folds[i].test_ids);
  }
  fs::remove_all(dir);
}

TEST_CASE("analyze_spectrum rows carry tiny errors for every polynomial kernel") {
  io::SpectrumRequest req;
  req.family = "cycle";
  req.n = 8;
  req.kernels = {"identity", "adjacency", "laplacian", "k1", "k2", "kcombined", "gcn", "block",
                 "highpass", "highpass_neg"};
  req.phi = 0.5;
  req.a = 0.5;
  const auto rows = io::analyze_spectrum(req);
  CHECK(rows.size() == req.kernels.size() * 8);
  for (const auto& row : rows) {
    CHECK(row.abs_error < 1e-10);
  }

  io::SpectrumRequest bad = req;
  bad.family = "hypercube";
  CHECK_THROWS_AS(io::analyze_spectrum(bad), std::invalid_argument);
  bad = req;
  bad.n = 40;
  CHECK_THROWS_AS(io::analyze_spectrum(bad), std::invalid_argument);
  bad = req;
  bad.family = "path";  // not regular: the gcn profile must refuse
  bad.kernels = {"gcn"};
  bad.n = 5;
  CHECK_THROWS_AS(io::analyze_spectrum(bad), std::invalid_argument);

  const fs::path dir = fresh_dir("spectrum");
  io::write_spectrum_csv(dir / "s.csv", rows);
  const auto table = csv::read(dir / "s.csv");
  CHECK(table.rows.size() == rows.size());
  CHECK(table.header.size() == 7);
  fs::remove_all(dir);
}

TEST_CASE("emit_report marks missing sections on an incomplete run") {
  const fs::path dir = fresh_dir("partial");
  io::emit_report(dir);  // nothing there at all
  std::ifstream f(dir / "summary.txt");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().find("MISSING") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("availability flags override file presence") {
  io::SubjectRecord rec;
  rec.subject_id = "s";
  rec.audio = fs::path("a.csv");
  rec.emotion = fs::path("e.csv");
  rec.gaze = fs::path("g.csv");
  CHECK(io::subject_has_modality(rec, model::Modality::ensemble));
  rec.modalities = {"audio", "video"};  // gaze flagged unavailable
  CHECK(io::subject_has_modality(rec, model::Modality::audio));
  CHECK_FALSE(io::subject_has_modality(rec, model::Modality::gaze));
  CHECK_FALSE(io::subject_has_modality(rec, model::Modality::ensemble));
}

TEST_CASE("experiment config round-trips through JSON overrides") {
  const fs::path dir = fresh_dir("cfg");
  io::ExperimentConfig cfg = fast_config(4, 7);
  cfg.model.phi = 0.25;
  cfg.model.phi_i = {0.3, 0.7};
  cfg.augment_times = 2;
  const fs::path path = dir / "config.json";
  std::ofstream f(path);
  f << cfg.to_json_string();
  f.close();

  const auto loaded = io::ExperimentConfig::from_json_file(path);
  CHECK(loaded.train.k_folds == 4);
  CHECK(loaded.train.max_epochs == 7);
  CHECK(loaded.model.phi == 0.25);
  CHECK(loaded.model.phi_i == std::vector<double>{0.3, 0.7});
  CHECK(loaded.augment_times == 2);
  fs::remove_all(dir);
}
