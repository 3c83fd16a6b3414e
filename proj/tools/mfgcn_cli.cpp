// Command-line front end: dataset preparation, training/evaluation runs,
// ablation, spectral analysis, and report generation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfgcn/csv.hpp"
#include "mfgcn/emotion.hpp"
#include "mfgcn/experiment.hpp"
#include "mfgcn/manifest.hpp"
#include "mfgcn/saliency.hpp"
#include "mfgcn/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string manifest_path;
  std::string config_path;
  std::string out_dir = "runs";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string modality = "ensemble";
  bool modality_set = false;
  int folds = 0;
  bool parallel_folds = false;
  std::string task;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_manifest) {
  auto* m = cmd->add_option("--manifest", o.manifest_path, "dataset manifest JSON");
  if (needs_manifest) m->required();
  cmd->add_option("--config", o.config_path, "experiment config JSON (overrides defaults)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "base seed")->each([&o](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("--modality", o.modality, "ensemble|audio|video|gaze")
      ->each([&o](const std::string&) { o.modality_set = true; });
  cmd->add_option("--folds", o.folds, "cross-validation fold count");
  cmd->add_flag("--parallel-folds", o.parallel_folds, "train folds concurrently");
  cmd->add_option("--task", o.task, "binary|three_class");
}

mfgcn::io::ExperimentConfig build_config(const CommonOpts& o) {
  mfgcn::io::ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = mfgcn::io::ExperimentConfig::from_json_file(o.config_path);
  }
  if (o.seed_set) {
    cfg.train.seed = o.seed;
    cfg.model.seed = o.seed;
  }
  if (o.modality_set) cfg.model.modality = mfgcn::model::modality_from_name(o.modality);
  if (o.folds > 0) cfg.train.k_folds = o.folds;
  if (o.parallel_folds) cfg.parallel_folds = true;
  if (!o.task.empty()) cfg.train.task = mfgcn::train::task_from_name(o.task);
  cfg.model.classes = mfgcn::train::n_classes(cfg.train.task);
  return cfg;
}

int fail_with_json(const std::string& stage, const std::string& message) {
  json err;
  err["error"] = {{"stage", stage}, {"message", message}};
  std::cerr << err.dump() << std::endl;
  return 1;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

/// Grid search over {phi, a, k, L}: one cross-validated run per combination,
/// ranked by mean weighted F2 over folds.
int run_sweep(const mfgcn::io::DatasetManifest& manifest, const mfgcn::io::ExperimentConfig& base,
              const std::string& out_dir, const std::string& sweep_phi, const std::string& sweep_a,
              const std::string& sweep_k, const std::string& sweep_layers) {
  auto doubles_or = [](const std::string& csv, double fallback) {
    std::vector<double> out;
    for (const auto& tok : split_list(csv)) out.push_back(std::stod(tok));
    if (out.empty()) out.push_back(fallback);
    return out;
  };
  auto ints_or = [](const std::string& csv, int fallback) {
    std::vector<int> out;
    for (const auto& tok : split_list(csv)) out.push_back(std::stoi(tok));
    if (out.empty()) out.push_back(fallback);
    return out;
  };
  const auto phis = doubles_or(sweep_phi, base.model.phi);
  const auto as = doubles_or(sweep_a, base.model.a);
  const auto ks = ints_or(sweep_k, base.model.k);
  const auto layers = ints_or(sweep_layers, base.model.n_layers);

  json results = json::array();
  double best_f2 = -1.0;
  json best;
  for (double phi : phis) {
    for (double a : as) {
      for (int k : ks) {
        for (int n_layers : layers) {
          mfgcn::io::ExperimentConfig cfg = base;
          cfg.model.phi = phi;
          cfg.model.a = a;
          cfg.model.k = k;
          cfg.model.phi_i.clear();  // uniform weights for the swept k
          cfg.model.n_layers = n_layers;
          char label[64];
          std::snprintf(label, sizeof(label), "phi%.3g-a%.3g-k%d-L%d", phi, a, k, n_layers);
          const auto result = mfgcn::io::run_experiment(manifest, cfg, out_dir, label);
          json entry = {{"phi", phi},
                        {"a", a},
                        {"k", k},
                        {"n_layers", n_layers},
                        {"mean_weighted_f2", result.mean_weighted_f2},
                        {"mean_accuracy", result.mean_accuracy},
                        {"run_dir", result.run_dir.string()}};
          std::cout << label << ": mean weighted F2 " << result.mean_weighted_f2 << "\n";
          if (result.mean_weighted_f2 > best_f2) {
            best_f2 = result.mean_weighted_f2;
            best = entry;
          }
          results.push_back(std::move(entry));
        }
      }
    }
  }
  json sweep;
  sweep["results"] = std::move(results);
  sweep["best"] = best;
  fs::create_directories(out_dir);
  std::ofstream f(fs::path(out_dir) / "sweep.json");
  f << sweep.dump(1) << '\n';
  std::cout << "best: phi=" << best["phi"] << " a=" << best["a"] << " k=" << best["k"]
            << " L=" << best["n_layers"] << " (mean weighted F2 " << best_f2 << ")\n"
            << "sweep written to " << (fs::path(out_dir) / "sweep.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-frequency graph-convolutional fusion pipeline"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts, ablate_opts, extract_opts;

  // train
  auto* cmd_train = app.add_subcommand("train", "cross-validated training run");
  add_common(cmd_train, train_opts, true);
  std::string sweep_phi, sweep_a, sweep_k, sweep_layers;
  cmd_train->add_option("--sweep-phi", sweep_phi, "comma list of phi values to grid-search");
  cmd_train->add_option("--sweep-a", sweep_a, "comma list of a values to grid-search");
  cmd_train->add_option("--sweep-k", sweep_k, "comma list of filter counts to grid-search");
  cmd_train->add_option("--sweep-layers", sweep_layers, "comma list of layer counts");

  // evaluate
  auto* cmd_eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a manifest");
  add_common(cmd_eval, eval_opts, true);
  std::string checkpoint_path;
  cmd_eval->add_option("--checkpoint", checkpoint_path, "model checkpoint JSON")->required();

  // ablate
  auto* cmd_ablate = app.add_subcommand("ablate", "paired run with and without the graph trunk");
  add_common(cmd_ablate, ablate_opts, true);

  // extract-features
  auto* cmd_extract =
      app.add_subcommand("extract-features", "materialize per-subject feature CSVs");
  add_common(cmd_extract, extract_opts, true);

  // analyze-spectrum
  auto* cmd_spec = app.add_subcommand("analyze-spectrum", "kernel frequency responses as CSV");
  mfgcn::io::SpectrumRequest spec_req;
  std::string spec_kernels = "adjacency,k1,k2,kcombined";
  std::string spec_out;
  cmd_spec->add_option("--family", spec_req.family, "complete|cycle|path|erdos_renyi")->required();
  cmd_spec->add_option("--n", spec_req.n, "node count (<= 32)")->required();
  cmd_spec->add_option("--kernels", spec_kernels,
                       "comma list: identity,adjacency,laplacian,gcn,k1,k2,kcombined,highpass,"
                       "highpass_neg,block");
  cmd_spec->add_option("--phi", spec_req.phi, "balance phi in [0,1]");
  cmd_spec->add_option("--a", spec_req.a, "high-pass coefficient in [0,1]");
  cmd_spec->add_option("--p", spec_req.er_prob, "edge probability (erdos_renyi)");
  cmd_spec->add_option("--seed", spec_req.er_seed, "edge seed (erdos_renyi)");
  cmd_spec->add_option("--out", spec_out, "CSV path (stdout when omitted)");

  // make-synthetic
  auto* cmd_syn = app.add_subcommand("make-synthetic", "generate a seeded synthetic cohort");
  std::string syn_kind = "separable";
  int syn_subjects = 30;
  std::uint64_t syn_seed = 0;
  std::string syn_out = "synthetic";
  bool syn_wav = false;
  cmd_syn->add_option("--kind", syn_kind, "separable|xor");
  cmd_syn->add_option("--subjects", syn_subjects, "cohort size");
  cmd_syn->add_option("--seed", syn_seed, "seed");
  cmd_syn->add_option("--out", syn_out, "output directory");
  cmd_syn->add_flag("--audio-wav", syn_wav, "emit tone WAVs instead of audio feature CSVs");

  // report
  auto* cmd_report = app.add_subcommand("report", "summary and figures for a finished run");
  std::string report_dir;
  cmd_report->add_option("--run", report_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_train->parsed()) {
      const auto cfg = build_config(train_opts);
      const auto manifest = mfgcn::io::load_manifest(train_opts.manifest_path);
      if (!sweep_phi.empty() || !sweep_a.empty() || !sweep_k.empty() || !sweep_layers.empty()) {
        return run_sweep(manifest, cfg, train_opts.out_dir, sweep_phi, sweep_a, sweep_k,
                         sweep_layers);
      }
      const auto result = mfgcn::io::run_experiment(manifest, cfg, train_opts.out_dir);
      std::cout << "run directory: " << result.run_dir.string() << "\n"
                << "mean weighted F2 over folds: " << result.mean_weighted_f2 << "\n"
                << "pooled accuracy: " << result.pooled.accuracy << "\n";
      return 0;
    }

    if (cmd_eval->parsed()) {
      auto cfg = build_config(eval_opts);
      const auto manifest = mfgcn::io::load_manifest(eval_opts.manifest_path);
      auto model = mfgcn::model::MffbmModel::load(checkpoint_path);
      if (eval_opts.task.empty()) {
        // labels must match the checkpoint's head
        cfg.train.task = model.config().classes == 2 ? mfgcn::train::Task::binary
                                                     : mfgcn::train::Task::three_class;
      }
      const auto data = mfgcn::io::load_dataset(manifest, cfg.features, model.config().modality,
                                                cfg.train.task);
      const auto pred = mfgcn::train::predict(model, data);
      std::vector<int> y_true;
      for (const auto& s : data) y_true.push_back(s.label);
      const auto report = mfgcn::train::evaluate(y_true, pred.labels, pred.scores);
      std::cout << "n=" << report.n_samples << " accuracy=" << report.accuracy
                << " weighted_f2=" << report.weighted_f2
                << " weighted_recall=" << report.weighted_recall << "\n";
      return 0;
    }

    if (cmd_ablate->parsed()) {
      const auto cfg = build_config(ablate_opts);
      const auto manifest = mfgcn::io::load_manifest(ablate_opts.manifest_path);
      const auto result = mfgcn::io::ablate_cross_modality(manifest, cfg, ablate_opts.out_dir);
      std::cout << "run directory: " << result.run_dir.string() << "\n"
                << "with cross-modality    mean weighted F2: "
                << result.with_cross_modality.mean_weighted_f2 << "\n"
                << "without cross-modality mean weighted F2: "
                << result.without_cross_modality.mean_weighted_f2 << "\n";
      return 0;
    }

    if (cmd_extract->parsed()) {
      const auto cfg = build_config(extract_opts);
      const auto manifest = mfgcn::io::load_manifest(extract_opts.manifest_path);
      const fs::path out(extract_opts.out_dir);
      fs::create_directories(out / "features");

      json subjects = json::array();
      for (const auto& rec : manifest.subjects) {
        const auto s = mfgcn::io::load_subject_features(rec, manifest, cfg.features,
                                                        cfg.model.modality, cfg.train.task);
        json sj;
        sj["id"] = s.id;
        sj["phq9"] = s.phq9;
        if (!s.audio.empty()) {
          std::vector<std::string> header;
          if (rec.audio && rec.audio->extension() == ".wav") {
            header = mfgcn::features::audio_feature_header(cfg.features.audio);
          } else {
            for (std::size_t c = 0; c < s.audio[0].size(); ++c) {
              header.push_back("a" + std::to_string(c));
            }
          }
          const std::string rel = "features/" + s.id + "_audio.csv";
          mfgcn::csv::write_matrix(out / rel, header, s.audio);
          sj["audio"] = rel;
        }
        if (!s.video.empty()) {
          const std::string rel = "features/" + s.id + "_emotion.csv";
          mfgcn::csv::write_matrix(
              out / rel,
              std::vector<std::string>(mfgcn::features::kEmotionNames.begin(),
                                       mfgcn::features::kEmotionNames.end()),
              s.video);
          sj["emotion"] = rel;
        }
        if (!s.gaze.empty()) {
          const std::string rel = "features/" + s.id + "_gaze.csv";
          std::vector<std::string> header;
          for (const auto& name : mfgcn::features::kSaliencyMetricNames) header.push_back(name);
          mfgcn::csv::write_matrix(out / rel, header, s.gaze);
          sj["gaze"] = rel;
        }
        subjects.push_back(std::move(sj));
      }
      json mj;
      mj["name"] = manifest.name + "-features";
      mj["subjects"] = std::move(subjects);
      std::ofstream f(out / "manifest.json");
      f << mj.dump(1) << '\n';
      std::cout << "features written under " << out.string() << "\n";
      return 0;
    }

    if (cmd_spec->parsed()) {
      spec_req.kernels.clear();
      std::string cur;
      for (char c : spec_kernels + ",") {
        if (c == ',') {
          if (!cur.empty()) spec_req.kernels.push_back(cur);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      const auto rows = mfgcn::io::analyze_spectrum(spec_req);
      if (spec_out.empty()) {
        std::cout << "family,n,lambda,kernel,numeric_response,analytic_response,abs_error\n";
        for (const auto& r : rows) {
          std::cout << r.family << ',' << r.n << ',' << mfgcn::csv::format_double(r.lambda) << ','
                    << r.kernel << ',' << mfgcn::csv::format_double(r.numeric_response) << ','
                    << mfgcn::csv::format_double(r.analytic_response) << ','
                    << mfgcn::csv::format_double(r.abs_error) << '\n';
        }
      } else {
        mfgcn::io::write_spectrum_csv(spec_out, rows);
        std::cout << "spectrum written to " << spec_out << "\n";
      }
      return 0;
    }

    if (cmd_syn->parsed()) {
      mfgcn::io::SyntheticSpec spec;
      spec.kind = mfgcn::io::SyntheticSpec::kind_from_name(syn_kind);
      spec.n_subjects = syn_subjects;
      spec.seed = syn_seed;
      spec.audio_as_wav = syn_wav;
      const auto path = mfgcn::io::write_synthetic_cohort(spec, syn_out);
      std::cout << "manifest written to " << path.string() << "\n";
      return 0;
    }

    if (cmd_report->parsed()) {
      mfgcn::io::emit_report(report_dir);
      std::cout << "report written under " << report_dir << "\n";
      return 0;
    }
  } catch (const mfgcn::io::StageError& e) {
    return fail_with_json(e.stage(), e.what());
  } catch (const std::exception& e) {
    return fail_with_json("cli", e.what());
  }
  return 0;
}
