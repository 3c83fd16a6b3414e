#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "mfgcn/metrics.hpp"
#include "mfgcn/rng.hpp"
#include "mfgcn/synthetic.hpp"
#include "mfgcn/training.hpp"

using namespace mfgcn;
using namespace mfgcn::train;
using ad::Tensor;

namespace {

/// Pairwise-comparison AUC oracle, ties counted as half wins.
double mann_whitney(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(pos.size()) * neg.size());
}

model::ModelConfig small_model_config(int n_layers = 1) {
  model::ModelConfig cfg;
  cfg.k = 2;
  cfg.n_layers = n_layers;
  cfg.hidden = 12;
  cfg.embedding_dim = 12;
  cfg.encoder_channels = 6;
  cfg.head_hidden1 = 12;
  cfg.head_hidden2 = 6;
  cfg.encoders[0] = {10, 18};
  cfg.encoders[1] = {7, 14};
  cfg.encoders[2] = {8, 12};
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("phq9_to_class follows the protocol boundaries") {
  CHECK(phq9_to_class(0, Task::three_class) == 0);
  CHECK(phq9_to_class(4, Task::three_class) == 0);
  CHECK(phq9_to_class(5, Task::three_class) == 1);
  CHECK(phq9_to_class(10, Task::three_class) == 1);
  CHECK(phq9_to_class(14, Task::three_class) == 1);
  CHECK(phq9_to_class(15, Task::three_class) == 2);
  CHECK(phq9_to_class(20, Task::three_class) == 2);
  CHECK(phq9_to_class(27, Task::three_class) == 2);

  CHECK(phq9_to_class(0, Task::binary) == 0);
  CHECK(phq9_to_class(4, Task::binary) == 0);
  CHECK(phq9_to_class(5, Task::binary) == 1);
  CHECK(phq9_to_class(27, Task::binary) == 1);

  CHECK_THROWS_AS(phq9_to_class(-1, Task::binary), std::invalid_argument);
  CHECK_THROWS_AS(phq9_to_class(28, Task::binary), std::invalid_argument);
}

TEST_CASE("kfold_split partitions 103 subjects into 7 folds of 10 and 3 of 11") {
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (int i = 0; i < 103; ++i) {
    ids.push_back("s" + std::to_string(i));
    labels.push_back(i % 3);
  }
  const auto folds = kfold_split(ids, labels, 10, 42);
  REQUIRE(folds.size() == 10);

  std::multiset<std::size_t> sizes;
  std::set<std::string> all_test;
  for (const auto& f : folds) {
    sizes.insert(f.test_ids.size());
    for (const auto& id : f.test_ids) {
      CHECK(all_test.insert(id).second);  // pairwise disjoint
      CHECK(std::find(f.train_ids.begin(), f.train_ids.end(), id) == f.train_ids.end());
    }
    CHECK(f.train_ids.size() + f.test_ids.size() == 103);
  }
  CHECK(all_test.size() == 103);  // union covers everyone
  CHECK(sizes.count(10) == 7);
  CHECK(sizes.count(11) == 3);
}

TEST_CASE("kfold_split is seed-deterministic and stratified when counts allow") {
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    ids.push_back("s" + std::to_string(i));
    labels.push_back(i % 3);
  }
  const auto f1 = kfold_split(ids, labels, 5, 7);
  const auto f2 = kfold_split(ids, labels, 5, 7);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    CHECK(f1[i].test_ids == f2[i].test_ids);
    CHECK(f1[i].train_ids == f2[i].train_ids);
  }

  // 10 per class over 5 folds: exactly 2 of each class per test fold
  std::map<std::string, int> label_of;
  for (int i = 0; i < 30; ++i) label_of[ids[i]] = labels[i];
  for (const auto& f : f1) {
    std::map<int, int> counts;
    for (const auto& id : f.test_ids) counts[label_of[id]]++;
    for (int c = 0; c < 3; ++c) CHECK(counts[c] == 2);
  }

  CHECK_THROWS_AS(kfold_split(ids, labels, 31, 0), std::invalid_argument);
}

TEST_CASE("adam_step: zero gradient leaves parameters unchanged") {
  std::vector<Tensor> params = {Tensor(1, 3, {1.0, -2.0, 0.5}, true)};
  std::vector<Tensor> grads = {Tensor::zeros(1, 3)};
  AdamState state = AdamState::for_params(params);
  const auto updated = adam_step(params, grads, state, 0.01);
  for (int j = 0; j < 3; ++j) CHECK(updated[0].at(0, j) == params[0].at(0, j));
}

TEST_CASE("adam_step first step matches the closed form") {
  // with unit gradient, the bias-corrected ratio is exactly 1 and the step
  // equals lr / (1 + eps); a small explicit eps keeps |step - lr| < 1e-9*lr
  const double lr = 0.001;
  {
    std::vector<Tensor> params = {Tensor::full(2, 2, 3.0, true)};
    std::vector<Tensor> grads = {Tensor::full(2, 2, 1.0)};
    AdamState state = AdamState::for_params(params);
    const auto updated = adam_step(params, grads, state, lr, 0.9, 0.999, 1e-12);
    for (double v : updated[0].data()) {
      CHECK(std::abs((3.0 - v) - lr) < 1e-9 * lr);
    }
  }
  // with the default eps the step is exactly lr / (1 + eps)
  {
    std::vector<Tensor> params = {Tensor::full(1, 1, 0.0, true)};
    std::vector<Tensor> grads = {Tensor::full(1, 1, 1.0)};
    AdamState state = AdamState::for_params(params);
    const auto updated = adam_step(params, grads, state, lr);
    CHECK(std::abs(-updated[0].item() - lr / (1.0 + 1e-8)) < 1e-18);
  }
}

TEST_CASE("adam drives x^2 toward zero") {
  std::vector<Tensor> params = {Tensor::full(1, 1, 1.0, true)};
  AdamState state = AdamState::for_params(params);
  for (int step = 0; step < 200; ++step) {
    const double x = params[0].item();
    std::vector<Tensor> grads = {Tensor::full(1, 1, 2.0 * x)};
    params = adam_step(params, grads, state, 0.1);
  }
  CHECK(std::abs(params[0].item()) < 1e-2);
}

TEST_CASE("adam_step rejects mismatched shapes") {
  std::vector<Tensor> params = {Tensor::zeros(2, 2, true)};
  std::vector<Tensor> grads = {Tensor::zeros(2, 3)};
  AdamState state = AdamState::for_params(params);
  CHECK_THROWS_AS(adam_step(params, grads, state, 0.01), std::invalid_argument);
}

TEST_CASE("cross_entropy_loss wraps the tape op") {
  ad::Tape tape;
  const Tensor uniform(2, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(cross_entropy_loss(tape, uniform, {0, 2}).item() ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("evaluate computes the protocol metrics") {
  // counts TP=3, FP=1, FN=1, TN=5 for class 1 in a binary problem
  const std::vector<int> y_true = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<int> y_pred = {1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
  std::vector<std::vector<double>> scores;
  for (int p : y_pred) {
    scores.push_back(p == 1 ? std::vector<double>{0.2, 0.8} : std::vector<double>{0.8, 0.2});
  }
  const auto rep = evaluate(y_true, y_pred, scores);
  const auto& m = rep.per_class[1];
  CHECK(m.tp == 3);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 5);
  CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(m.recall == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(m.specificity == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(m.f2 == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("the published ensemble operating point reproduces its F2") {
  // precision 0.88, recall 0.96 combine to F2 = 0.9428... ~ 0.94
  const double f2 = f2_score(0.88, 0.96);
  CHECK(f2 == doctest::Approx(5.0 * 0.88 * 0.96 / (4.0 * 0.88 + 0.96)).epsilon(1e-15));
  CHECK(std::abs(f2 - 0.94) < 0.005);
}

TEST_CASE("all-correct predictions score 1.0 everywhere") {
  const std::vector<int> y = {0, 1, 2, 0, 1, 2};
  std::vector<std::vector<double>> scores;
  for (int c : y) {
    std::vector<double> row(3, 0.05);
    row[c] = 0.9;
    scores.push_back(row);
  }
  const auto rep = evaluate(y, y, scores);
  CHECK(rep.accuracy == 1.0);
  CHECK(rep.weighted_precision == doctest::Approx(1.0));
  CHECK(rep.weighted_recall == doctest::Approx(1.0));
  CHECK(rep.weighted_f2 == doctest::Approx(1.0));
  for (const auto& curve : rep.roc) CHECK(curve.auc == doctest::Approx(1.0));
}

TEST_CASE("evaluate metric identities on random confusion patterns") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 40;
    std::vector<int> y_true(n), y_pred(n);
    std::vector<std::vector<double>> scores(n);
    for (int i = 0; i < n; ++i) {
      y_true[i] = static_cast<int>(rng.below(3));
      y_pred[i] = static_cast<int>(rng.below(3));
      std::vector<double> row(3);
      double sum = 0.0;
      for (auto& v : row) {
        v = rng.uniform(0.01, 1.0);
        sum += v;
      }
      for (auto& v : row) v /= sum;
      // align the argmax with the prediction so scores are consistent
      const int argmax = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      std::swap(row[argmax], row[y_pred[i]]);
      scores[i] = row;
    }
    const auto rep = evaluate(y_true, y_pred, scores);

    // weighted recall equals accuracy (support-weighting identity)
    CHECK(rep.weighted_recall == doctest::Approx(rep.accuracy).epsilon(1e-12));

    for (const auto& m : rep.per_class) {
      // F2 lies between precision and recall; equality when they match
      const double lo = std::min(m.precision, m.recall);
      const double hi = std::max(m.precision, m.recall);
      CHECK(m.f2 >= lo - 1e-12);
      CHECK(m.f2 <= hi + 1e-12);
    }

    // specificity of class i is the recall of not-i
    for (int cls = 0; cls < 3; ++cls) {
      long tn = 0, fp = 0;
      for (int i = 0; i < n; ++i) {
        if (y_true[i] != cls) {
          (y_pred[i] != cls ? tn : fp)++;
        }
      }
      const double not_recall = static_cast<double>(tn) / (tn + fp);
      CHECK(rep.per_class[cls].specificity == doctest::Approx(not_recall).epsilon(1e-12));
    }
  }
}

TEST_CASE("f2 equals precision and recall when they coincide") {
  for (double v : {0.1, 0.5, 0.9}) {
    CHECK(f2_score(v, v) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("roc_auc_ovr: perfect, inverted, and oracle-matched") {
  const std::vector<int> y = {1, 1, 0, 0};
  const std::vector<std::vector<double>> perfect = {
      {0.1, 0.9}, {0.2, 0.8}, {0.8, 0.2}, {0.7, 0.3}};
  const auto curves = roc_auc_ovr(y, perfect, 2);
  CHECK(curves[1].auc == doctest::Approx(1.0));
  CHECK(curves[0].auc == doctest::Approx(1.0));  // class-0 scores rank class 0 first too

  const std::vector<std::vector<double>> inverted = {
      {0.9, 0.1}, {0.8, 0.2}, {0.2, 0.8}, {0.3, 0.7}};
  CHECK(roc_auc_ovr(y, inverted, 2)[1].auc == doctest::Approx(0.0));
}

TEST_CASE("trapezoidal AUC equals the Mann-Whitney oracle, ties counted half") {
  Rng rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 50;
    std::vector<int> y(n);
    std::vector<std::vector<double>> scores(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.below(3));
      // quantized scores force ties
      double s0 = std::round(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
      double s1 = std::round(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
      double s2 = std::round(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
      const double sum = s0 + s1 + s2 + 3e-3;
      scores[i] = {(s0 + 1e-3) / sum, (s1 + 1e-3) / sum, (s2 + 1e-3) / sum};
    }
    const auto curves = roc_auc_ovr(y, scores, 3);
    for (int cls = 0; cls < 3; ++cls) {
      std::vector<double> pos, neg;
      for (int i = 0; i < n; ++i) (y[i] == cls ? pos : neg).push_back(scores[i][cls]);
      if (pos.empty()) {
        CHECK_FALSE(curves[cls].defined);
        continue;
      }
      CHECK(std::abs(curves[cls].auc - mann_whitney(pos, neg)) < 1e-12);
    }

    // monotone fpr per curve
    for (const auto& curve : curves) {
      for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
        CHECK(curve.fpr[i] >= curve.fpr[i - 1]);
      }
    }
  }
}

TEST_CASE("AUC is invariant under strictly increasing score transforms") {
  Rng rng(79);
  const int n = 30;
  std::vector<int> y(n);
  std::vector<std::vector<double>> scores(n), warped(n);
  for (int i = 0; i < n; ++i) {
    y[i] = static_cast<int>(rng.below(2));
    const double s = rng.uniform(0.02, 0.98);
    scores[i] = {1.0 - s, s};
    // monotone warp of the class-1 score, re-normalized
    const double w = std::exp(2.0 * s);
    warped[i] = {1.0, w};  // row sums differ; normalize
    warped[i][0] = 1.0 / (1.0 + w);
    warped[i][1] = w / (1.0 + w);
  }
  const auto base = roc_auc_ovr(y, scores, 2);
  const auto after = roc_auc_ovr(y, warped, 2);
  CHECK(base[1].auc == doctest::Approx(after[1].auc).epsilon(1e-12));
}

TEST_CASE("evaluate flags a class absent from y_true") {
  const std::vector<int> y_true = {0, 0, 1, 1};
  const std::vector<int> y_pred = {0, 2, 1, 1};
  std::vector<std::vector<double>> scores = {
      {0.8, 0.1, 0.1}, {0.1, 0.1, 0.8}, {0.1, 0.8, 0.1}, {0.2, 0.7, 0.1}};
  const auto rep = evaluate(y_true, y_pred, scores);
  CHECK(rep.per_class[2].no_support);
  CHECK(rep.per_class[2].recall == 0.0);
  CHECK_FALSE(rep.roc[2].defined);
  CHECK(rep.flags.size() >= 2);
}

TEST_CASE("train: patience boundary, determinism, and divergence") {
  const io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 12, 5, false};
  model::Dataset data = io::make_synthetic_dataset(spec);

  model::ModelConfig mc = small_model_config();
  model::MffbmModel m1(mc);
  TrainConfig tc;
  tc.max_epochs = 12;
  tc.early_stop_patience = 12;
  tc.batch_size = 6;
  tc.seed = 3;

  const auto r1 = train::train(m1, data, tc);
  CHECK(r1.history.size() <= 12);

  // identical seeds give identical histories
  model::MffbmModel m2(mc);
  const auto r2 = train::train(m2, data, tc);
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t e = 0; e < r1.history.size(); ++e) {
    CHECK(r1.history[e].train_loss == r2.history[e].train_loss);
    CHECK(r1.history[e].val_loss == r2.history[e].val_loss);
  }

  // patience 0 stops exactly one epoch after the first non-improvement
  model::MffbmModel m3(mc);
  TrainConfig tc0 = tc;
  tc0.max_epochs = 40;
  tc0.early_stop_patience = 0;
  const auto r3 = train::train(m3, data, tc0);
  if (r3.early_stopped) {
    REQUIRE(r3.history.size() >= 2);
    const int last = static_cast<int>(r3.history.size()) - 1;
    // every epoch before the last improved on its predecessor's best
    double best = r3.history[0].val_loss;
    for (int e = 1; e < last; ++e) {
      CHECK(r3.history[e].val_loss < best);
      best = std::min(best, r3.history[e].val_loss);
    }
    CHECK(r3.history[last].val_loss >= best);
  }

  // a non-finite loss aborts the run with a report
  model::MffbmModel m4(mc);
  model::Dataset poisoned = data;
  for (auto& s : poisoned) s.audio[0][0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(train::train(m4, poisoned, tc), std::runtime_error);
}

TEST_CASE("augment_shuffle_responses") {
  using Block = FeatureBlock;
  std::vector<Block> sample;
  for (int b = 0; b < 12; ++b) {
    sample.push_back(Block(2, std::vector<double>(3, static_cast<double>(b))));
  }

  const auto none = augment_shuffle_responses(sample, 0, 9);
  CHECK(none.samples.size() == 1);
  CHECK(none.applied);

  const auto r = augment_shuffle_responses(sample, 12, 9);
  CHECK(r.samples.size() == 13);
  CHECK(r.applied);
  for (const auto& s : r.samples) {
    REQUIRE(s.size() == 12);
    // same multiset of blocks: identify each block by its constant value
    std::multiset<double> seen;
    for (const auto& b : s) seen.insert(b[0][0]);
    for (int v = 0; v < 12; ++v) CHECK(seen.count(static_cast<double>(v)) == 1);
  }
  // original retained first
  for (int b = 0; b < 12; ++b) CHECK(r.samples[0][b][0][0] == static_cast<double>(b));

  const auto r2 = augment_shuffle_responses(sample, 12, 9);
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    CHECK(r.samples[s] == r2.samples[s]);  // seed-deterministic
  }

  std::vector<Block> tiny = {sample[0]};
  const auto flagged = augment_shuffle_responses(tiny, 5, 1);
  CHECK(flagged.samples.size() == 1);
  CHECK_FALSE(flagged.applied);
}

TEST_CASE("permute_row_blocks keeps rows, reorders blocks") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 7; ++i) rows.push_back({static_cast<double>(i)});
  // 3 blocks over 7 rows: sizes 3, 2, 2
  const auto out = permute_row_blocks(rows, 3, {2, 0, 1});
  REQUIRE(out.size() == 7);
  const std::vector<double> expected = {5, 6, 0, 1, 2, 3, 4};
  for (int i = 0; i < 7; ++i) CHECK(out[i][0] == expected[i]);
}
