#include "mfgcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfgcn::train {

Task task_from_name(const std::string& name) {
  if (name == "binary") return Task::binary;
  if (name == "three_class") return Task::three_class;
  throw std::invalid_argument("unknown task '" + name + "'");
}

std::string task_name(Task task) { return task == Task::binary ? "binary" : "three_class"; }

int n_classes(Task task) { return task == Task::binary ? 2 : 3; }

int phq9_to_class(int score, Task task) {
  if (score < 0 || score > 27) {
    throw std::invalid_argument("phq9_to_class: score " + std::to_string(score) +
                                " outside [0,27]");
  }
  const int three = score <= 4 ? 0 : (score <= 14 ? 1 : 2);
  if (task == Task::three_class) return three;
  return three == 0 ? 0 : 1;
}

double f2_score(double precision, double recall) {
  const double denom = 4.0 * precision + recall;
  if (denom == 0.0) return 0.0;
  return 5.0 * precision * recall / denom;
}

MetricsReport evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                       const std::vector<std::vector<double>>& y_scores) {
  const long n = static_cast<long>(y_true.size());
  if (y_pred.size() != y_true.size() || y_scores.size() != y_true.size()) {
    throw std::invalid_argument("evaluate: y_true, y_pred, y_scores lengths differ");
  }
  if (n == 0) throw std::invalid_argument("evaluate: empty input");
  const int c = static_cast<int>(y_scores[0].size());
  if (c < 2) throw std::invalid_argument("evaluate: need at least 2 classes of scores");
  for (std::size_t i = 0; i < y_scores.size(); ++i) {
    if (static_cast<int>(y_scores[i].size()) != c) {
      throw std::invalid_argument("evaluate: ragged score rows");
    }
    double s = 0.0;
    for (double v : y_scores[i]) s += v;
    if (std::abs(s - 1.0) > 1e-6) {
      throw std::invalid_argument("evaluate: score row " + std::to_string(i) +
                                  " is not normalized (sum=" + std::to_string(s) + ")");
    }
  }
  for (long i = 0; i < n; ++i) {
    if (y_true[i] < 0 || y_true[i] >= c || y_pred[i] < 0 || y_pred[i] >= c) {
      throw std::invalid_argument("evaluate: label outside [0," + std::to_string(c) + ") at row " +
                                  std::to_string(i));
    }
  }

  MetricsReport rep;
  rep.n_classes = c;
  rep.n_samples = n;
  rep.confusion.assign(c, std::vector<long>(c, 0));
  for (long i = 0; i < n; ++i) rep.confusion[y_true[i]][y_pred[i]]++;

  long correct = 0;
  for (int i = 0; i < c; ++i) correct += rep.confusion[i][i];
  rep.accuracy = static_cast<double>(correct) / n;

  rep.per_class.resize(c);
  double wp = 0.0, wr = 0.0, ws = 0.0, wf = 0.0;
  long total_support = 0;
  for (int i = 0; i < c; ++i) {
    ClassMetrics& m = rep.per_class[i];
    m.tp = rep.confusion[i][i];
    for (int j = 0; j < c; ++j) {
      if (j != i) {
        m.fn += rep.confusion[i][j];
        m.fp += rep.confusion[j][i];
      }
    }
    m.tn = n - m.tp - m.fn - m.fp;
    m.support = m.tp + m.fn;
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    if (m.support > 0) {
      m.recall = static_cast<double>(m.tp) / m.support;
    } else {
      m.recall = 0.0;
      m.no_support = true;
      rep.flags.push_back("class " + std::to_string(i) +
                          " absent from y_true; recall reported as 0");
    }
    m.specificity = (m.tn + m.fp) > 0 ? static_cast<double>(m.tn) / (m.tn + m.fp) : 0.0;
    m.f2 = f2_score(m.precision, m.recall);
    wp += m.support * m.precision;
    wr += m.support * m.recall;
    ws += m.support * m.specificity;
    wf += m.support * m.f2;
    total_support += m.support;
  }
  rep.weighted_precision = wp / total_support;
  rep.weighted_recall = wr / total_support;
  rep.weighted_specificity = ws / total_support;
  rep.weighted_f2 = wf / total_support;

  rep.roc = roc_auc_ovr(y_true, y_scores, c);
  for (const auto& curve : rep.roc) {
    if (!curve.defined) {
      rep.flags.push_back("class " + std::to_string(curve.class_index) +
                          " has no positives; AUC undefined");
    }
  }
  return rep;
}

std::vector<RocCurve> roc_auc_ovr(const std::vector<int>& y_true,
                                  const std::vector<std::vector<double>>& y_scores,
                                  int n_classes) {
  if (n_classes < 2) throw std::invalid_argument("roc_auc_ovr: need at least 2 classes");
  const std::size_t n = y_true.size();
  std::vector<RocCurve> curves;
  curves.reserve(n_classes);

  for (int cls = 0; cls < n_classes; ++cls) {
    RocCurve curve;
    curve.class_index = cls;

    std::vector<std::pair<double, int>> scored;  // (score, is_positive)
    long n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int pos = y_true[i] == cls ? 1 : 0;
      scored.emplace_back(y_scores[i][cls], pos);
      (pos ? n_pos : n_neg)++;
    }
    if (n_pos == 0) {
      curve.defined = false;
      curve.auc = 0.0;
      curves.push_back(std::move(curve));
      continue;
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());

    long tp = 0, fp = 0;
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < scored.size()) {
      const double threshold = scored[i].first;
      while (i < scored.size() && scored[i].first == threshold) {
        (scored[i].second ? tp : fp)++;
        ++i;
      }
      const double tpr = static_cast<double>(tp) / n_pos;
      const double fpr = n_neg > 0 ? static_cast<double>(fp) / n_neg : 0.0;
      auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
      curve.fpr.push_back(fpr);
      curve.tpr.push_back(tpr);
      curve.thresholds.push_back(threshold);
      prev_fpr = fpr;
      prev_tpr = tpr;
    }
    curve.auc = auc;
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace mfgcn::train
