#pragma once

#include <string>
#include <vector>

namespace mfgcn::train {

enum class Task { binary, three_class };

Task task_from_name(const std::string& name);
std::string task_name(Task task);
int n_classes(Task task);

/// PHQ-9 severity to class index: 0-4 -> 0, 5-14 -> 1, 15-27 -> 2.
/// Binary collapses classes 1 and 2 into the positive class 1.
int phq9_to_class(int score, Task task);

struct ClassMetrics {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  long support = 0;
  double precision = 0.0;
  double recall = 0.0;  // sensitivity
  double specificity = 0.0;
  double f2 = 0.0;
  bool no_support = false;  // class absent from y_true; recall reported as 0
};

struct RocCurve {
  int class_index = 0;
  std::vector<double> fpr, tpr, thresholds;
  double auc = 0.0;
  bool defined = true;  // false when the class has no positives
};

struct MetricsReport {
  int n_classes = 0;
  long n_samples = 0;
  std::vector<std::vector<long>> confusion;  // [true][pred]
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  // support-weighted averages
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_specificity = 0.0;
  double weighted_f2 = 0.0;
  std::vector<RocCurve> roc;
  std::vector<std::string> flags;
};

double f2_score(double precision, double recall);

/// One-vs-all confusion counts per class, the recall-weighted F2, and
/// support-weighted multiclass averages.  y_scores rows must be normalized.
MetricsReport evaluate(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                       const std::vector<std::vector<double>>& y_scores);

/// Per-class one-vs-all ROC by threshold sweep over the distinct scores,
/// trapezoidal AUC.
std::vector<RocCurve> roc_auc_ovr(const std::vector<int>& y_true,
                                  const std::vector<std::vector<double>>& y_scores,
                                  int n_classes);

}  // namespace mfgcn::train
