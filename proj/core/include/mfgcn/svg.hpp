#pragma once

#include <string>
#include <vector>

#include "mfgcn/metrics.hpp"

namespace mfgcn::svg {

/// One-vs-all ROC curves on a single square plot with the diagonal chance
/// line and per-class AUC legend.
std::string render_roc(const std::string& title, const std::vector<train::RocCurve>& curves);

struct BoxSeries {
  std::string label;
  std::vector<double> values;  // one value per fold
};

/// Box-and-whisker chart (median, quartiles, min/max) of per-fold metrics.
std::string render_box_plot(const std::string& title, const std::vector<BoxSeries>& series);

}  // namespace mfgcn::svg
