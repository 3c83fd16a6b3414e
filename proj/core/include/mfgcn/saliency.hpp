#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfgcn::features {

using Map = std::vector<std::vector<double>>;  // H rows of W values

/// A binary fixation map paired with a nonnegative saliency map of the same
/// size.  Construction enforces: at least one fixated pixel, saliency not
/// identically zero.
struct SaliencyPair {
  Map fixation;
  Map saliency;

  SaliencyPair(Map fix, Map sal);
};

/// The eight comparison metrics in their canonical report order.  Metrics
/// whose auxiliary inputs are missing stay unset.
struct SaliencyMetrics {
  std::optional<double> auc_borji;
  std::optional<double> auc_judd;
  std::optional<double> cc;
  std::optional<double> kldiv;
  std::optional<double> nss;
  std::optional<double> sim;
  std::optional<double> auc_shuffled;  // needs other_fixations
  std::optional<double> info_gain;     // needs baseline

  /// Values in report order; missing entries listed in `missing`.
  std::vector<double> ordered_values() const;
  std::vector<std::string> missing() const;
};

struct SaliencyOptions {
  int n_negative_samplings = 100;  // Borji / shuffled splits
  std::uint64_t seed = 0;
};

/// auc_judd: threshold sweep at distinct fixated-pixel saliency values,
///   negatives are the non-fixated pixels.
/// auc_borji: negatives resampled uniformly over pixels, averaged over splits.
/// auc_shuffled: negatives drawn from other images' fixation locations.
/// cc: Pearson correlation; nss: mean z-scored saliency at fixations;
/// sim: histogram intersection of the sum-normalized maps;
/// kldiv: fix-weighted log ratio, eps 1e-12, both maps sum-normalized;
/// info_gain: mean log2(sal+eps) - log2(base+eps) at fixations, normalized maps.
SaliencyMetrics saliency_metrics(const SaliencyPair& pair,
                                 const std::vector<Map>* other_fixations = nullptr,
                                 const Map* baseline = nullptr,
                                 const SaliencyOptions& opts = {});

extern const std::vector<std::string> kSaliencyMetricNames;

}  // namespace mfgcn::features
