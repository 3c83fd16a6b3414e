#include "mfgcn/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mfgcn/rng.hpp"

namespace mfgcn::features {

const std::vector<std::string> kSaliencyMetricNames = {
    "auc_borji", "auc_judd", "cc", "kldiv", "nss", "sim", "auc_shuffled", "info_gain"};

namespace {

constexpr double kEps = 1e-12;

void check_map(const Map& m, const char* name) {
  if (m.empty() || m[0].empty()) throw std::invalid_argument(std::string(name) + ": empty map");
  for (const auto& row : m) {
    if (row.size() != m[0].size()) throw std::invalid_argument(std::string(name) + ": ragged map");
  }
}

std::vector<double> flatten(const Map& m) {
  std::vector<double> out;
  out.reserve(m.size() * m[0].size());
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::vector<double> sum_normalized(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / s;
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Trapezoidal AUC of a threshold sweep over every distinct score (positives
/// and negatives together).  Sweeping only the fixated-pixel values would
/// break the exact Mann-Whitney equivalence whenever a negative falls
/// strictly between two positive thresholds, so the full value set is used.
double sweep_auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
  std::vector<double> thresholds(positives);
  thresholds.insert(thresholds.end(), negatives.begin(), negatives.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<double> pos_sorted(positives), neg_sorted(negatives);
  std::sort(pos_sorted.begin(), pos_sorted.end());
  std::sort(neg_sorted.begin(), neg_sorted.end());
  const double np = static_cast<double>(pos_sorted.size());
  const double nn = static_cast<double>(neg_sorted.size());

  auto count_ge = [](const std::vector<double>& sorted, double t) {
    return static_cast<double>(sorted.end() -
                               std::lower_bound(sorted.begin(), sorted.end(), t));
  };

  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (double t : thresholds) {
    const double tpr = count_ge(pos_sorted, t) / np;
    const double fpr = nn > 0.0 ? count_ge(neg_sorted, t) / nn : 0.0;
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
  return auc;
}

}  // namespace

SaliencyPair::SaliencyPair(Map fix, Map sal) : fixation(std::move(fix)), saliency(std::move(sal)) {
  check_map(fixation, "fixation");
  check_map(saliency, "saliency");
  if (fixation.size() != saliency.size() || fixation[0].size() != saliency[0].size()) {
    throw std::invalid_argument("SaliencyPair: map shapes differ");
  }
  bool any_fix = false, any_sal = false;
  for (const auto& row : fixation)
    for (double v : row) {
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("SaliencyPair: fixation map must be binary");
      }
      any_fix = any_fix || v == 1.0;
    }
  for (const auto& row : saliency)
    for (double v : row) {
      if (v < 0.0) throw std::invalid_argument("SaliencyPair: saliency map must be nonnegative");
      any_sal = any_sal || v > 0.0;
    }
  if (!any_fix) throw std::invalid_argument("SaliencyPair: fixation map has no fixated pixel");
  if (!any_sal) throw std::invalid_argument("SaliencyPair: saliency map is identically zero");
}

std::vector<double> SaliencyMetrics::ordered_values() const {
  std::vector<double> out;
  const std::optional<double>* fields[8] = {&auc_borji, &auc_judd,     &cc,  &kldiv,
                                            &nss,       &sim,          &auc_shuffled, &info_gain};
  for (const auto* f : fields) out.push_back(f->value_or(std::nan("")));
  return out;
}

std::vector<std::string> SaliencyMetrics::missing() const {
  std::vector<std::string> out;
  const std::optional<double>* fields[8] = {&auc_borji, &auc_judd,     &cc,  &kldiv,
                                            &nss,       &sim,          &auc_shuffled, &info_gain};
  for (int i = 0; i < 8; ++i) {
    if (!fields[i]->has_value()) out.push_back(kSaliencyMetricNames[i]);
  }
  return out;
}

SaliencyMetrics saliency_metrics(const SaliencyPair& pair, const std::vector<Map>* other_fixations,
                                 const Map* baseline, const SaliencyOptions& opts) {
  const auto fix = flatten(pair.fixation);
  const auto sal = flatten(pair.saliency);
  const std::size_t n = sal.size();

  std::vector<std::size_t> fix_idx;
  for (std::size_t i = 0; i < n; ++i)
    if (fix[i] == 1.0) fix_idx.push_back(i);

  SaliencyMetrics m;

  // CC: Pearson correlation of the mean-centered maps.
  {
    const double mf = mean(fix), ms = mean(sal);
    double num = 0.0, df = 0.0, ds = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = fix[i] - mf, b = sal[i] - ms;
      num += a * b;
      df += a * a;
      ds += b * b;
    }
    m.cc = (df > 0.0 && ds > 0.0) ? num / std::sqrt(df * ds) : 0.0;
  }

  // NSS: mean of z-normalized saliency at fixated pixels (sample std).
  {
    const double ms = mean(sal);
    double var = 0.0;
    for (double v : sal) var += (v - ms) * (v - ms);
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) {
      double s = 0.0;
      for (auto i : fix_idx) s += (sal[i] - ms) / sd;
      m.nss = s / static_cast<double>(fix_idx.size());
    } else {
      m.nss = 0.0;
    }
  }

  // SIM and KLDiv on sum-normalized maps.
  {
    const auto pf = sum_normalized(fix);
    const auto ps = sum_normalized(sal);
    double sim = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sim += std::min(pf[i], ps[i]);
      if (pf[i] > 0.0) kl += pf[i] * std::log(pf[i] / (ps[i] + kEps));
    }
    m.sim = sim;
    m.kldiv = kl;
  }

  // AUC-Judd: negatives are the non-fixated pixels of this image.
  {
    std::vector<double> pos, neg;
    pos.reserve(fix_idx.size());
    neg.reserve(n - fix_idx.size());
    for (std::size_t i = 0; i < n; ++i) {
      (fix[i] == 1.0 ? pos : neg).push_back(sal[i]);
    }
    m.auc_judd = neg.empty() ? 1.0 : sweep_auc(pos, neg);
  }

  // AUC-Borji: negatives sampled uniformly over all pixels, averaged.
  {
    std::vector<double> pos;
    for (auto i : fix_idx) pos.push_back(sal[i]);
    Rng rng(opts.seed);
    double total = 0.0;
    for (int split = 0; split < opts.n_negative_samplings; ++split) {
      std::vector<double> neg(fix_idx.size());
      for (auto& v : neg) v = sal[rng.below(n)];
      total += sweep_auc(pos, neg);
    }
    m.auc_borji = total / opts.n_negative_samplings;
  }

  // AUC-Shuffled: negatives drawn from other images' fixation locations.
  if (other_fixations != nullptr && !other_fixations->empty()) {
    std::vector<std::size_t> pool;
    for (const auto& om : *other_fixations) {
      check_map(om, "other_fixation");
      if (om.size() != pair.fixation.size() || om[0].size() != pair.fixation[0].size()) {
        throw std::invalid_argument("saliency_metrics: other fixation map shape differs");
      }
      const auto of = flatten(om);
      for (std::size_t i = 0; i < of.size(); ++i)
        if (of[i] == 1.0) pool.push_back(i);
    }
    if (!pool.empty()) {
      std::vector<double> pos;
      for (auto i : fix_idx) pos.push_back(sal[i]);
      Rng rng(opts.seed + 1);
      double total = 0.0;
      for (int split = 0; split < opts.n_negative_samplings; ++split) {
        std::vector<double> neg(std::min(fix_idx.size(), pool.size()));
        for (auto& v : neg) v = sal[pool[rng.below(pool.size())]];
        total += sweep_auc(pos, neg);
      }
      m.auc_shuffled = total / opts.n_negative_samplings;
    }
  }

  // InfoGain over a baseline prediction.
  if (baseline != nullptr) {
    check_map(*baseline, "baseline");
    if (baseline->size() != pair.fixation.size() ||
        (*baseline)[0].size() != pair.fixation[0].size()) {
      throw std::invalid_argument("saliency_metrics: baseline map shape differs");
    }
    const auto ps = sum_normalized(sal);
    const auto pb = sum_normalized(flatten(*baseline));
    double s = 0.0;
    for (auto i : fix_idx) s += std::log2(ps[i] + kEps) - std::log2(pb[i] + kEps);
    m.info_gain = s / static_cast<double>(fix_idx.size());
  }

  return m;
}

}  // namespace mfgcn::features
