#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mfgcn/rng.hpp"
#include "mfgcn/tensor.hpp"

namespace testutil {

inline mfgcn::ad::Tensor random_tensor(mfgcn::Rng& rng, int rows, int cols, bool requires_grad,
                                       double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = rng.uniform(lo, hi);
  return mfgcn::ad::Tensor(rows, cols, std::move(data), requires_grad);
}

/// Builds the loss from the given parameter tensors; a fresh tape per call.
using LossBuilder =
    std::function<mfgcn::ad::Tensor(mfgcn::ad::Tape&, const std::vector<mfgcn::ad::Tensor>&)>;

/// Max relative error between tape gradients and central finite differences
/// (h = 1e-6), checked on up to `max_coords_per_tensor` seeded coordinates of
/// every parameter.
inline double max_grad_rel_error(const LossBuilder& build, std::vector<mfgcn::ad::Tensor> params,
                                 std::uint64_t coord_seed = 0, int max_coords_per_tensor = 64,
                                 double h = 1e-6) {
  using mfgcn::ad::Tape;
  using mfgcn::ad::Tensor;

  Tape tape;
  for (const auto& p : params) tape.watch(p);
  const Tensor loss = build(tape, params);
  const auto grads = mfgcn::ad::backward(tape, loss);

  mfgcn::Rng coord_rng(coord_seed + 12345);
  double worst = 0.0;

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& p = params[pi];
    const auto it = grads.find(p.id());
    std::vector<std::size_t> coords;
    if (static_cast<int>(p.size()) <= max_coords_per_tensor) {
      for (std::size_t c = 0; c < p.size(); ++c) coords.push_back(c);
    } else {
      for (int c = 0; c < max_coords_per_tensor; ++c) {
        coords.push_back(static_cast<std::size_t>(coord_rng.below(p.size())));
      }
    }
    for (std::size_t c : coords) {
      auto perturbed = [&](double delta) {
        std::vector<double> data(p.data().begin(), p.data().end());
        data[c] += delta;
        auto modified = params;
        modified[pi] = Tensor(p.rows(), p.cols(), std::move(data), true);
        Tape t2;
        return build(t2, modified).item();
      };
      const double numeric = (perturbed(h) - perturbed(-h)) / (2.0 * h);
      const double analytic = it != grads.end() ? it->second.data()[c] : 0.0;
      const double rel =
          std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace testutil
