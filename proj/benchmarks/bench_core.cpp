#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mfgcn/audio_features.hpp"
#include "mfgcn/graph_spectral.hpp"
#include "mfgcn/model.hpp"
#include "mfgcn/rng.hpp"
#include "mfgcn/saliency.hpp"
#include "mfgcn/synthetic.hpp"
#include "mfgcn/tensor.hpp"
#include "mfgcn/training.hpp"

using namespace mfgcn;

namespace {

ad::Tensor random_tensor(Rng& rng, int rows, int cols, bool grad = false) {
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = rng.uniform(-1.0, 1.0);
  return ad::Tensor(rows, cols, std::move(data), grad);
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const auto a = random_tensor(rng, n, n);
  const auto b = random_tensor(rng, n, n);
  for (auto _ : state) {
    ad::Tape tape;
    auto c = ad::matmul(tape, a, b);
    benchmark::DoNotOptimize(c.data().data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128)->Complexity();

static void BM_MatmulBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  const auto a = random_tensor(rng, n, n, true);
  const auto b = random_tensor(rng, n, n, true);
  for (auto _ : state) {
    ad::Tape tape;
    const auto loss = ad::sum_all(tape, ad::relu(tape, ad::matmul(tape, a, b)));
    auto grads = ad::backward(tape, loss);
    benchmark::DoNotOptimize(grads.size());
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(16)->Arg(64);

static void BM_Eigendecompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = spectral::ModalityGraph::erdos_renyi(n, 0.4, 7);
  const auto lap = spectral::laplacian(spectral::normalize_adjacency(g));
  for (auto _ : state) {
    auto d = spectral::eigendecompose(lap);
    benchmark::DoNotOptimize(d.eigenvalues.data());
  }
}
BENCHMARK(BM_Eigendecompose)->Arg(8)->Arg(16)->Arg(32);

static void BM_AudioFeatures(benchmark::State& state) {
  std::vector<double> signal(16000);
  for (std::size_t i = 0; i < signal.size(); ++i) {
    signal[i] = std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0);
  }
  features::AudioParams params;
  for (auto _ : state) {
    auto m = features::audio_feature_matrix(signal, params);
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_AudioFeatures);

static void BM_SaliencyMetrics(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Rng rng(3);
  features::Map fix(side, std::vector<double>(side, 0.0));
  for (int k = 0; k < side; ++k) fix[rng.below(side)][rng.below(side)] = 1.0;
  features::Map sal(side, std::vector<double>(side, 0.0));
  for (auto& row : sal) {
    for (auto& v : row) v = rng.uniform(0.0, 1.0);
  }
  const features::SaliencyPair pair(fix, sal);
  for (auto _ : state) {
    auto m = features::saliency_metrics(pair);
    benchmark::DoNotOptimize(m.cc);
  }
}
BENCHMARK(BM_SaliencyMetrics)->Arg(16)->Arg(64);

static void BM_ModelForward(benchmark::State& state) {
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 16, 5, false};
  const auto data = io::make_synthetic_dataset(spec);

  model::ModelConfig cfg;
  cfg.hidden = 32;
  cfg.embedding_dim = 32;
  cfg.encoder_channels = 8;
  cfg.encoders[0] = {10, 18};
  cfg.encoders[1] = {7, 14};
  cfg.encoders[2] = {8, 12};
  model::MffbmModel m(cfg);
  for (auto _ : state) {
    ad::Tape tape;
    auto fwd = m.forward(tape, data);
    benchmark::DoNotOptimize(fwd.probs.data().data());
  }
}
BENCHMARK(BM_ModelForward);

static void BM_TrainEpoch(benchmark::State& state) {
  io::SyntheticSpec spec{io::SyntheticSpec::Kind::separable, 16, 5, false};
  const auto data = io::make_synthetic_dataset(spec);

  model::ModelConfig cfg;
  cfg.hidden = 16;
  cfg.embedding_dim = 16;
  cfg.encoder_channels = 6;
  cfg.encoders[0] = {10, 18};
  cfg.encoders[1] = {7, 14};
  cfg.encoders[2] = {8, 12};

  train::TrainConfig tc;
  tc.max_epochs = 1;
  tc.early_stop_patience = 1;
  tc.batch_size = 8;
  for (auto _ : state) {
    model::MffbmModel m(cfg);
    auto result = train::train(m, data, tc);
    benchmark::DoNotOptimize(result.history.data());
  }
}
BENCHMARK(BM_TrainEpoch);

BENCHMARK_MAIN();
