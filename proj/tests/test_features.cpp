#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <vector>

#include "mfgcn/audio_features.hpp"
#include "mfgcn/csv.hpp"
#include "mfgcn/emotion.hpp"
#include "mfgcn/rng.hpp"

using namespace mfgcn::features;
namespace fs = std::filesystem;

namespace {

std::vector<double> sine(double freq_hz, int sample_rate, int n) {
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) {
    s[i] = std::sin(2.0 * std::numbers::pi * freq_hz * i / sample_rate);
  }
  return s;
}

/// Naive O(N^2) DFT of one Hann-windowed frame; the STFT oracle.
std::vector<std::complex<double>> dft_oracle(const std::vector<double>& signal, std::size_t start,
                                             int window) {
  std::vector<std::complex<double>> out(window / 2 + 1);
  for (int k = 0; k <= window / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < window; ++i) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / window));
      const double angle = -2.0 * std::numbers::pi * k * i / window;
      acc += signal[start + i] * w * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("stft validates input") {
  StftParams p;
  p.window = 500;  // not a power of two
  CHECK_THROWS_AS(stft(std::vector<double>(1024, 0.0), p), std::invalid_argument);
  p.window = 512;
  p.hop = 600;
  CHECK_THROWS_AS(stft(std::vector<double>(1024, 0.0), p), std::invalid_argument);
  p.hop = 256;
  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), p), std::invalid_argument);
}

TEST_CASE("stft of silence is zero") {
  StftParams p;
  const auto spec = stft(std::vector<double>(2048, 0.0), p);
  CHECK(spec.n_frames() == (2048 - 512) / 256 + 1);
  CHECK(spec.n_bins() == 257);
  for (const auto& frame : spec.magnitude()) {
    for (double v : frame) CHECK(v == 0.0);
  }
}

TEST_CASE("stft matches the naive DFT oracle on a bin-aligned sine") {
  StftParams p;
  p.sample_rate = 16000;
  p.window = 256;
  p.hop = 128;
  // bin 16 -> 16 * 16000/256 = 1000 Hz exactly
  const auto signal = sine(1000.0, p.sample_rate, 1024);
  const auto spec = stft(signal, p);

  for (int t = 0; t < spec.n_frames(); ++t) {
    const auto oracle = dft_oracle(signal, static_cast<std::size_t>(t) * p.hop, p.window);
    double max_mag = 0.0;
    int max_bin = -1;
    for (int k = 0; k < spec.n_bins(); ++k) {
      const double mag = std::abs(spec.frames[t][k]);
      const double expected = std::abs(oracle[k]);
      const double scale = std::max(1.0, std::abs(expected));
      CHECK(std::abs(mag - expected) / scale < 1e-9);
      if (mag > max_mag) {
        max_mag = mag;
        max_bin = k;
      }
    }
    CHECK(max_bin == 16);
  }
}

TEST_CASE("stft Parseval identity per frame") {
  StftParams p;
  p.window = 256;
  p.hop = 256;
  mfgcn::Rng rng(99);
  std::vector<double> signal(1024);
  for (auto& v : signal) v = rng.uniform(-1.0, 1.0);
  const auto spec = stft(signal, p);

  for (int t = 0; t < spec.n_frames(); ++t) {
    // windowed-frame energy in time
    double time_energy = 0.0;
    for (int i = 0; i < p.window; ++i) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / p.window));
      const double x = signal[static_cast<std::size_t>(t) * p.hop + i] * w;
      time_energy += x * x;
    }
    // one-sided spectrum energy: DC and Nyquist once, the rest twice
    double freq_energy = std::norm(spec.frames[t][0]) + std::norm(spec.frames[t][p.window / 2]);
    for (int k = 1; k < p.window / 2; ++k) freq_energy += 2.0 * std::norm(spec.frames[t][k]);
    freq_energy /= p.window;
    CHECK(std::abs(time_energy - freq_energy) / std::max(1e-12, time_energy) < 1e-9);
  }
}

TEST_CASE("mel spectrogram") {
  StftParams p;
  const auto silent = stft(std::vector<double>(2048, 0.0), p);
  for (const auto& row : mel_spectrogram(silent, 64)) {
    for (double v : row) CHECK(v == 0.0);
  }

  // single-bin impulse spectrum touches at most 2 mel bands
  Spectrogram spec;
  spec.sample_rate = 16000;
  spec.window = 512;
  spec.hop = 256;
  spec.frames.assign(1, std::vector<std::complex<double>>(257, {0.0, 0.0}));
  spec.frames[0][80] = {1.0, 0.0};
  const auto mel = mel_spectrogram(spec, 32);
  int touched = 0;
  for (double v : mel[0]) {
    CHECK(v >= 0.0);
    if (v > 0.0) ++touched;
  }
  CHECK(touched >= 1);
  CHECK(touched <= 2);

  // quadratic homogeneity: scaling the signal by c scales mel by c^2
  const auto tone = sine(700.0, 16000, 2048);
  std::vector<double> half(tone.size());
  for (std::size_t i = 0; i < tone.size(); ++i) half[i] = 0.5 * tone[i];
  const auto m1 = mel_spectrogram(stft(tone, p), 64);
  const auto m2 = mel_spectrogram(stft(half, p), 64);
  for (std::size_t t = 0; t < m1.size(); ++t)
    for (std::size_t m = 0; m < m1[t].size(); ++m) {
      CHECK(m2[t][m] == doctest::Approx(0.25 * m1[t][m]).epsilon(1e-9));
    }
}

TEST_CASE("chroma maps frequencies to pitch classes") {
  StftParams p;
  const auto silent = stft(std::vector<double>(2048, 0.0), p);
  for (const auto& row : chroma(silent)) {
    for (double v : row) CHECK(v == 0.0);
  }

  // 440 Hz concentrates on pitch class A (index 9 with C = 0)
  const auto spec = stft(sine(440.0, 16000, 4096), p);
  const auto ch = chroma(spec);
  for (const auto& row : ch) {
    int argmax = 0;
    for (int k = 1; k < 12; ++k) {
      if (row[k] > row[argmax]) argmax = k;
    }
    CHECK(argmax == 9);
  }

  // octave invariance: 220 Hz and 440 Hz land in the same class
  const auto low = chroma(stft(sine(220.0, 16000, 4096), p));
  for (const auto& row : low) {
    int argmax = 0;
    for (int k = 1; k < 12; ++k) {
      if (row[k] > row[argmax]) argmax = k;
    }
    CHECK(argmax == 9);
  }
}

TEST_CASE("mfcc matches the double-loop cosine transform") {
  mfgcn::Rng rng(7);
  const int n_mels = 16, n_coeffs = 8;
  std::vector<std::vector<double>> mel(3, std::vector<double>(n_mels));
  for (auto& row : mel) {
    for (auto& v : row) v = rng.uniform(0.001, 2.0);
  }
  const auto out = mfcc(mel, n_coeffs);

  for (std::size_t t = 0; t < mel.size(); ++t) {
    for (int n = 0; n < n_coeffs; ++n) {
      double expected = 0.0;
      for (int m = 0; m < n_mels; ++m) {
        expected += std::log(std::max(mel[t][m], 1e-10)) *
                    std::cos(std::numbers::pi * n / n_mels * (m + 0.5));
      }
      CHECK(std::abs(out[t][n] - expected) < 1e-12);
    }
  }
}

TEST_CASE("mfcc of a constant row") {
  const double v = 1.7;
  const int n_mels = 12;
  std::vector<std::vector<double>> mel(1, std::vector<double>(n_mels, v));
  const auto out = mfcc(mel, 6);
  CHECK(out[0][0] == doctest::Approx(n_mels * std::log(v)).epsilon(1e-12));
  for (int n = 1; n < 6; ++n) CHECK(std::abs(out[0][n]) < 1e-10);
}

TEST_CASE("mfcc floors zero mel bands") {
  std::vector<std::vector<double>> mel(1, std::vector<double>(8, 0.0));
  const auto out = mfcc(mel, 4);
  for (double v : out[0]) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(mfcc(mel, 9), std::invalid_argument);
}

TEST_CASE("extractors are deterministic") {
  const auto signal = sine(523.25, 16000, 2048);
  AudioParams ap;
  const auto f1 = audio_feature_matrix(signal, ap);
  const auto f2 = audio_feature_matrix(signal, ap);
  REQUIRE(f1.size() == f2.size());
  for (std::size_t t = 0; t < f1.size(); ++t) {
    CHECK(std::memcmp(f1[t].data(), f2[t].data(), f1[t].size() * sizeof(double)) == 0);
  }
  CHECK(f1[0].size() == static_cast<std::size_t>(ap.n_mels + 12 + ap.n_mfcc));
  CHECK(audio_feature_header(ap).size() == f1[0].size());
}

TEST_CASE("wav round trip and resampling") {
  const fs::path dir = fs::temp_directory_path() / "mfgcn_wav_test";
  fs::create_directories(dir);

  WavData wav;
  wav.sample_rate = 8000;
  wav.samples = sine(440.0, 8000, 1600);
  const fs::path path = dir / "tone.wav";
  write_wav(path, wav);
  const WavData back = read_wav(path);
  CHECK(back.sample_rate == 8000);
  REQUIRE(back.samples.size() == wav.samples.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - wav.samples[i]) < 1e-4);  // 16-bit quantization
  }

  const auto up = resample_nearest(back.samples, 8000, 16000);
  CHECK(up.size() == back.samples.size() * 2);
  const auto same = resample_nearest(back.samples, 8000, 8000);
  CHECK(same.size() == back.samples.size());

  fs::remove_all(dir);
}

TEST_CASE("8-bit PCM WAV reads back as centered samples") {
  const fs::path dir = fs::temp_directory_path() / "mfgcn_wav8_test";
  fs::create_directories(dir);
  const fs::path path = dir / "tone8.wav";

  // hand-built 8-bit mono file: unsigned samples 128 +- 64
  std::vector<unsigned char> payload = {192, 128, 64, 128, 192, 128, 64, 128};
  std::ofstream f(path, std::ios::binary);
  auto u32 = [&f](std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    f.write(b, 4);
  };
  auto u16 = [&f](std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    f.write(b, 2);
  };
  f.write("RIFF", 4);
  u32(36 + static_cast<std::uint32_t>(payload.size()));
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  u32(16);
  u16(1);     // PCM
  u16(1);     // mono
  u32(8000);  // sample rate
  u32(8000);  // byte rate
  u16(1);     // block align
  u16(8);     // bits
  f.write("data", 4);
  u32(static_cast<std::uint32_t>(payload.size()));
  f.write(reinterpret_cast<const char*>(payload.data()), payload.size());
  f.close();

  const auto wav = read_wav(path);
  CHECK(wav.sample_rate == 8000);
  REQUIRE(wav.samples.size() == payload.size());
  CHECK(wav.samples[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(wav.samples[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(wav.samples[2] == doctest::Approx(-0.5).epsilon(1e-12));
  fs::remove_all(dir);
}

TEST_CASE("emotion rows validate range and arity") {
  std::vector<std::vector<double>> good(1, std::vector<double>(7, 0.0));
  CHECK(load_emotion_features(good).size() == 1);

  // the no-depression profile: neutral is the argmax
  std::vector<std::vector<double>> table1 = {{0.031, 0.000, 0.039, 0.080, 0.055, 0.018, 0.777}};
  const auto loaded = load_emotion_features(table1);
  int argmax = 0;
  for (int i = 1; i < 7; ++i) {
    if (loaded[0][i] > loaded[0][argmax]) argmax = i;
  }
  CHECK(kEmotionNames[argmax] == "neutral");

  std::vector<std::vector<double>> bad_range = {{0.1, 0.1, 0.1, 1.2, 0.1, 0.1, 0.1}};
  CHECK_THROWS_AS(load_emotion_features(bad_range), std::invalid_argument);
  std::vector<std::vector<double>> bad_arity = {{0.1, 0.2}};
  CHECK_THROWS_AS(load_emotion_features(bad_arity), std::invalid_argument);

  try {
    std::vector<std::vector<double>> rows = {{0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 2, 0, 0, 0}};
    load_emotion_features(rows);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}
