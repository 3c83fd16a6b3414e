#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

namespace mfgcn::features {

struct StftParams {
  int sample_rate = 16000;
  int window = 512;  // power of two
  int hop = 256;
};

struct AudioParams {
  StftParams stft;
  int n_mels = 64;
  int n_mfcc = 20;
  double chroma_cutoff_hz = 30.0;
  double chroma_ref_hz = 440.0;  // pitch class of the reference is A
};

/// Hann-windowed short-time spectrum.  frames[t][f] with f over the one-sided
/// bins 0..window/2.
struct Spectrogram {
  std::vector<std::vector<std::complex<double>>> frames;
  int sample_rate = 0;
  int window = 0;
  int hop = 0;

  int n_frames() const { return static_cast<int>(frames.size()); }
  int n_bins() const { return window / 2 + 1; }

  std::vector<std::vector<double>> magnitude() const;
  std::vector<std::vector<double>> power() const;
};

/// Radix-2 FFT of Hann-windowed frames.  Requires a power-of-two window,
/// hop <= window and at least one full frame of signal.
Spectrogram stft(const std::vector<double>& signal, const StftParams& params);

/// Triangular mel filterbank (HTK scale) applied to the power spectrum.
std::vector<std::vector<double>> mel_spectrogram(const Spectrogram& spec, int n_mels);

/// STFT magnitudes summed per pitch class; bins below the cutoff are skipped.
/// Column 0 is pitch class C.
std::vector<std::vector<double>> chroma(const Spectrogram& spec, double cutoff_hz = 30.0,
                                        double ref_hz = 440.0);

/// Cosine transform of log-mel rows, mel floored at 1e-10:
/// out[t][n] = sum_m log(mel[t][m]) * cos(pi*n/M * (m + 0.5)).
std::vector<std::vector<double>> mfcc(const std::vector<std::vector<double>>& mel, int n_coeffs);

/// Per-frame [mel | chroma | mfcc] feature matrix, the audio encoder input.
std::vector<std::vector<double>> audio_feature_matrix(const std::vector<double>& signal,
                                                      const AudioParams& params);
std::vector<std::string> audio_feature_header(const AudioParams& params);

struct WavData {
  std::vector<double> samples;  // mono, in [-1, 1]
  int sample_rate = 0;
};

/// Mono PCM WAV, 8- or 16-bit.
WavData read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const WavData& wav);

/// Nearest-neighbor resampling; crude but dependency-free, intended for the
/// synthetic and test cohorts rather than production audio work.
std::vector<double> resample_nearest(const std::vector<double>& samples, int rate_in,
                                     int rate_out);

}  // namespace mfgcn::features
