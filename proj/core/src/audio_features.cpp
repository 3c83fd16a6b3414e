#include "mfgcn/audio_features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace mfgcn::features {

namespace {

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

std::vector<std::vector<double>> Spectrogram::magnitude() const {
  std::vector<std::vector<double>> out(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    out[t].resize(frames[t].size());
    for (std::size_t f = 0; f < frames[t].size(); ++f) out[t][f] = std::abs(frames[t][f]);
  }
  return out;
}

std::vector<std::vector<double>> Spectrogram::power() const {
  std::vector<std::vector<double>> out(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    out[t].resize(frames[t].size());
    for (std::size_t f = 0; f < frames[t].size(); ++f) out[t][f] = std::norm(frames[t][f]);
  }
  return out;
}

Spectrogram stft(const std::vector<double>& signal, const StftParams& params) {
  if (!is_power_of_two(params.window)) {
    throw std::invalid_argument("stft: window must be a power of two, got " +
                                std::to_string(params.window));
  }
  if (params.hop < 1 || params.hop > params.window) {
    throw std::invalid_argument("stft: hop must be in [1, window]");
  }
  if (static_cast<int>(signal.size()) < params.window) {
    throw std::invalid_argument("stft: signal length " + std::to_string(signal.size()) +
                                " shorter than window " + std::to_string(params.window));
  }

  const int w = params.window;
  std::vector<double> hann(w);
  for (int i = 0; i < w; ++i) {
    hann[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / w));  // periodic Hann
  }

  Spectrogram spec;
  spec.sample_rate = params.sample_rate;
  spec.window = w;
  spec.hop = params.hop;

  const int n_bins = w / 2 + 1;
  for (std::size_t start = 0; start + w <= signal.size(); start += params.hop) {
    std::vector<std::complex<double>> frame(w);
    for (int i = 0; i < w; ++i) frame[i] = signal[start + i] * hann[i];
    fft(frame);
    frame.resize(n_bins);
    spec.frames.push_back(std::move(frame));
  }
  return spec;
}

std::vector<std::vector<double>> mel_spectrogram(const Spectrogram& spec, int n_mels) {
  if (n_mels < 1) throw std::invalid_argument("mel_spectrogram: n_mels must be >= 1");
  const int n_bins = spec.n_bins();
  const double nyquist = spec.sample_rate / 2.0;

  // Triangle edge frequencies, equally spaced on the mel axis.
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(nyquist);
  std::vector<double> edges(n_mels + 2);
  for (int m = 0; m < n_mels + 2; ++m) {
    edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));
  }

  std::vector<std::vector<double>> bank(n_mels, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int f = 0; f < n_bins; ++f) {
      const double freq = f * static_cast<double>(spec.sample_rate) / spec.window;
      if (freq <= lo || freq >= hi) continue;
      bank[m][f] = freq <= mid ? (freq - lo) / (mid - lo) : (hi - freq) / (hi - mid);
    }
  }

  const auto power = spec.power();
  std::vector<std::vector<double>> out(power.size(), std::vector<double>(n_mels, 0.0));
  for (std::size_t t = 0; t < power.size(); ++t)
    for (int m = 0; m < n_mels; ++m) {
      double s = 0.0;
      for (int f = 0; f < n_bins; ++f) s += bank[m][f] * power[t][f];
      out[t][m] = s;
    }
  return out;
}

std::vector<std::vector<double>> chroma(const Spectrogram& spec, double cutoff_hz, double ref_hz) {
  if (spec.sample_rate <= 0) throw std::invalid_argument("chroma: unknown sample rate");
  const int n_bins = spec.n_bins();
  // ref_hz is pitch class A = index 9 with C = 0.
  std::vector<int> bin_class(n_bins, -1);
  for (int f = 1; f < n_bins; ++f) {
    const double freq = f * static_cast<double>(spec.sample_rate) / spec.window;
    if (freq < cutoff_hz) continue;
    const long semis = std::lround(12.0 * std::log2(freq / ref_hz));
    bin_class[f] = static_cast<int>((((semis + 9) % 12) + 12) % 12);
  }
  const auto mag = spec.magnitude();
  std::vector<std::vector<double>> out(mag.size(), std::vector<double>(12, 0.0));
  for (std::size_t t = 0; t < mag.size(); ++t)
    for (int f = 0; f < n_bins; ++f)
      if (bin_class[f] >= 0) out[t][bin_class[f]] += mag[t][f];
  return out;
}

std::vector<std::vector<double>> mfcc(const std::vector<std::vector<double>>& mel, int n_coeffs) {
  if (mel.empty()) return {};
  const int n_mels = static_cast<int>(mel[0].size());
  if (n_coeffs < 1 || n_coeffs > n_mels) {
    throw std::invalid_argument("mfcc: n_coeffs must be in [1, n_mels]");
  }
  constexpr double kFloor = 1e-10;
  std::vector<std::vector<double>> out(mel.size(), std::vector<double>(n_coeffs, 0.0));
  for (std::size_t t = 0; t < mel.size(); ++t) {
    for (int n = 0; n < n_coeffs; ++n) {
      double s = 0.0;
      for (int m = 0; m < n_mels; ++m) {
        s += std::log(std::max(mel[t][m], kFloor)) *
             std::cos(std::numbers::pi * n / n_mels * (m + 0.5));
      }
      out[t][n] = s;
    }
  }
  return out;
}

std::vector<std::vector<double>> audio_feature_matrix(const std::vector<double>& signal,
                                                      const AudioParams& params) {
  const Spectrogram spec = stft(signal, params.stft);
  const auto mel = mel_spectrogram(spec, params.n_mels);
  const auto chr = chroma(spec, params.chroma_cutoff_hz, params.chroma_ref_hz);
  const auto cep = mfcc(mel, params.n_mfcc);

  std::vector<std::vector<double>> out(spec.frames.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t].reserve(params.n_mels + 12 + params.n_mfcc);
    out[t].insert(out[t].end(), mel[t].begin(), mel[t].end());
    out[t].insert(out[t].end(), chr[t].begin(), chr[t].end());
    out[t].insert(out[t].end(), cep[t].begin(), cep[t].end());
  }
  return out;
}

std::vector<std::string> audio_feature_header(const AudioParams& params) {
  std::vector<std::string> h;
  for (int m = 0; m < params.n_mels; ++m) h.push_back("mel_" + std::to_string(m));
  static const char* kClasses[12] = {"C",  "Cs", "D",  "Ds", "E",  "F",
                                     "Fs", "G",  "Gs", "A",  "As", "B"};
  for (int k = 0; k < 12; ++k) h.push_back(std::string("chroma_") + kClasses[k]);
  for (int n = 0; n < params.n_mfcc; ++n) h.push_back("mfcc_" + std::to_string(n));
  return h;
}

// --- WAV ----------------------------------------------------------------------

namespace {

std::uint32_t read_u32(std::istream& s) {
  unsigned char b[4];
  s.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& s) {
  unsigned char b[2];
  s.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& s, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  s.write(b, 4);
}

void write_u16(std::ostream& s, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  s.write(b, 2);
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_wav: cannot open " + path.string());

  char tag[4];
  f.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw std::runtime_error("read_wav: not RIFF: " + path.string());
  read_u32(f);  // riff size
  f.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw std::runtime_error("read_wav: not WAVE: " + path.string());

  int sample_rate = 0, bits = 0, channels = 0;
  std::vector<double> samples;
  bool have_fmt = false, have_data = false;
  while (f.read(tag, 4)) {
    const std::uint32_t chunk_size = read_u32(f);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const std::uint16_t format = read_u16(f);
      channels = read_u16(f);
      sample_rate = static_cast<int>(read_u32(f));
      read_u32(f);  // byte rate
      read_u16(f);  // block align
      bits = read_u16(f);
      if (chunk_size > 16) f.ignore(chunk_size - 16);
      if (format != 1) throw std::runtime_error("read_wav: only PCM supported: " + path.string());
      if (channels != 1) throw std::runtime_error("read_wav: only mono supported: " + path.string());
      if (bits != 8 && bits != 16) {
        throw std::runtime_error("read_wav: only 8/16-bit PCM supported: " + path.string());
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("read_wav: data before fmt: " + path.string());
      std::vector<char> raw(chunk_size);
      f.read(raw.data(), chunk_size);
      if (bits == 16) {
        samples.resize(chunk_size / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const std::int16_t v = static_cast<std::int16_t>(
              static_cast<unsigned char>(raw[2 * i]) |
              (static_cast<unsigned char>(raw[2 * i + 1]) << 8));
          samples[i] = v / 32768.0;
        }
      } else {
        samples.resize(chunk_size);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          samples[i] = (static_cast<unsigned char>(raw[i]) - 128) / 128.0;
        }
      }
      have_data = true;
    } else {
      f.ignore(chunk_size + (chunk_size & 1));
    }
  }
  if (!have_data) throw std::runtime_error("read_wav: no data chunk: " + path.string());
  return WavData{std::move(samples), sample_rate};
}

void write_wav(const std::filesystem::path& path, const WavData& wav) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_wav: cannot open " + path.string());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wav.samples.size() * 2);
  f.write("RIFF", 4);
  write_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_u32(f, 16);
  write_u16(f, 1);  // PCM
  write_u16(f, 1);  // mono
  write_u32(f, static_cast<std::uint32_t>(wav.sample_rate));
  write_u32(f, static_cast<std::uint32_t>(wav.sample_rate * 2));
  write_u16(f, 2);
  write_u16(f, 16);
  f.write("data", 4);
  write_u32(f, data_bytes);
  for (double s : wav.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    write_u16(f, static_cast<std::uint16_t>(v));
  }
}

std::vector<double> resample_nearest(const std::vector<double>& samples, int rate_in,
                                     int rate_out) {
  if (rate_in <= 0 || rate_out <= 0) throw std::invalid_argument("resample: rates must be positive");
  if (rate_in == rate_out) return samples;
  const std::size_t n_out =
      static_cast<std::size_t>(samples.size() * static_cast<double>(rate_out) / rate_in);
  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const auto src = static_cast<std::size_t>(i * static_cast<double>(rate_in) / rate_out + 0.5);
    out[i] = samples[std::min(src, samples.size() - 1)];
  }
  return out;
}

}  // namespace mfgcn::features
