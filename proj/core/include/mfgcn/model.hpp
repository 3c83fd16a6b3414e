#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfgcn/tensor.hpp"

namespace mfgcn::model {

enum class Modality { ensemble, audio, video, gaze };

std::string modality_name(Modality m);
Modality modality_from_name(const std::string& name);

/// Per-modality input contract: feature width from the data, configured
/// maximum sequence length for pad/truncate.
struct EncoderSpec {
  int feature_dim = 0;
  int max_len = 0;
};

struct ModelConfig {
  // filter bank
  double phi = 0.5;
  std::vector<double> phi_i;  // k branch weights, uniform when empty
  double a = 0.5;
  int k = 2;
  int n_layers = 2;  // 0 bypasses the graph trunk (the ablation arm)
  int hidden = 64;   // graph layer width
  int classes = 3;
  std::uint64_t seed = 0;

  // unimodal encoder
  int encoder_channels = 16;
  int encoder_kernel = 3;
  int encoder_pool = 2;
  int embedding_dim = 64;

  // classification head
  int head_hidden1 = 64;
  int head_hidden2 = 32;

  Modality modality = Modality::ensemble;
  std::array<EncoderSpec, 3> encoders{};  // audio, video, gaze

  /// Optional static 3x3 attention mask, row-major; all-ones when absent.
  std::optional<std::vector<double>> mask;

  void validate() const;
  std::vector<double> resolved_phi_i() const;
  int fused_width() const;
};

/// One subject's per-modality feature sequences plus labels.
struct SubjectData {
  std::string id;
  int phq9 = 0;
  int label = 0;
  std::vector<std::vector<double>> audio;  // time x f_audio
  std::vector<std::vector<double>> video;  // time x 7 emotion scores
  std::vector<std::vector<double>> gaze;   // comparisons x 8 metrics
};
using Dataset = std::vector<SubjectData>;

/// Zero-pad or truncate a feature sequence to the encoder's configured
/// length.  Empty sequences and width mismatches are rejected with the
/// subject id in the message.
ad::Tensor prepare_input(const std::vector<std::vector<double>>& seq, const EncoderSpec& spec,
                         const std::string& subject_id);

struct EncoderParams {
  ad::Tensor conv1_w, conv1_b;
  ad::Tensor conv2_w, conv2_b;
  ad::Tensor fc1_w, fc1_b;
  ad::Tensor fc2_w, fc2_b;
};

/// Temporal encoder: conv -> relu -> maxpool -> conv -> relu -> mean over
/// time -> dense+relu -> dense.  Output is one [1, embedding_dim] row.
ad::Tensor unimodal_encoder(ad::Tape& tape, const ad::Tensor& x, const EncoderParams& p,
                            int kernel, int pool);

/// Eq-form low-pass branch: sum_i phi_i * ReLU((A (.) M) h Theta_i).
/// `apply_relu=false` evaluates the linear regime used by spectral checks.
ad::Tensor lowpass_layer(ad::Tape& tape, const ad::Tensor& h, const ad::Tensor& a_masked,
                         const std::vector<ad::Tensor>& thetas, const std::vector<double>& phi_i,
                         bool apply_relu = true);

/// High-pass branch, kernel a*A - (1-a)*I, no activation:
/// a (A (.) M) h Theta - (1-a) h Theta.
ad::Tensor highpass_layer(ad::Tape& tape, const ad::Tensor& h, const ad::Tensor& a_masked,
                          const ad::Tensor& theta, double a_coef);

/// Convex mix of the branches: phi * low + (1-phi) * high.
ad::Tensor mffbm_block(ad::Tape& tape, const ad::Tensor& h, const ad::Tensor& a_masked,
                       const std::vector<ad::Tensor>& low_thetas,
                       const std::vector<double>& phi_i, const ad::Tensor& high_theta,
                       double phi, double a_coef, bool apply_relu = true);

/// Per-channel mean across graph nodes: [n_nodes, d] -> [1, d].
ad::Tensor global_average_pool(ad::Tape& tape, const ad::Tensor& h);

/// Fixed-order channel-wise concatenation (graph, audio, video, gaze).
ad::Tensor fuse(ad::Tape& tape, const ad::Tensor& h_graph, const ad::Tensor& u_audio,
                const ad::Tensor& u_video, const ad::Tensor& u_gaze);

struct HeadParams {
  ad::Tensor w1, b1, w2, b2, w3, b3;
};

/// Two hidden dense layers with ReLU, then softmax.
ad::Tensor classify(ad::Tape& tape, const ad::Tensor& z, const HeadParams& p);

/// Two-layer linear-regime trunk evaluation following the filter-bank
/// expansion bookkeeping: the low path applies the plain aggregation layer on
/// top of the mixed first layer, the high path evaluates
/// A^2 x - phi A x + (1-phi) x on x = h Theta1 Theta2, and the result is the
/// phi-mix of the two.  Equals the combined two-layer kernel applied to
/// h Theta1 Theta2.
ad::Tensor linear_two_layer_expansion(ad::Tape& tape, const ad::Tensor& h,
                                      const ad::Tensor& a_norm, const ad::Tensor& theta1,
                                      const ad::Tensor& theta2, double phi);

class MffbmModel {
 public:
  explicit MffbmModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }

  const std::vector<ad::Tensor>& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return param_names_; }
  void set_params(std::vector<ad::Tensor> params);
  void watch_params(ad::Tape& tape) const;

  /// Normalized adjacency of the 3-node modality graph, mask applied.
  const ad::Tensor& masked_adjacency() const { return a_masked_; }

  struct Forward {
    ad::Tensor probs;         // [n, classes]
    ad::Tensor z;             // fused representation
    ad::Tensor graph_pooled;  // [n, hidden]; invalid when the trunk is bypassed
    std::array<ad::Tensor, 3> embeddings;  // per-modality [n, emb]; invalid if unused
  };
  Forward forward(ad::Tape& tape, const Dataset& batch) const;

  void save(const std::filesystem::path& path) const;
  static MffbmModel load(const std::filesystem::path& path);

 private:
  struct TrunkLayer {
    std::vector<ad::Tensor> low_thetas;
    ad::Tensor high_theta;
  };

  ad::Tensor encode_subject(ad::Tape& tape, const SubjectData& s, int modality_index) const;
  const EncoderParams& encoder(int modality_index) const;

  ModelConfig cfg_;
  std::vector<ad::Tensor> params_;
  std::vector<std::string> param_names_;
  std::array<EncoderParams, 3> encoders_{};
  std::vector<TrunkLayer> trunk_;
  HeadParams head_;
  ad::Tensor a_masked_;

  void rebuild_views();
};

}  // namespace mfgcn::model
