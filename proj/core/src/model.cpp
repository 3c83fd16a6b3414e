#include "mfgcn/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mfgcn/rng.hpp"

namespace mfgcn::model {

using ad::Tape;
using ad::Tensor;

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::ensemble: return "ensemble";
    case Modality::audio: return "audio";
    case Modality::video: return "video";
    case Modality::gaze: return "gaze";
  }
  return "ensemble";
}

Modality modality_from_name(const std::string& name) {
  if (name == "ensemble") return Modality::ensemble;
  if (name == "audio") return Modality::audio;
  if (name == "video") return Modality::video;
  if (name == "gaze") return Modality::gaze;
  throw std::invalid_argument("unknown modality '" + name + "'");
}

namespace {

constexpr const char* kModalityKeys[3] = {"audio", "video", "gaze"};

std::vector<int> active_modalities(Modality m) {
  switch (m) {
    case Modality::ensemble: return {0, 1, 2};
    case Modality::audio: return {0};
    case Modality::video: return {1};
    case Modality::gaze: return {2};
  }
  return {0, 1, 2};
}

}  // namespace

void ModelConfig::validate() const {
  if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("config: phi must be in [0,1]");
  if (a < 0.0 || a > 1.0) throw std::invalid_argument("config: a must be in [0,1]");
  if (k < 1) throw std::invalid_argument("config: filter count k must be >= 1");
  if (n_layers < 0) throw std::invalid_argument("config: n_layers must be >= 0");
  if (hidden < 1) throw std::invalid_argument("config: hidden width must be >= 1");
  if (classes != 2 && classes != 3) throw std::invalid_argument("config: classes must be 2 or 3");
  if (embedding_dim < 1) throw std::invalid_argument("config: embedding_dim must be >= 1");
  if (encoder_channels < 1 || encoder_kernel < 1 || encoder_pool < 1) {
    throw std::invalid_argument("config: encoder dimensions must be positive");
  }
  if (head_hidden1 < 1 || head_hidden2 < 1) {
    throw std::invalid_argument("config: head widths must be positive");
  }
  if (!phi_i.empty()) {
    if (static_cast<int>(phi_i.size()) != k) {
      throw std::invalid_argument("config: phi_i has " + std::to_string(phi_i.size()) +
                                  " weights for k=" + std::to_string(k));
    }
    double sum = 0.0;
    for (double w : phi_i) {
      if (w < 0.0) throw std::invalid_argument("config: phi_i weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("config: phi_i must sum to 1, got " + std::to_string(sum));
    }
  }
  for (int mi : active_modalities(modality)) {
    const auto& spec = encoders[mi];
    if (spec.feature_dim < 1) {
      throw std::invalid_argument(std::string("config: encoder '") + kModalityKeys[mi] +
                                  "' feature_dim unset");
    }
    const int after_conv1 = spec.max_len - encoder_kernel + 1;
    const int after_pool = after_conv1 / encoder_pool;
    const int after_conv2 = after_pool - encoder_kernel + 1;
    if (after_conv2 < 1) {
      throw std::invalid_argument(std::string("config: encoder '") + kModalityKeys[mi] +
                                  "' max_len " + std::to_string(spec.max_len) +
                                  " too short for kernel/pool");
    }
  }
  if (mask.has_value() && mask->size() != 9) {
    throw std::invalid_argument("config: mask must hold 9 values (3x3)");
  }
}

std::vector<double> ModelConfig::resolved_phi_i() const {
  if (!phi_i.empty()) return phi_i;
  return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
}

int ModelConfig::fused_width() const {
  if (modality != Modality::ensemble) return embedding_dim;
  if (n_layers == 0) return 3 * embedding_dim;
  return hidden + 3 * embedding_dim;
}

// --- layers -------------------------------------------------------------------

ad::Tensor prepare_input(const std::vector<std::vector<double>>& seq, const EncoderSpec& spec,
                         const std::string& subject_id) {
  if (seq.empty()) {
    throw std::invalid_argument("encoder: empty feature sequence for subject '" + subject_id +
                                "'");
  }
  for (const auto& row : seq) {
    if (static_cast<int>(row.size()) != spec.feature_dim) {
      throw std::invalid_argument("encoder: subject '" + subject_id + "' row width " +
                                  std::to_string(row.size()) + " does not match manifest width " +
                                  std::to_string(spec.feature_dim));
    }
  }
  std::vector<double> data(static_cast<std::size_t>(spec.max_len) * spec.feature_dim, 0.0);
  const int rows = std::min<int>(spec.max_len, static_cast<int>(seq.size()));
  for (int t = 0; t < rows; ++t)
    for (int f = 0; f < spec.feature_dim; ++f)
      data[static_cast<std::size_t>(t) * spec.feature_dim + f] = seq[t][f];
  return Tensor(spec.max_len, spec.feature_dim, std::move(data));
}

ad::Tensor unimodal_encoder(Tape& tape, const Tensor& x, const EncoderParams& p, int kernel,
                            int pool) {
  Tensor h = ad::relu(tape, ad::conv1d(tape, x, p.conv1_w, p.conv1_b, kernel));
  h = ad::maxpool_rows(tape, h, pool);
  h = ad::relu(tape, ad::conv1d(tape, h, p.conv2_w, p.conv2_b, kernel));
  h = ad::mean_rows(tape, h);
  h = ad::relu(tape, ad::add_row_bias(tape, ad::matmul(tape, h, p.fc1_w), p.fc1_b));
  return ad::add_row_bias(tape, ad::matmul(tape, h, p.fc2_w), p.fc2_b);
}

ad::Tensor lowpass_layer(Tape& tape, const Tensor& h, const Tensor& a_masked,
                         const std::vector<Tensor>& thetas, const std::vector<double>& phi_i,
                         bool apply_relu) {
  if (thetas.empty() || thetas.size() != phi_i.size()) {
    throw std::invalid_argument("lowpass_layer: need matching theta/phi_i counts");
  }
  double sum = 0.0;
  for (double w : phi_i) sum += w;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("lowpass_layer: phi_i must sum to 1, got " + std::to_string(sum));
  }
  const Tensor agg = ad::matmul(tape, a_masked, h);
  Tensor out;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    Tensor branch = ad::matmul(tape, agg, thetas[i]);
    if (apply_relu) branch = ad::relu(tape, branch);
    branch = ad::scale(tape, branch, phi_i[i]);
    out = out.valid() ? ad::add(tape, out, branch) : branch;
  }
  return out;
}

ad::Tensor highpass_layer(Tape& tape, const Tensor& h, const Tensor& a_masked,
                          const Tensor& theta, double a_coef) {
  if (a_coef < 0.0 || a_coef > 1.0) {
    throw std::invalid_argument("highpass_layer: a must be in [0,1]");
  }
  const Tensor ht = ad::matmul(tape, h, theta);
  const Tensor agg = ad::matmul(tape, a_masked, ht);
  return ad::sub(tape, ad::scale(tape, agg, a_coef), ad::scale(tape, ht, 1.0 - a_coef));
}

ad::Tensor mffbm_block(Tape& tape, const Tensor& h, const Tensor& a_masked,
                       const std::vector<Tensor>& low_thetas, const std::vector<double>& phi_i,
                       const Tensor& high_theta, double phi, double a_coef, bool apply_relu) {
  const Tensor low = lowpass_layer(tape, h, a_masked, low_thetas, phi_i, apply_relu);
  const Tensor high = highpass_layer(tape, h, a_masked, high_theta, a_coef);
  return ad::add(tape, ad::scale(tape, low, phi), ad::scale(tape, high, 1.0 - phi));
}

ad::Tensor global_average_pool(Tape& tape, const Tensor& h) { return ad::mean_rows(tape, h); }

ad::Tensor fuse(Tape& tape, const Tensor& h_graph, const Tensor& u_audio, const Tensor& u_video,
                const Tensor& u_gaze) {
  return ad::concat_cols(tape, {h_graph, u_audio, u_video, u_gaze});
}

ad::Tensor classify(Tape& tape, const Tensor& z, const HeadParams& p) {
  Tensor h = ad::relu(tape, ad::add_row_bias(tape, ad::matmul(tape, z, p.w1), p.b1));
  h = ad::relu(tape, ad::add_row_bias(tape, ad::matmul(tape, h, p.w2), p.b2));
  h = ad::add_row_bias(tape, ad::matmul(tape, h, p.w3), p.b3);
  return ad::softmax(tape, h);
}

ad::Tensor linear_two_layer_expansion(Tape& tape, const Tensor& h, const Tensor& a_norm,
                                      const Tensor& theta1, const Tensor& theta2, double phi) {
  // layer 1, mixed: phi * A h T1 + (1-phi) * (A h T1 - h T1)
  const Tensor ht1 = ad::matmul(tape, h, theta1);
  const Tensor aht1 = ad::matmul(tape, a_norm, ht1);
  const Tensor mixed1 = ad::add(tape, ad::scale(tape, aht1, phi),
                                ad::scale(tape, ad::sub(tape, aht1, ht1), 1.0 - phi));
  // low path: plain aggregation on top of the mixed layer
  const Tensor low2 = ad::matmul(tape, a_norm, ad::matmul(tape, mixed1, theta2));
  // high path: A^2 x - phi A x + (1-phi) x on x = h T1 T2
  const Tensor x = ad::matmul(tape, ht1, theta2);
  const Tensor ax = ad::matmul(tape, a_norm, x);
  const Tensor aax = ad::matmul(tape, a_norm, ax);
  const Tensor high2 =
      ad::add(tape, ad::sub(tape, aax, ad::scale(tape, ax, phi)), ad::scale(tape, x, 1.0 - phi));
  return ad::add(tape, ad::scale(tape, low2, phi), ad::scale(tape, high2, 1.0 - phi));
}

// --- model --------------------------------------------------------------------

namespace {

Tensor glorot(Rng& rng, int rows, int cols) {
  const double s = std::sqrt(6.0 / (rows + cols));
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = rng.uniform(-s, s);
  return Tensor(rows, cols, std::move(data), /*requires_grad=*/true);
}

Tensor zeros_param(int rows, int cols) {
  return Tensor::zeros(rows, cols, /*requires_grad=*/true);
}

}  // namespace

MffbmModel::MffbmModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(cfg_.seed);

  auto push = [this](const std::string& name, Tensor t) {
    param_names_.push_back(name);
    params_.push_back(std::move(t));
  };

  const int ch = cfg_.encoder_channels;
  const int kk = cfg_.encoder_kernel;
  for (int mi : active_modalities(cfg_.modality)) {
    const std::string prefix = std::string("enc_") + kModalityKeys[mi] + ".";
    const int f = cfg_.encoders[mi].feature_dim;
    push(prefix + "conv1_w", glorot(rng, kk * f, ch));
    push(prefix + "conv1_b", zeros_param(1, ch));
    push(prefix + "conv2_w", glorot(rng, kk * ch, ch));
    push(prefix + "conv2_b", zeros_param(1, ch));
    push(prefix + "fc1_w", glorot(rng, ch, cfg_.embedding_dim));
    push(prefix + "fc1_b", zeros_param(1, cfg_.embedding_dim));
    push(prefix + "fc2_w", glorot(rng, cfg_.embedding_dim, cfg_.embedding_dim));
    push(prefix + "fc2_b", zeros_param(1, cfg_.embedding_dim));
  }

  if (cfg_.modality == Modality::ensemble) {
    for (int layer = 0; layer < cfg_.n_layers; ++layer) {
      const int d_in = layer == 0 ? cfg_.embedding_dim : cfg_.hidden;
      const std::string prefix = "trunk" + std::to_string(layer) + ".";
      for (int i = 0; i < cfg_.k; ++i) {
        push(prefix + "low" + std::to_string(i), glorot(rng, d_in, cfg_.hidden));
      }
      push(prefix + "high", glorot(rng, d_in, cfg_.hidden));
    }
  }

  const int zdim = cfg_.fused_width();
  push("head.w1", glorot(rng, zdim, cfg_.head_hidden1));
  push("head.b1", zeros_param(1, cfg_.head_hidden1));
  push("head.w2", glorot(rng, cfg_.head_hidden1, cfg_.head_hidden2));
  push("head.b2", zeros_param(1, cfg_.head_hidden2));
  push("head.w3", glorot(rng, cfg_.head_hidden2, cfg_.classes));
  push("head.b3", zeros_param(1, cfg_.classes));

  // 3-node complete modality graph, normalized adjacency J/3, mask applied.
  std::vector<double> am(9, 1.0 / 3.0);
  if (cfg_.mask.has_value()) {
    for (int i = 0; i < 9; ++i) am[i] *= (*cfg_.mask)[i];
  }
  a_masked_ = Tensor(3, 3, std::move(am));

  rebuild_views();
}

void MffbmModel::set_params(std::vector<ad::Tensor> params) {
  if (params.size() != params_.size()) {
    throw std::invalid_argument("set_params: expected " + std::to_string(params_.size()) +
                                " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != params_[i].rows() || params[i].cols() != params_[i].cols()) {
      throw std::invalid_argument("set_params: shape mismatch for '" + param_names_[i] + "': " +
                                  params[i].shape_str() + " vs " + params_[i].shape_str());
    }
  }
  params_ = std::move(params);
  rebuild_views();
}

void MffbmModel::watch_params(ad::Tape& tape) const {
  for (const auto& p : params_) tape.watch(p);
}

void MffbmModel::rebuild_views() {
  std::size_t idx = 0;
  auto take = [this, &idx]() -> Tensor { return params_.at(idx++); };

  for (int mi : active_modalities(cfg_.modality)) {
    EncoderParams& e = encoders_[mi];
    e.conv1_w = take();
    e.conv1_b = take();
    e.conv2_w = take();
    e.conv2_b = take();
    e.fc1_w = take();
    e.fc1_b = take();
    e.fc2_w = take();
    e.fc2_b = take();
  }
  trunk_.clear();
  if (cfg_.modality == Modality::ensemble) {
    for (int layer = 0; layer < cfg_.n_layers; ++layer) {
      TrunkLayer tl;
      for (int i = 0; i < cfg_.k; ++i) tl.low_thetas.push_back(take());
      tl.high_theta = take();
      trunk_.push_back(std::move(tl));
    }
  }
  head_.w1 = take();
  head_.b1 = take();
  head_.w2 = take();
  head_.b2 = take();
  head_.w3 = take();
  head_.b3 = take();
}

const EncoderParams& MffbmModel::encoder(int modality_index) const {
  return encoders_[modality_index];
}

ad::Tensor MffbmModel::encode_subject(ad::Tape& tape, const SubjectData& s,
                                      int modality_index) const {
  const std::vector<std::vector<double>>* seq = nullptr;
  switch (modality_index) {
    case 0: seq = &s.audio; break;
    case 1: seq = &s.video; break;
    default: seq = &s.gaze; break;
  }
  const Tensor x = prepare_input(*seq, cfg_.encoders[modality_index], s.id);
  return unimodal_encoder(tape, x, encoder(modality_index), cfg_.encoder_kernel,
                          cfg_.encoder_pool);
}

MffbmModel::Forward MffbmModel::forward(ad::Tape& tape, const Dataset& batch) const {
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");
  const auto active = active_modalities(cfg_.modality);
  const auto phi_i = cfg_.resolved_phi_i();

  std::array<std::vector<Tensor>, 3> rows;
  std::vector<Tensor> graph_rows;
  for (const auto& s : batch) {
    std::array<Tensor, 3> u;
    for (int mi : active) {
      u[mi] = encode_subject(tape, s, mi);
      rows[mi].push_back(u[mi]);
    }
    if (cfg_.modality == Modality::ensemble && cfg_.n_layers > 0) {
      Tensor h = ad::vstack(tape, {u[0], u[1], u[2]});
      for (const auto& layer : trunk_) {
        h = mffbm_block(tape, h, a_masked_, layer.low_thetas, phi_i, layer.high_theta, cfg_.phi,
                        cfg_.a);
      }
      graph_rows.push_back(global_average_pool(tape, h));
    }
  }

  Forward out;
  std::array<Tensor, 3> u_mat;
  for (int mi : active) u_mat[mi] = ad::vstack(tape, rows[mi]);
  out.embeddings = u_mat;

  if (cfg_.modality == Modality::ensemble) {
    if (cfg_.n_layers > 0) {
      out.graph_pooled = ad::vstack(tape, graph_rows);
      out.z = fuse(tape, out.graph_pooled, u_mat[0], u_mat[1], u_mat[2]);
    } else {
      out.z = ad::concat_cols(tape, {u_mat[0], u_mat[1], u_mat[2]});
    }
  } else {
    out.z = u_mat[active[0]];
  }
  out.probs = classify(tape, out.z, head_);
  return out;
}

// --- checkpoint -----------------------------------------------------------------

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["phi"] = c.phi;
  j["phi_i"] = c.phi_i;
  j["a"] = c.a;
  j["k"] = c.k;
  j["n_layers"] = c.n_layers;
  j["hidden"] = c.hidden;
  j["classes"] = c.classes;
  j["seed"] = c.seed;
  j["encoder_channels"] = c.encoder_channels;
  j["encoder_kernel"] = c.encoder_kernel;
  j["encoder_pool"] = c.encoder_pool;
  j["embedding_dim"] = c.embedding_dim;
  j["head_hidden1"] = c.head_hidden1;
  j["head_hidden2"] = c.head_hidden2;
  j["modality"] = modality_name(c.modality);
  nlohmann::json encs = nlohmann::json::array();
  for (const auto& e : c.encoders) {
    encs.push_back({{"feature_dim", e.feature_dim}, {"max_len", e.max_len}});
  }
  j["encoders"] = encs;
  if (c.mask.has_value()) j["mask"] = *c.mask;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.phi = j.at("phi").get<double>();
  c.phi_i = j.at("phi_i").get<std::vector<double>>();
  c.a = j.at("a").get<double>();
  c.k = j.at("k").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.classes = j.at("classes").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.encoder_channels = j.at("encoder_channels").get<int>();
  c.encoder_kernel = j.at("encoder_kernel").get<int>();
  c.encoder_pool = j.at("encoder_pool").get<int>();
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.head_hidden1 = j.at("head_hidden1").get<int>();
  c.head_hidden2 = j.at("head_hidden2").get<int>();
  c.modality = modality_from_name(j.at("modality").get<std::string>());
  const auto& encs = j.at("encoders");
  for (std::size_t i = 0; i < 3 && i < encs.size(); ++i) {
    c.encoders[i].feature_dim = encs[i].at("feature_dim").get<int>();
    c.encoders[i].max_len = encs[i].at("max_len").get<int>();
  }
  if (j.contains("mask")) c.mask = j.at("mask").get<std::vector<double>>();
  return c;
}

}  // namespace

void MffbmModel::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format"] = "mfgcn-model/1";
  j["config"] = config_to_json(cfg_);
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& t = params_[i];
    params.push_back({{"name", param_names_[i]},
                      {"rows", t.rows()},
                      {"cols", t.cols()},
                      {"data", std::vector<double>(t.data().begin(), t.data().end())}});
  }
  j["params"] = std::move(params);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save: cannot write " + path.string());
  f << j.dump(1) << '\n';
}

MffbmModel MffbmModel::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load: cannot read " + path.string());
  nlohmann::json j;
  f >> j;
  if (j.value("format", "") != "mfgcn-model/1") {
    throw std::runtime_error("load: unrecognized checkpoint format in " + path.string());
  }
  MffbmModel model(config_from_json(j.at("config")));
  const auto& params = j.at("params");
  if (params.size() != model.params_.size()) {
    throw std::runtime_error("load: checkpoint has " + std::to_string(params.size()) +
                             " tensors, model expects " + std::to_string(model.params_.size()));
  }
  std::vector<Tensor> loaded;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& pj = params[i];
    const auto name = pj.at("name").get<std::string>();
    if (name != model.param_names_[i]) {
      throw std::runtime_error("load: parameter " + std::to_string(i) + " is '" + name +
                               "', expected '" + model.param_names_[i] + "'");
    }
    const int rows = pj.at("rows").get<int>();
    const int cols = pj.at("cols").get<int>();
    auto data = pj.at("data").get<std::vector<double>>();
    if (rows != model.params_[i].rows() || cols != model.params_[i].cols()) {
      throw std::runtime_error("load: shape mismatch for '" + name + "'");
    }
    loaded.emplace_back(rows, cols, std::move(data), /*requires_grad=*/true);
  }
  model.set_params(std::move(loaded));
  return model;
}

}  // namespace mfgcn::model
