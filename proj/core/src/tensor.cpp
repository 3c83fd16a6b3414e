#include "mfgcn/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfgcn::ad {

namespace {

std::atomic<TensorId> g_next_id{1};

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(op + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

Tensor::Tensor(int rows, int cols, std::vector<double> data, bool requires_grad) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("Tensor: dimensions must be positive, got [" +
                                std::to_string(rows) + "," + std::to_string(cols) + "]");
  }
  if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("Tensor: buffer size " + std::to_string(data.size()) +
                                " does not match shape [" + std::to_string(rows) + "," +
                                std::to_string(cols) + "]");
  }
  auto payload = std::make_shared<Payload>();
  payload->rows = rows;
  payload->cols = cols;
  payload->requires_grad = requires_grad;
  payload->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  payload->data = std::move(data);
  p_ = std::move(payload);
}

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  return Tensor(rows, cols,
                std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0), requires_grad);
}

Tensor Tensor::full(int rows, int cols, double value, bool requires_grad) {
  return Tensor(rows, cols,
                std::vector<double>(static_cast<std::size_t>(rows) * cols, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(1, 1, {value}, requires_grad);
}

Tensor Tensor::identity(int n) {
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i) * n + i] = 1.0;
  return Tensor(n, n, std::move(d));
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw std::invalid_argument("Tensor::item: tensor is " + shape_str() + ", not scalar");
  }
  return p_->data[0];
}

bool Tensor::all_finite() const {
  for (double v : p_->data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  if (!p_) return "[invalid]";
  return "[" + std::to_string(p_->rows) + "," + std::to_string(p_->cols) + "]";
}

Tensor Tensor::detached(bool requires_grad) const {
  return Tensor(rows(), cols(), std::vector<double>(p_->data.begin(), p_->data.end()),
                requires_grad);
}

// --- GradAccum --------------------------------------------------------------

void GradAccum::add(const Tensor& target, std::span<const double> values) {
  auto& e = grads_[target.id()];
  if (e.g.empty()) {
    e.rows = target.rows();
    e.cols = target.cols();
    e.g.assign(target.size(), 0.0);
  }
  for (std::size_t i = 0; i < values.size(); ++i) e.g[i] += values[i];
}

void GradAccum::add_at(const Tensor& target, std::size_t offset, double value) {
  auto& e = grads_[target.id()];
  if (e.g.empty()) {
    e.rows = target.rows();
    e.cols = target.cols();
    e.g.assign(target.size(), 0.0);
  }
  e.g[offset] += value;
}

const std::vector<double>* GradAccum::find(TensorId id) const {
  auto it = grads_.find(id);
  return it == grads_.end() ? nullptr : &it->second.g;
}

// --- Tape -------------------------------------------------------------------

void Tape::watch(const Tensor& t) {
  watched_.push_back(t);
}

bool Tape::needs_grad(const Tensor& t) const {
  return t.requires_grad() || live_.count(t.id()) > 0;
}

void Tape::record(std::vector<TensorId> inputs, const Tensor& output, BackwardFn fn) {
  records_.push_back(Record{std::move(inputs), output.id(), std::move(fn)});
  live_.insert(output.id());
}

GradientMap backward(const Tape& tape, const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " + loss.shape_str());
  }
  GradAccum acc;
  acc.add(loss, std::vector<double>{1.0});

  for (auto it = tape.records_.rbegin(); it != tape.records_.rend(); ++it) {
    const auto* out_grad = acc.find(it->output);
    if (out_grad == nullptr) continue;  // branch not reached by the loss
    it->fn(*out_grad, acc);
  }

  GradientMap result;
  auto emit = [&](const Tensor& t) {
    if (!t.requires_grad()) return;
    if (result.count(t.id())) return;
    const auto* g = acc.find(t.id());
    if (g != nullptr) {
      result.emplace(t.id(), Tensor(t.rows(), t.cols(), *g));
    } else {
      result.emplace(t.id(), Tensor::zeros(t.rows(), t.cols()));
    }
  };
  for (const auto& t : tape.watched_) emit(t);
  return result;
}

// --- op helpers --------------------------------------------------------------

namespace {

/// Record an op if any input participates in gradient flow, remembering
/// requires_grad inputs so backward() can report them.
void record_op(Tape& tape, std::initializer_list<Tensor> inputs, const Tensor& out,
               Tape::BackwardFn fn) {
  bool any = false;
  for (const auto& t : inputs) {
    if (tape.needs_grad(t)) {
      any = true;
      break;
    }
  }
  if (!any) return;
  std::vector<TensorId> ids;
  ids.reserve(inputs.size());
  for (const auto& t : inputs) ids.push_back(t.id());
  tape.record(std::move(ids), out, std::move(fn));
}

}  // namespace

// Tape needs to stash requires_grad inputs; do it through a friend-ish hook.
// Simpler: expose via record_op by touching tape internals is not possible,
// so ops call this helper instead.
static void note_grad_inputs(Tape& tape, std::initializer_list<Tensor> inputs);

// --- operations ---------------------------------------------------------------

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const auto ad = a.data(), bd = b.data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = ad[static_cast<std::size_t>(i) * k + p];
      if (av == 0.0) continue;
      const std::size_t bo = static_cast<std::size_t>(p) * n;
      const std::size_t oo = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) out[oo + j] += av * bd[bo + j];
    }
  }
  Tensor result(m, n, std::move(out));
  note_grad_inputs(tape, {a, b});
  record_op(tape, {a, b}, result, [a, b, m, k, n](const std::vector<double>& g, GradAccum& acc) {
    // dA = G B^T
    std::vector<double> da(static_cast<std::size_t>(m) * k, 0.0);
    const auto bd = b.data();
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
          s += g[static_cast<std::size_t>(i) * n + j] * bd[static_cast<std::size_t>(p) * n + j];
        da[static_cast<std::size_t>(i) * k + p] = s;
      }
    acc.add(a, da);
    // dB = A^T G
    std::vector<double> db(static_cast<std::size_t>(k) * n, 0.0);
    const auto adt = a.data();
    for (int p = 0; p < k; ++p)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
          s += adt[static_cast<std::size_t>(i) * k + p] * g[static_cast<std::size_t>(i) * n + j];
        db[static_cast<std::size_t>(p) * n + j] = s;
      }
    acc.add(b, db);
  });
  return result;
}

Tensor relu(Tape& tape, const Tensor& x) {
  std::vector<double> out(x.size());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  Tensor result(x.rows(), x.cols(), std::move(out));
  note_grad_inputs(tape, {x});
  record_op(tape, {x}, result, [x](const std::vector<double>& g, GradAccum& acc) {
    std::vector<double> dx(x.size(), 0.0);
    const auto xd = x.data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = xd[i] > 0.0 ? g[i] : 0.0;
    acc.add(x, dx);
  });
  return result;
}

Tensor softmax(Tape& tape, const Tensor& logits) {
  if (logits.cols() < 2) {
    throw std::invalid_argument("softmax: need at least 2 classes, got " + logits.shape_str());
  }
  const int n = logits.rows(), c = logits.cols();
  std::vector<double> out(logits.size());
  const auto zd = logits.data();
  for (int i = 0; i < n; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * c;
    double mx = zd[off];
    for (int j = 1; j < c; ++j) mx = std::max(mx, zd[off + j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      out[off + j] = std::exp(zd[off + j] - mx);
      sum += out[off + j];
    }
    for (int j = 0; j < c; ++j) out[off + j] /= sum;
  }
  Tensor result(n, c, std::move(out));
  note_grad_inputs(tape, {logits});
  record_op(tape, {logits}, result,
            [logits, result, n, c](const std::vector<double>& g, GradAccum& acc) {
              std::vector<double> dz(logits.size(), 0.0);
              const auto pd = result.data();
              for (int i = 0; i < n; ++i) {
                const std::size_t off = static_cast<std::size_t>(i) * c;
                double dot = 0.0;
                for (int j = 0; j < c; ++j) dot += g[off + j] * pd[off + j];
                for (int j = 0; j < c; ++j) dz[off + j] = pd[off + j] * (g[off + j] - dot);
              }
              acc.add(logits, dz);
            });
  return result;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty part list");
  const int n = parts[0].rows();
  int total = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) shape_error("concat_cols", parts[0], p);
    total += p.cols();
  }
  std::vector<double> out(static_cast<std::size_t>(n) * total);
  int col0 = 0;
  for (const auto& p : parts) {
    const auto pd = p.data();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p.cols(); ++j)
        out[static_cast<std::size_t>(i) * total + col0 + j] =
            pd[static_cast<std::size_t>(i) * p.cols() + j];
    col0 += p.cols();
  }
  Tensor result(n, total, std::move(out));
  bool any = false;
  for (const auto& p : parts) any = any || tape.needs_grad(p);
  if (any) {
    std::vector<TensorId> ids;
    for (const auto& p : parts) ids.push_back(p.id());
    auto saved = parts;
    for (const auto& p : parts) {
      if (p.requires_grad()) note_grad_inputs(tape, {p});
    }
    tape.record(std::move(ids), result,
                [saved, n, total](const std::vector<double>& g, GradAccum& acc) {
                  int col0 = 0;
                  for (const auto& p : saved) {
                    std::vector<double> dp(p.size());
                    for (int i = 0; i < n; ++i)
                      for (int j = 0; j < p.cols(); ++j)
                        dp[static_cast<std::size_t>(i) * p.cols() + j] =
                            g[static_cast<std::size_t>(i) * total + col0 + j];
                    acc.add(p, dp);
                    col0 += p.cols();
                  }
                });
  }
  return result;
}

Tensor vstack(Tape& tape, const std::vector<Tensor>& rows) {
  if (rows.empty()) throw std::invalid_argument("vstack: empty row list");
  const int d = rows[0].cols();
  int n = 0;
  for (const auto& r : rows) {
    if (r.cols() != d) shape_error("vstack", rows[0], r);
    n += r.rows();
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * d);
  for (const auto& r : rows) out.insert(out.end(), r.data().begin(), r.data().end());
  Tensor result(n, d, std::move(out));
  bool any = false;
  for (const auto& r : rows) any = any || tape.needs_grad(r);
  if (any) {
    std::vector<TensorId> ids;
    for (const auto& r : rows) ids.push_back(r.id());
    auto saved = rows;
    for (const auto& r : rows) {
      if (r.requires_grad()) note_grad_inputs(tape, {r});
    }
    tape.record(std::move(ids), result, [saved](const std::vector<double>& g, GradAccum& acc) {
      std::size_t off = 0;
      for (const auto& r : saved) {
        acc.add(r, std::span<const double>(g.data() + off, r.size()));
        off += r.size();
      }
    });
  }
  return result;
}

namespace {

Tensor binary_elementwise(Tape& tape, const Tensor& a, const Tensor& b, const char* name,
                          double (*fwd)(double, double), double da_coef, double db_coef) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(name, a, b);
  std::vector<double> out(a.size());
  const auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(ad[i], bd[i]);
  Tensor result(a.rows(), a.cols(), std::move(out));
  note_grad_inputs(tape, {a, b});
  record_op(tape, {a, b}, result,
            [a, b, da_coef, db_coef](const std::vector<double>& g, GradAccum& acc) {
              std::vector<double> da(g.size()), db(g.size());
              for (std::size_t i = 0; i < g.size(); ++i) {
                da[i] = da_coef * g[i];
                db[i] = db_coef * g[i];
              }
              acc.add(a, da);
              acc.add(b, db);
            });
  return result;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      tape, a, b, "add", [](double x, double y) { return x + y; }, 1.0, 1.0);
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      tape, a, b, "sub", [](double x, double y) { return x - y; }, 1.0, -1.0);
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("mul", a, b);
  std::vector<double> out(a.size());
  const auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  Tensor result(a.rows(), a.cols(), std::move(out));
  note_grad_inputs(tape, {a, b});
  record_op(tape, {a, b}, result, [a, b](const std::vector<double>& g, GradAccum& acc) {
    const auto ad = a.data(), bd = b.data();
    std::vector<double> da(g.size()), db(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      da[i] = bd[i] * g[i];
      db[i] = ad[i] * g[i];
    }
    acc.add(a, da);
    acc.add(b, db);
  });
  return result;
}

Tensor scale(Tape& tape, const Tensor& x, double c) {
  std::vector<double> out(x.size());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * xd[i];
  Tensor result(x.rows(), x.cols(), std::move(out));
  note_grad_inputs(tape, {x});
  record_op(tape, {x}, result, [x, c](const std::vector<double>& g, GradAccum& acc) {
    std::vector<double> dx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] = c * g[i];
    acc.add(x, dx);
  });
  return result;
}

Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) shape_error("add_row_bias", x, bias);
  const int n = x.rows(), d = x.cols();
  std::vector<double> out(x.size());
  const auto xd = x.data(), bd = bias.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      out[static_cast<std::size_t>(i) * d + j] = xd[static_cast<std::size_t>(i) * d + j] + bd[j];
  Tensor result(n, d, std::move(out));
  note_grad_inputs(tape, {x, bias});
  record_op(tape, {x, bias}, result, [x, bias, n, d](const std::vector<double>& g, GradAccum& acc) {
    acc.add(x, g);
    std::vector<double> db(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) db[j] += g[static_cast<std::size_t>(i) * d + j];
    acc.add(bias, db);
  });
  return result;
}

Tensor mean_rows(Tape& tape, const Tensor& x) {
  const int n = x.rows(), d = x.cols();
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  const auto xd = x.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out[j] += xd[static_cast<std::size_t>(i) * d + j];
  for (int j = 0; j < d; ++j) out[j] /= n;
  Tensor result(1, d, std::move(out));
  note_grad_inputs(tape, {x});
  record_op(tape, {x}, result, [x, n, d](const std::vector<double>& g, GradAccum& acc) {
    std::vector<double> dx(x.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) dx[static_cast<std::size_t>(i) * d + j] = g[j] / n;
    acc.add(x, dx);
  });
  return result;
}

Tensor sum_all(Tape& tape, const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor result = Tensor::scalar(s);
  note_grad_inputs(tape, {x});
  record_op(tape, {x}, result, [x](const std::vector<double>& g, GradAccum& acc) {
    acc.add(x, std::vector<double>(x.size(), g[0]));
  });
  return result;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b, int kernel) {
  const int t_in = x.rows(), in_ch = x.cols();
  if (kernel < 1 || kernel > t_in) {
    throw std::invalid_argument("conv1d: kernel " + std::to_string(kernel) +
                                " invalid for input " + x.shape_str());
  }
  if (w.rows() != kernel * in_ch) shape_error("conv1d weights", x, w);
  const int out_ch = w.cols();
  if (b.rows() != 1 || b.cols() != out_ch) shape_error("conv1d bias", w, b);
  const int t_out = t_in - kernel + 1;

  std::vector<double> out(static_cast<std::size_t>(t_out) * out_ch);
  const auto xd = x.data(), wd = w.data(), bd = b.data();
  for (int t = 0; t < t_out; ++t) {
    for (int o = 0; o < out_ch; ++o) {
      double s = bd[o];
      for (int k = 0; k < kernel; ++k)
        for (int c = 0; c < in_ch; ++c)
          s += xd[static_cast<std::size_t>(t + k) * in_ch + c] *
               wd[static_cast<std::size_t>(k * in_ch + c) * out_ch + o];
      out[static_cast<std::size_t>(t) * out_ch + o] = s;
    }
  }
  Tensor result(t_out, out_ch, std::move(out));
  note_grad_inputs(tape, {x, w, b});
  record_op(tape, {x, w, b}, result,
            [x, w, b, kernel, t_out, in_ch, out_ch](const std::vector<double>& g, GradAccum& acc) {
              const auto xd = x.data(), wd = w.data();
              std::vector<double> dx(x.size(), 0.0), dw(w.size(), 0.0), db(b.size(), 0.0);
              for (int t = 0; t < t_out; ++t) {
                for (int o = 0; o < out_ch; ++o) {
                  const double go = g[static_cast<std::size_t>(t) * out_ch + o];
                  db[o] += go;
                  for (int k = 0; k < kernel; ++k)
                    for (int c = 0; c < in_ch; ++c) {
                      dx[static_cast<std::size_t>(t + k) * in_ch + c] +=
                          go * wd[static_cast<std::size_t>(k * in_ch + c) * out_ch + o];
                      dw[static_cast<std::size_t>(k * in_ch + c) * out_ch + o] +=
                          go * xd[static_cast<std::size_t>(t + k) * in_ch + c];
                    }
                }
              }
              acc.add(x, dx);
              acc.add(w, dw);
              acc.add(b, db);
            });
  return result;
}

Tensor maxpool_rows(Tape& tape, const Tensor& x, int width) {
  if (width < 1) throw std::invalid_argument("maxpool_rows: width must be >= 1");
  const int t_in = x.rows(), d = x.cols();
  const int t_out = t_in / width;
  if (t_out < 1) {
    throw std::invalid_argument("maxpool_rows: input " + x.shape_str() +
                                " shorter than pool width " + std::to_string(width));
  }
  std::vector<double> out(static_cast<std::size_t>(t_out) * d);
  std::vector<int> argmax(static_cast<std::size_t>(t_out) * d);
  const auto xd = x.data();
  for (int t = 0; t < t_out; ++t) {
    for (int j = 0; j < d; ++j) {
      int best = t * width;
      double bv = xd[static_cast<std::size_t>(best) * d + j];
      for (int k = 1; k < width; ++k) {
        const double v = xd[static_cast<std::size_t>(t * width + k) * d + j];
        if (v > bv) {
          bv = v;
          best = t * width + k;
        }
      }
      out[static_cast<std::size_t>(t) * d + j] = bv;
      argmax[static_cast<std::size_t>(t) * d + j] = best;
    }
  }
  Tensor result(t_out, d, std::move(out));
  note_grad_inputs(tape, {x});
  record_op(tape, {x}, result,
            [x, argmax = std::move(argmax), t_out, d](const std::vector<double>& g, GradAccum& acc) {
              std::vector<double> dx(x.size(), 0.0);
              for (int t = 0; t < t_out; ++t)
                for (int j = 0; j < d; ++j)
                  dx[static_cast<std::size_t>(argmax[static_cast<std::size_t>(t) * d + j]) * d + j] +=
                      g[static_cast<std::size_t>(t) * d + j];
              acc.add(x, dx);
            });
  return result;
}

Tensor cross_entropy(Tape& tape, const Tensor& probs, const std::vector<int>& labels) {
  constexpr double kFloor = 1e-12;
  const int n = probs.rows(), c = probs.cols();
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(n) + " rows");
  }
  const auto pd = probs.data();
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= c) {
      throw std::invalid_argument("cross_entropy: label " + std::to_string(labels[i]) +
                                  " out of range [0," + std::to_string(c) + ") at row " +
                                  std::to_string(i));
    }
    double rs = 0.0;
    for (int j = 0; j < c; ++j) rs += pd[static_cast<std::size_t>(i) * c + j];
    if (std::abs(rs - 1.0) > 1e-6) {
      throw std::invalid_argument("cross_entropy: row " + std::to_string(i) +
                                  " is not a probability vector (sum=" + std::to_string(rs) + ")");
    }
  }
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    loss -= std::log(std::max(pd[static_cast<std::size_t>(i) * c + labels[i]], kFloor));
  }
  loss /= n;
  Tensor result = Tensor::scalar(loss);
  note_grad_inputs(tape, {probs});
  record_op(tape, {probs}, result,
            [probs, labels, n, c](const std::vector<double>& g, GradAccum& acc) {
              const auto pd = probs.data();
              std::vector<double> dp(probs.size(), 0.0);
              for (int i = 0; i < n; ++i) {
                const double p = pd[static_cast<std::size_t>(i) * c + labels[i]];
                if (p > kFloor) {
                  dp[static_cast<std::size_t>(i) * c + labels[i]] = -g[0] / (n * p);
                }
              }
              acc.add(probs, dp);
            });
  return result;
}

// Every requires_grad input seen by an op must show up in the backward
// result, zero-filled when the loss never reaches it; watch() provides that
// bookkeeping already.
static void note_grad_inputs(Tape& tape, std::initializer_list<Tensor> inputs) {
  for (const auto& t : inputs) {
    if (t.requires_grad()) tape.watch(t);
  }
}

}  // namespace mfgcn::ad
