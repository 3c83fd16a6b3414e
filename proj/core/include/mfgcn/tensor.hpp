#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mfgcn::ad {

using TensorId = std::uint64_t;

/// Dense rank-2 array of doubles, row-major.  A Tensor is an immutable value:
/// once constructed its buffer never changes, so sharing across threads and
/// capturing into backward closures is safe.  A "scalar" is a 1x1 tensor.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor full(int rows, int cols, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor identity(int n);

  bool valid() const { return p_ != nullptr; }
  int rows() const { return p_->rows; }
  int cols() const { return p_->cols; }
  std::size_t size() const { return p_->data.size(); }
  bool requires_grad() const { return p_->requires_grad; }
  TensorId id() const { return p_->id; }

  std::span<const double> data() const { return p_->data; }
  double at(int r, int c) const { return p_->data[static_cast<std::size_t>(r) * p_->cols + c]; }
  double item() const;  // value of a 1x1 tensor

  bool all_finite() const;
  std::string shape_str() const;

  /// Same values, new identity, with the given grad flag.
  Tensor detached(bool requires_grad = false) const;

 private:
  struct Payload {
    int rows = 0;
    int cols = 0;
    bool requires_grad = false;
    TensorId id = 0;
    std::vector<double> data;
  };
  std::shared_ptr<const Payload> p_;
};

/// Gradient buffers accumulated during a backward pass, keyed by tensor id.
class GradAccum {
 public:
  void add(const Tensor& target, std::span<const double> values);
  void add_at(const Tensor& target, std::size_t offset, double value);
  const std::vector<double>* find(TensorId id) const;

 private:
  struct Entry {
    int rows = 0, cols = 0;
    std::vector<double> g;
  };
  std::unordered_map<TensorId, Entry> grads_;
  friend class Tape;
};

using GradientMap = std::unordered_map<TensorId, Tensor>;

/// Ordered record of executed operations.  Every entry stores the ids of its
/// operands and a closure that maps the output gradient onto input gradients.
/// Entries are appended in execution order, so the record is topological by
/// construction and a single reverse sweep visits each operation once.
class Tape {
 public:
  using BackwardFn = std::function<void(const std::vector<double>& out_grad, GradAccum& acc)>;

  /// Register a parameter so backward() reports a (possibly zero) gradient
  /// for it even when the loss never touches it.
  void watch(const Tensor& t);

  /// True when gradient must flow through `t`: it either asks for gradients
  /// itself or was produced by a recorded operation.
  bool needs_grad(const Tensor& t) const;

  void record(std::vector<TensorId> inputs, const Tensor& output, BackwardFn fn);

  std::size_t num_records() const { return records_.size(); }

  friend GradientMap backward(const Tape& tape, const Tensor& loss);

 private:
  struct Record {
    std::vector<TensorId> inputs;
    TensorId output;
    BackwardFn fn;
  };
  std::vector<Record> records_;
  std::vector<Tensor> watched_;
  std::unordered_set<TensorId> live_;  // outputs of recorded ops
};

/// Gradients of a scalar loss w.r.t. every requires_grad tensor on the tape.
/// Watched parameters the loss never reaches map to zero tensors.
GradientMap backward(const Tape& tape, const Tensor& loss);

// ---------------------------------------------------------------------------
// Operations.  Each records its backward rule on the tape when gradient has
// to flow; shapes are validated eagerly and mismatches throw
// std::invalid_argument with both shapes in the message.
// ---------------------------------------------------------------------------

/// [m,k] x [k,n] -> [m,n]; backward dA = G B^T, dB = A^T G.
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// Elementwise max(0, x); gradient passes only where x > 0.
Tensor relu(Tape& tape, const Tensor& x);

/// Row-wise softmax with max-shift; requires at least 2 columns.
Tensor softmax(Tape& tape, const Tensor& logits);

/// Append columns of the parts in argument order; all parts share rows.
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);

/// Stack 1-row tensors into an [n,d] matrix.
Tensor vstack(Tape& tape, const std::vector<Tensor>& rows);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(Tape& tape, const Tensor& x, double c);

/// [n,d] + [1,d], bias added to every row.
Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias);

/// Column means over rows: [n,d] -> [1,d].
Tensor mean_rows(Tape& tape, const Tensor& x);

/// Sum of all entries -> scalar.
Tensor sum_all(Tape& tape, const Tensor& x);

/// 1-D convolution over rows (time).  x is [T, in_ch], w is [K*in_ch, out_ch]
/// with patch layout (k*in_ch + c), b is [1, out_ch]; output [T-K+1, out_ch].
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b, int kernel);

/// Non-overlapping max over `width` consecutive rows; remainder rows drop.
/// Ties resolve to the earliest row.
Tensor maxpool_rows(Tape& tape, const Tensor& x, int width);

/// Mean negative log-likelihood of row-stochastic probabilities with a 1e-12
/// probability floor.  labels[i] selects the positive class of row i.
Tensor cross_entropy(Tape& tape, const Tensor& probs, const std::vector<int>& labels);

}  // namespace mfgcn::ad
