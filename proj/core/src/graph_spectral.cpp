#include "mfgcn/graph_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mfgcn::spectral {

Mat Mat::identity(int size) {
  Mat m(size);
  for (int i = 0; i < size; ++i) m.at(i, i) = 1.0;
  return m;
}

bool Mat::symmetric(double tol) const {
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(at(i, j) - at(j, i)) > tol) return false;
  return true;
}

double Mat::max_abs() const {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void check_same_size(const Mat& x, const Mat& y, const char* op) {
  if (x.n != y.n) {
    throw std::invalid_argument(std::string(op) + ": size mismatch " + std::to_string(x.n) +
                                " vs " + std::to_string(y.n));
  }
}

}  // namespace

Mat operator+(const Mat& x, const Mat& y) {
  check_same_size(x, y, "Mat+");
  Mat r(x.n);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

Mat operator-(const Mat& x, const Mat& y) {
  check_same_size(x, y, "Mat-");
  Mat r(x.n);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

Mat operator*(const Mat& x, const Mat& y) {
  check_same_size(x, y, "Mat*");
  Mat r(x.n);
  const int n = x.n;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double v = x.at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < n; ++j) r.at(i, j) += v * y.at(k, j);
    }
  return r;
}

Mat operator*(double c, const Mat& x) {
  Mat r(x.n);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = c * x.a[i];
  return r;
}

// --- ModalityGraph ------------------------------------------------------------

ModalityGraph::ModalityGraph(Mat adj, Mat msk) : n_nodes(adj.n), adjacency(std::move(adj)), mask(std::move(msk)) {
  if (n_nodes < 1) throw std::invalid_argument("ModalityGraph: need at least one node");
  if (mask.n != n_nodes) {
    throw std::invalid_argument("ModalityGraph: mask size " + std::to_string(mask.n) +
                                " does not match node count " + std::to_string(n_nodes));
  }
  for (int i = 0; i < n_nodes; ++i) {
    if (adjacency.at(i, i) != 0.0) {
      throw std::invalid_argument("ModalityGraph: nonzero diagonal at node " + std::to_string(i));
    }
    for (int j = 0; j < n_nodes; ++j) {
      const double v = adjacency.at(i, j);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("ModalityGraph: adjacency must be 0/1, found " +
                                    std::to_string(v));
      }
      if (adjacency.at(i, j) != adjacency.at(j, i)) {
        throw std::invalid_argument("ModalityGraph: adjacency not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (mask.at(i, j) < 0.0) {
        throw std::invalid_argument("ModalityGraph: negative mask entry at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      }
      if (std::abs(mask.at(i, j) - mask.at(j, i)) > 1e-12) {
        throw std::invalid_argument("ModalityGraph: mask not symmetric at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      }
    }
  }
}

static Mat all_ones(int n) {
  Mat m(n);
  std::fill(m.a.begin(), m.a.end(), 1.0);
  return m;
}

ModalityGraph::ModalityGraph(Mat adj) : ModalityGraph(Mat(adj), all_ones(adj.n)) {}

ModalityGraph ModalityGraph::complete(int n) {
  if (n < 1) throw std::invalid_argument("complete: n must be >= 1");
  Mat adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) adj.at(i, j) = 1.0;
  return ModalityGraph(std::move(adj), all_ones(n));
}

ModalityGraph ModalityGraph::cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle: n must be >= 3");
  Mat adj(n);
  for (int i = 0; i < n; ++i) {
    adj.at(i, (i + 1) % n) = 1.0;
    adj.at((i + 1) % n, i) = 1.0;
  }
  return ModalityGraph(std::move(adj), all_ones(n));
}

ModalityGraph ModalityGraph::path(int n) {
  if (n < 1) throw std::invalid_argument("path: n must be >= 1");
  Mat adj(n);
  for (int i = 0; i + 1 < n; ++i) {
    adj.at(i, i + 1) = 1.0;
    adj.at(i + 1, i) = 1.0;
  }
  return ModalityGraph(std::move(adj), all_ones(n));
}

ModalityGraph ModalityGraph::erdos_renyi(int n, double edge_prob, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("erdos_renyi: n must be >= 1");
  if (edge_prob < 0.0 || edge_prob > 1.0) {
    throw std::invalid_argument("erdos_renyi: edge probability must be in [0,1]");
  }
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return (rng() >> 11) * (1.0 / 9007199254740992.0); };
  Mat adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unit() < edge_prob) {
        adj.at(i, j) = 1.0;
        adj.at(j, i) = 1.0;
      }
  return ModalityGraph(std::move(adj), all_ones(n));
}

// --- spectral operations -------------------------------------------------------

Mat normalize_adjacency(const ModalityGraph& g) {
  const int n = g.n_nodes;
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    double deg = 1.0;  // self-loop
    for (int j = 0; j < n; ++j) deg += g.adjacency.at(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Mat out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double aij = g.adjacency.at(i, j) + (i == j ? 1.0 : 0.0);
      out.at(i, j) = inv_sqrt_deg[i] * aij * inv_sqrt_deg[j];
    }
  return out;
}

Mat laplacian(const Mat& a_norm) {
  if (!a_norm.symmetric()) throw std::invalid_argument("laplacian: input is not symmetric");
  return Mat::identity(a_norm.n) - a_norm;
}

Mat laplacian_without_self_loops(const ModalityGraph& g) {
  const int n = g.n_nodes;
  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += g.adjacency.at(i, j);
    inv_sqrt_deg[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Mat out = Mat::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.at(i, j) -= inv_sqrt_deg[i] * g.adjacency.at(i, j) * inv_sqrt_deg[j];
  return out;
}

SpectralDecomposition eigendecompose(const Mat& s) {
  if (s.n < 1) throw std::invalid_argument("eigendecompose: empty matrix");
  if (!s.symmetric()) throw std::invalid_argument("eigendecompose: input is not symmetric");

  const int n = s.n;
  Mat a = s;
  Mat v = Mat::identity(n);
  constexpr double kTol = 1e-12;
  const long max_sweeps = 100L * n * n;

  auto max_offdiag = [&a, n] {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) m = std::max(m, std::abs(a.at(i, j)));
    return m;
  };

  long sweep = 0;
  while (max_offdiag() >= kTol) {
    if (++sweep > max_sweeps) {
      throw std::runtime_error("eigendecompose: Jacobi failed to converge after " +
                               std::to_string(max_sweeps) + " sweeps");
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < kTol * 1e-3) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - sn * akq;
          a.at(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - sn * aqk;
          a.at(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - sn * vkq;
          v.at(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&a](int x, int y) { return a.at(x, x) < a.at(y, y); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Mat(n);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = a.at(order[j], order[j]);
    for (int i = 0; i < n; ++i) out.eigenvectors.at(i, j) = v.at(i, order[j]);
  }
  return out;
}

namespace {

Mat conjugated(const Mat& kernel, const SpectralDecomposition& decomp) {
  if (!kernel.symmetric()) {
    throw std::invalid_argument("frequency_response: kernel is not symmetric");
  }
  check_same_size(kernel, decomp.eigenvectors, "frequency_response");
  const int n = kernel.n;
  const Mat& u = decomp.eigenvectors;
  // U^T C U
  Mat cu(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += kernel.at(i, k) * u.at(k, j);
      cu.at(i, j) = s;
    }
  Mat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += u.at(k, i) * cu.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

}  // namespace

std::vector<double> frequency_response(const Mat& kernel, const SpectralDecomposition& decomp) {
  Mat r = conjugated(kernel, decomp);
  std::vector<double> diag(kernel.n);
  for (int i = 0; i < kernel.n; ++i) diag[i] = r.at(i, i);
  return diag;
}

double frequency_response_offdiag(const Mat& kernel, const SpectralDecomposition& decomp) {
  Mat r = conjugated(kernel, decomp);
  double m = 0.0;
  for (int i = 0; i < kernel.n; ++i)
    for (int j = 0; j < kernel.n; ++j)
      if (i != j) m = std::max(m, std::abs(r.at(i, j)));
  return m;
}

double gcn_profile(int p, double lambda) {
  if (p < 1) throw std::invalid_argument("gcn_profile: degree must be >= 1");
  return 1.0 - (static_cast<double>(p) / (p + 1)) * lambda;
}

MffbmKernels mffbm_kernels(const Mat& a_norm, double phi, double a_coef) {
  if (!a_norm.symmetric()) throw std::invalid_argument("mffbm_kernels: A_norm is not symmetric");
  if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("mffbm_kernels: phi must be in [0,1]");
  if (a_coef < 0.0 || a_coef > 1.0) throw std::invalid_argument("mffbm_kernels: a must be in [0,1]");
  const Mat a2 = a_norm * a_norm;
  const Mat eye = Mat::identity(a_norm.n);
  MffbmKernels k;
  k.low_two_layer = a2 - (1.0 - phi) * a_norm;
  k.high_two_layer = (a2 - phi * a_norm) + (1.0 - phi) * eye;
  k.combined = phi * k.low_two_layer + (1.0 - phi) * k.high_two_layer;
  return k;
}

Mat highpass_kernel(const Mat& a_norm, double a_coef) {
  return a_coef * a_norm - (1.0 - a_coef) * Mat::identity(a_norm.n);
}

Mat highpass_kernel_negated(const Mat& a_norm, double a_coef) {
  return (1.0 - a_coef) * Mat::identity(a_norm.n) - a_coef * a_norm;
}

Mat block_kernel(const Mat& a_norm, double phi, double a_coef) {
  return phi * a_norm + (1.0 - phi) * highpass_kernel(a_norm, a_coef);
}

}  // namespace mfgcn::spectral
