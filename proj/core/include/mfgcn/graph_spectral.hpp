#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mfgcn::spectral {

/// Small dense square matrix, row-major.  Sized for modality graphs
/// (n <= 32); everything here is plain value semantics.
struct Mat {
  int n = 0;
  std::vector<double> a;

  Mat() = default;
  explicit Mat(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

  static Mat identity(int size);

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  bool symmetric(double tol = 1e-10) const;
  double max_abs() const;
};

Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(double c, const Mat& x);

/// Undirected simple graph over modality nodes with an optional static
/// nonnegative attention mask (all-ones when absent).
struct ModalityGraph {
  int n_nodes = 0;
  Mat adjacency;  // symmetric 0/1, zero diagonal
  Mat mask;       // symmetric nonnegative

  ModalityGraph(Mat adj, Mat msk);
  explicit ModalityGraph(Mat adj);

  static ModalityGraph complete(int n);
  static ModalityGraph cycle(int n);
  static ModalityGraph path(int n);
  static ModalityGraph erdos_renyi(int n, double edge_prob, std::uint64_t seed);
};

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
/// Symmetric; spectrum lies in [-1, 1].
Mat normalize_adjacency(const ModalityGraph& g);

/// I - A_norm.  Rejects asymmetric input.
Mat laplacian(const Mat& a_norm);

/// I - D^{-1/2} A D^{-1/2} without self-loops; the eigenvalue axis used by
/// the closed-form GCN profile on regular graphs.  Isolated nodes keep a
/// zero row (their Laplacian row is just the diagonal 1).
Mat laplacian_without_self_loops(const ModalityGraph& g);

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  Mat eigenvectors;                 // orthonormal columns, paired with eigenvalues
};

/// Cyclic Jacobi diagonalization of a symmetric matrix.  Sweeps until every
/// off-diagonal magnitude drops below 1e-12; throws after 100*n^2 sweeps.
SpectralDecomposition eigendecompose(const Mat& s);

/// Per-eigenpair gain of a symmetric kernel in the supplied eigenbasis:
/// diag(U^T C U), index-aligned with decomp.eigenvalues.
std::vector<double> frequency_response(const Mat& kernel, const SpectralDecomposition& decomp);

/// Largest off-diagonal magnitude of U^T C U; near zero when the kernel is
/// simultaneously diagonalizable with the decomposed operator.
double frequency_response_offdiag(const Mat& kernel, const SpectralDecomposition& decomp);

/// Closed-form frequency profile of the plain GCN kernel on a p-regular
/// graph: 1 - p/(p+1) * lambda, lambda from the no-self-loop Laplacian.
double gcn_profile(int p, double lambda);

/// Two-layer kernels of the multi-frequency block in the linear regime:
/// low  = A^2 - (1-phi) A
/// high = A^2 - phi A + (1-phi) I
/// combined = phi * low + (1-phi) * high
struct MffbmKernels {
  Mat low_two_layer;
  Mat high_two_layer;
  Mat combined;
};
MffbmKernels mffbm_kernels(const Mat& a_norm, double phi, double a_coef);

/// Single-layer high-pass kernel a*A - (1-a)*I and its negation; both sign
/// conventions are exposed for spectrum inspection.
Mat highpass_kernel(const Mat& a_norm, double a_coef);
Mat highpass_kernel_negated(const Mat& a_norm, double a_coef);

/// Single-layer mixed block kernel phi*A + (1-phi)*(a*A - (1-a)*I).
Mat block_kernel(const Mat& a_norm, double phi, double a_coef);

}  // namespace mfgcn::spectral
