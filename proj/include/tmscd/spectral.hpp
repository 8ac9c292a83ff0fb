#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tmscd/bspline_filter.hpp"
#include "tmscd/common.hpp"
#include "tmscd/kernels.hpp"
#include "tmscd/temporal_graph.hpp"

namespace tmscd {

struct SpectralBasis {
  int n = 0;                          // NT
  std::vector<double> eigenvalues;    // ascending
  std::vector<double> eigenvectors;   // column-major n x k, unit columns
  double lambda_max_estimate = 2.0;   // min(2, Gershgorin), >= true lambda_NT
  bool full = false;                  // k == n

  int k() const { return static_cast<int>(eigenvalues.size()); }
  std::span<const double> eigenvector(int j) const {
    return {eigenvectors.data() + static_cast<std::size_t>(j) * n,
            static_cast<std::size_t>(n)};
  }
};

enum class EigMethod { Auto, Dense, Lanczos };

struct EigOptions {
  EigMethod method = EigMethod::Auto;
  double tol = 1e-10;        // on ||L v - lambda v||
  std::uint64_t seed = 1;    // start-vector seed
  int max_iterations = 0;    // matvec budget; 0 means 10 * NT
  int dense_threshold = 4096;
};

// k smallest eigenpairs of the normalized supra-Laplacian. Dense path for
// small systems, deflated Lanczos with full reorthogonalization otherwise.
// Deterministic for a fixed seed. Single-threaded internally.
SpectralBasis leading_eigenpairs(const SupraSystem& sys, int k, const EigOptions& opts = {});

// Zero-eigenvalue subspace of the decoupled layers: column t is the
// zero-padded, unit-normalized sqrt-degree vector of layer t. Layers that are
// disconnected contribute one extra column per additional component so the
// regression subspace spans the whole per-layer null space.
struct LayerNullBasis {
  int n = 0;
  int n_layers = 0;
  std::vector<std::vector<double>> columns;  // first n_layers are the layer vectors
  std::vector<int> column_layer;
  bool has_disconnected_layer = false;
};

LayerNullBasis layer_null_basis(const TemporalNetwork& net, const SupraSystem& sys);

struct LambdaStarSelection {
  int q_index = 0;       // 1-based position in the eigenvalue ordering
  double lambda_star = 0.0;
  std::vector<double> residual_norms;  // entry tau-1 for tau = 1, 2, ...
  bool capped = false;   // nothing exceeded the threshold up to tau = T+1
};

// Walks the eigenvectors in spectral order and returns the first one whose
// residual against the layer null space exceeds the threshold. At most T+1
// regressions; fewer computed eigenpairs is an error.
LambdaStarSelection select_lambda_star(const SpectralBasis& basis, const LayerNullBasis& nulls,
                                       double threshold = 0.8);

struct ChebyshevExpansion {
  std::vector<double> coeffs;   // c0 is consumed halved
  double lambda_max = 2.0;
  double grid_max_error = 0.0;  // measured on a 1000-point grid
};

// Chebyshev expansion of an arbitrary target on [0, lambda_max] by cosine
// quadrature projection.
ChebyshevExpansion chebyshev_expand(const std::function<double(double)>& target, int order,
                                    double lambda_max);

// Expansion of y -> g(scale * y) for the spline filter.
ChebyshevExpansion chebyshev_coefficients(const WaveletFilterSpec& filter, double scale,
                                          int order, double lambda_max);

// sum_k c_k T_k(Ls) signal where Ls is the supra-Laplacian rescaled to [-1, 1];
// sparse matrix-vector products only.
std::vector<double> apply_filtered_operator(const SupraSystem& sys,
                                            const ChebyshevExpansion& expansion,
                                            std::span<const double> signal,
                                            kernels::Exec exec = kernels::Exec::Serial);

}  // namespace tmscd
