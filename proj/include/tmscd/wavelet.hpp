#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmscd/bspline_filter.hpp"
#include "tmscd/kernels.hpp"
#include "tmscd/spectral.hpp"

namespace tmscd {

enum class FeatureMode { Exact, Sketch };

// Per-scale feature vectors: row f is the feature vector of node-time f.
// Exact mode holds the full NT x NT wavelet matrix; sketch mode holds the NT
// filtered random signals evaluated at each node-time (NT x eta).
struct WaveletFeatures {
  double scale = 0.0;
  FeatureMode mode = FeatureMode::Exact;
  int n = 0;
  int width = 0;
  std::vector<double> rows;  // row-major n x width

  std::span<const double> row(int f) const {
    return {rows.data() + static_cast<std::size_t>(f) * width,
            static_cast<std::size_t>(width)};
  }
};

// Exact wavelet matrix chi diag(g(s lambda)) chi^T from a full decomposition.
WaveletFeatures wavelet_matrix_exact(const SpectralBasis& basis, const WaveletFilterSpec& filter,
                                     double scale);

// Same with explicit per-eigenvalue gains (test hook for degenerate filters).
WaveletFeatures wavelet_matrix_from_gains(const SpectralBasis& basis,
                                          std::span<const double> gains);

// Filters eta seeded random +-1/sqrt(eta) signals through the scaled filter.
// Deterministic for a fixed seed. lambda_max = 2 is always a safe bound for
// the normalized supra-Laplacian; a tighter Gershgorin estimate sharpens the
// Chebyshev resolution.
WaveletFeatures wavelet_sketch_fast(const SupraSystem& sys, const WaveletFilterSpec& filter,
                                    double scale, int eta, std::uint64_t seed, int order = 80,
                                    double lambda_max = 2.0,
                                    kernels::Exec exec = kernels::Exec::Parallel);

// Sketch from caller-provided signals (column-blocked, row-major n x eta).
WaveletFeatures wavelet_sketch_from_signals(const SupraSystem& sys,
                                            const ChebyshevExpansion& expansion,
                                            std::span<const double> signals, int eta,
                                            double scale,
                                            kernels::Exec exec = kernels::Exec::Parallel);

// Feature rows centered and unit-normalized; the correlation distance between
// node-times a and b is 1 - dot(row_a, row_b). Zero-variance rows are flagged
// and kept at distance 1 from everything (uncorrelated convention).
struct CorrelationFeatures {
  int n = 0;
  int width = 0;
  std::vector<double> rows;
  std::vector<std::uint8_t> zero_variance;
  int zero_variance_count = 0;

  double distance(int a, int b) const {
    if (a == b) return 0.0;
    if (zero_variance[a] || zero_variance[b]) return 1.0;
    const double* ra = rows.data() + static_cast<std::size_t>(a) * width;
    const double* rb = rows.data() + static_cast<std::size_t>(b) * width;
    double corr = 0.0;
    for (int c = 0; c < width; ++c) corr += ra[c] * rb[c];
    const double d = 1.0 - corr;
    return d < 0.0 ? 0.0 : (d > 2.0 ? 2.0 : d);
  }
};

CorrelationFeatures correlation_features(const WaveletFeatures& features,
                                         kernels::Exec exec = kernels::Exec::Parallel);

// Full condensed distance matrix (pairs (a, b) with a < b in row-major pair
// order); for tests and small exact-mode instances.
std::vector<double> condensed_distances(const CorrelationFeatures& features);

}  // namespace tmscd
