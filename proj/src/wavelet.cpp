#include "tmscd/wavelet.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "tmscd/rng.hpp"

namespace tmscd {

WaveletFeatures wavelet_matrix_from_gains(const SpectralBasis& basis,
                                          std::span<const double> gains) {
  if (!basis.full) {
    throw PreconditionError(
        "exact wavelet matrix needs the full spectrum; use the sketch path for partial bases");
  }
  const int n = basis.n;
  if (static_cast<int>(gains.size()) != n) {
    throw PreconditionError("one gain per eigenvalue required");
  }
  Eigen::Map<const Eigen::MatrixXd> chi(basis.eigenvectors.data(), n, n);
  Eigen::Map<const Eigen::VectorXd> g(gains.data(), n);
  Eigen::MatrixXd psi = chi * g.asDiagonal() * chi.transpose();

  WaveletFeatures out;
  out.mode = FeatureMode::Exact;
  out.n = n;
  out.width = n;
  out.rows.resize(static_cast<std::size_t>(n) * n);
  // psi is symmetric, so row-major rows equal its columns either way
  Eigen::Map<Eigen::MatrixXd>(out.rows.data(), n, n) = psi.transpose();
  return out;
}

WaveletFeatures wavelet_matrix_exact(const SpectralBasis& basis, const WaveletFilterSpec& filter,
                                     double scale) {
  filter.validate();
  std::vector<double> gains(basis.k());
  for (int j = 0; j < basis.k(); ++j) {
    gains[j] = evaluate_filter(filter, scale * basis.eigenvalues[j]);
  }
  WaveletFeatures out = wavelet_matrix_from_gains(basis, gains);
  out.scale = scale;
  return out;
}

WaveletFeatures wavelet_sketch_from_signals(const SupraSystem& sys,
                                            const ChebyshevExpansion& expansion,
                                            std::span<const double> signals, int eta,
                                            double scale, kernels::Exec exec) {
  const int n = sys.size();
  if (eta < 1) {
    throw DomainError("sketch width eta must be at least 1");
  }
  if (static_cast<int>(signals.size()) != n * eta) {
    throw PreconditionError("signal block shape must be NT x eta");
  }
  WaveletFeatures out;
  out.scale = scale;
  out.mode = FeatureMode::Sketch;
  out.n = n;
  out.width = eta;
  out.rows.resize(signals.size());
  kernels::chebyshev_apply_block(sys.laplacian, expansion.coeffs, expansion.lambda_max, signals,
                                 out.rows, eta, exec);
  return out;
}

WaveletFeatures wavelet_sketch_fast(const SupraSystem& sys, const WaveletFilterSpec& filter,
                                    double scale, int eta, std::uint64_t seed, int order,
                                    double lambda_max, kernels::Exec exec) {
  if (eta < 1) {
    throw DomainError("sketch width eta must be at least 1");
  }
  const int n = sys.size();
  ChebyshevExpansion expansion = chebyshev_coefficients(filter, scale, order, lambda_max);

  std::vector<double> signals(static_cast<std::size_t>(n) * eta);
  Rng rng(seed);
  const double amp = 1.0 / std::sqrt(static_cast<double>(eta));
  for (double& s : signals) s = amp * rng.rademacher();

  return wavelet_sketch_from_signals(sys, expansion, signals, eta, scale, exec);
}

CorrelationFeatures correlation_features(const WaveletFeatures& features, kernels::Exec exec) {
  CorrelationFeatures out;
  out.n = features.n;
  out.width = features.width;
  out.rows = features.rows;
  kernels::normalize_rows(out.rows, out.n, out.width, out.zero_variance, exec);
  for (std::uint8_t f : out.zero_variance) out.zero_variance_count += f;
  return out;
}

std::vector<double> condensed_distances(const CorrelationFeatures& features) {
  const int n = features.n;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) out.push_back(features.distance(a, b));
  }
  return out;
}

}  // namespace tmscd
