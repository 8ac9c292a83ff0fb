#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tmscd/metrics.hpp"
#include "tmscd/partition.hpp"
#include "tmscd/spectral.hpp"
#include "tmscd/wavelet.hpp"

namespace tmscd {

struct DendrogramMerge {
  int a = 0;
  int b = 0;          // cluster ids: leaves 0..n-1, merge step s creates id n+s
  double height = 0.0;
  int size = 0;       // leaves in the new cluster
  bool synthetic = false;  // component-joining merge of a disconnected graph
};

struct Dendrogram {
  int n_leaves = 0;
  std::vector<DendrogramMerge> merges;  // exactly n_leaves - 1
  int clamped_heights = 0;              // inversions flattened to keep heights monotone
  int synthetic_merges = 0;
};

// Agglomerative clustering where only supra-adjacent cluster pairs may merge.
// Linkage is the unweighted average of member-pair distances, maintained by
// the standard running update; distances for pairs that first meet later are
// filled in lazily from the leaf distance oracle, so the averages stay exact.
// Ties break on (distance, smaller first id, smaller second id). Disconnected
// graphs are clustered per component and the roots joined by synthetic merges
// at (max height + 1).
Dendrogram constrained_average_linkage(int n,
                                       const std::function<double(int, int)>& leaf_distance,
                                       const CsrMatrix& adjacency);

// Same agglomeration specialized to the correlation distance: cluster-pair
// averages collapse to dots of per-cluster feature-row sums, so no member
// enumeration is ever needed. Agrees with the oracle form up to rounding.
Dendrogram constrained_average_linkage_features(const CorrelationFeatures& features,
                                                const CsrMatrix& adjacency);

// Cuts at the mean over leaves of the midpoint of each root-leaf path's
// largest height gap between consecutive merges; communities are the
// connected components of merges strictly below the cut. Synthetic merges are
// excluded from the gap statistics.
Partition cut_max_gap(const Dendrogram& dendrogram);

double mean_pairwise_ari(const std::vector<std::vector<int>>& labelings);

struct StabilityOptions {
  int repetitions = 20;
  std::uint64_t seed = 0;
  int eta = 100;
  int order = 80;
  double lambda_max = 2.0;
  FeatureMode mode = FeatureMode::Sketch;
  kernels::Exec exec = kernels::Exec::Parallel;
};

// gamma_a(scale): mean pairwise ARI over R partitions from independently
// seeded sketch pipelines, clamped to [0, 1].
double stability_gamma(const SupraSystem& sys, const WaveletFilterSpec& filter, double scale,
                       const StabilityOptions& opts);

struct DetectConfig {
  FeatureMode mode = FeatureMode::Sketch;
  int n_scales = 50;
  int eta = 100;
  int repetitions = 20;
  int cheb_order = 80;
  double residual_threshold = 0.8;
  std::uint64_t seed = 0;
  bool compute_stability = true;
  std::vector<int> stability_scales;  // empty means every scale
  int threads = 0;                    // 0 keeps the OpenMP default
  int extra_eigenpairs = 4;
  EigOptions eig;
  // optional eigenpair cache hooks (the CLI wires these to the binary cache);
  // they receive the exact solver options so cache keys can cover them
  std::function<bool(const EigOptions&, int k, SpectralBasis&)> load_basis;
  std::function<void(const EigOptions&, int k, const SpectralBasis&)> store_basis;
};

struct MultiScaleResult {
  int n_nodes = 0;
  int n_layers = 0;
  double lambda_star = 0.0;
  int q_index = 0;
  bool q_capped = false;
  std::vector<double> residual_norms;
  std::vector<double> eigenvalues;  // the computed leading eigenvalues
  double lambda_max = 2.0;
  WaveletFilterSpec filter;
  bool y4_fallback = false;
  ScaleGrid grid;
  std::vector<Partition> partitions;   // one per scale
  std::vector<Dendrogram> dendrograms; // one per scale
  std::vector<double> gamma;           // NaN where stability was not computed
  int repetitions = 0;
  bool binarized_weights = false;
  long clamped_heights = 0;
  long synthetic_merges = 0;
  long zero_variance_rows = 0;
};

// Full pipeline: supra system, leading eigenpairs, lambda-star selection,
// filter and scale derivation, then a partition (and optionally a stability
// score) per scale. Deterministic for a fixed config and seed.
MultiScaleResult detect_multiscale(const TemporalNetwork& net, const InterLayerWeights& weights,
                                   const DetectConfig& config);

}  // namespace tmscd
