#pragma once

#include <span>
#include <vector>

#include "tmscd/common.hpp"
#include "tmscd/partition.hpp"

namespace tmscd {

// Hubert-Arabie adjusted Rand index. 1 for identical partitions up to
// relabeling, expected 0 under independence. When the adjustment denominator
// vanishes (both partitions degenerate), identical partitions score 1 and
// mixed degenerate pairs score 0.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// Variation of information H(a|b) + H(b|a) normalized by log n, in [0, 1];
// 0 iff the partitions are identical up to relabeling.
double normalized_variation_of_information(std::span<const int> a, std::span<const int> b);

// Mean of the five largest curve values; averages everything when the curve
// is shorter than five.
double success_rate(std::span<const double> curve);

struct SimilarityStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over layers
};

// Per-layer ARI between a flat node-time labeling (layer-major) and per-layer
// truth labels, aggregated over layers.
SimilarityStats layer_similarity(std::span<const int> flat_labels,
                                 const std::vector<std::vector<int>>& truth_per_layer,
                                 int n_nodes);

struct SimilarityCurve {
  std::vector<double> mean;    // one value per detection scale
  std::vector<double> stddev;
};

// The per-scale similarity curve against one truth scale.
SimilarityCurve per_layer_similarity(const std::vector<Partition>& partitions,
                                     const std::vector<std::vector<int>>& truth_per_layer,
                                     int n_nodes);

}  // namespace tmscd
