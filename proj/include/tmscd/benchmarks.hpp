#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmscd/temporal_graph.hpp"

namespace tmscd {

// Planted per-layer labels at one or more nested scales.
struct TruthScale {
  std::string name;                      // "large", "medium", "small" or "single"
  std::vector<std::vector<int>> labels;  // per layer, length n_nodes
};

struct GroundTruth {
  std::vector<TruthScale> scales;
  const TruthScale* find(const std::string& name) const;
};

struct GeneratedBenchmark {
  TemporalNetwork network;
  GroundTruth truth;
  nlohmann::json metadata;  // solved probabilities, change schedule, repairs
};

enum class SPChangeClass { SSC, MSC, LSC };

// Time-varying hierarchical benchmark with three nested community scales.
// Connection probabilities are solved from {expected degree = k_bar,
// geometric per-level degree contributions with ratio 2/rho}; a pair of
// communities at the change class's scale merges at ceil(T/3) and splits at
// ceil(2T/3).
struct SPParams {
  double rho = 1.0;
  double k_bar = 16.0;
  int n_nodes = 640;
  int n_layers = 0;  // 0 picks the class default: SSC 21, MSC 17, LSC 33
  SPChangeClass change_class = SPChangeClass::LSC;
  std::uint64_t seed = 0;
  int n_large = 4;
  int medium_per_large = 4;
  int small_per_medium = 4;
  int merge_layer = 0;  // 0 means ceil(T/3)
  int split_layer = 0;  // 0 means ceil(2T/3)
};

GeneratedBenchmark generate_sp_temporal(const SPParams& params);

enum class GranellModel { Grow, Merge, Mixed };

// Single-truth temporal planted-partition benchmarks. Grow: community 0
// absorbs a fixed fraction of community 1 at a constant per-layer rate.
// Merge: the cross probability between communities 2 and 3 ramps linearly to
// the within probability and back; the truth flips where the ramp crosses its
// midpoint. Mixed combines both.
struct GranellParams {
  GranellModel model = GranellModel::Grow;
  int n_nodes = 128;
  int n_layers = 100;
  int n_communities = 4;
  double k_bar = 16.0;
  double mixing = 0.25;       // fraction of degree leaving the community
  double grow_fraction = 0.5; // share of the donor community absorbed by t = T
  std::uint64_t seed = 0;
};

GeneratedBenchmark generate_granell(const GranellParams& params);

}  // namespace tmscd
