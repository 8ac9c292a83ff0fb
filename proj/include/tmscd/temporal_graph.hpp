#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmscd/common.hpp"
#include "tmscd/sparse.hpp"

namespace tmscd {

// Ordered sequence of undirected layers on a shared node set. Every layer is
// an n_nodes x n_nodes symmetric matrix with zero diagonal and non-negative
// weights; invariants are enforced on construction paths.
struct TemporalNetwork {
  int n_nodes = 0;
  std::vector<CsrMatrix> layers;
  std::optional<std::vector<std::string>> node_labels;

  int n_layers() const { return static_cast<int>(layers.size()); }
  IndexMap index_map() const { return {n_nodes, n_layers()}; }
};

// Per-node coupling weights between consecutive layers: at(t, i) couples the
// copies of node i in layers t and t+1 (t = 0 .. T-2).
struct InterLayerWeights {
  int n_nodes = 0;
  int n_pairs = 0;  // T - 1
  std::vector<double> w;
  bool binarized_input = false;  // LART saw non-binary layer weights

  double at(int t, int i) const { return w[static_cast<std::size_t>(t) * n_nodes + i]; }
  double& at(int t, int i) { return w[static_cast<std::size_t>(t) * n_nodes + i]; }
};

// Supra-adjacency, multilayer degrees and the normalized supra-Laplacian of
// the coupled system. Immutable after construction; safe to share.
struct SupraSystem {
  int n_nodes = 0;
  int n_layers = 0;
  CsrMatrix adjacency;          // block tridiagonal, NT x NT
  std::vector<double> degrees;  // multilayer degrees, all > 0
  CsrMatrix laplacian;          // D^{-1/2} (D - A) D^{-1/2}
  IndexMap map;

  int size() const { return map.size(); }
};

// Edge-list stream: first line "N <int> T <int>", then "t i j w" records
// (1-based t, 0-based node ids, positive weight), whitespace separated.
TemporalNetwork load_temporal_network(std::istream& in);
void save_temporal_network(const TemporalNetwork& net, std::ostream& out);

// w[t][i] = |N_i^t intersect N_i^{t+1}| / 2 over binarized layers.
InterLayerWeights lart_weights(const TemporalNetwork& net);

InterLayerWeights constant_weights(const TemporalNetwork& net, double omega);

// Applies "t i omega" override records (1-based t) on top of existing weights.
void apply_weight_overrides(InterLayerWeights& weights, std::istream& in);

SupraSystem build_supra_system(const TemporalNetwork& net, const InterLayerWeights& weights);

}  // namespace tmscd
