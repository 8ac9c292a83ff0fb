#include "tmscd/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tmscd/rng.hpp"

namespace tmscd {

const TruthScale* GroundTruth::find(const std::string& name) const {
  for (const TruthScale& s : scales) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

// Bernoulli edges for one layer given a pair-probability callback, plus the
// isolated-node repair: any zero-degree node gets one forced edge to a random
// same-community peer (finest community labels).
CsrMatrix sample_layer(int n, Rng& rng, const std::function<double(int, int)>& probability,
                       const std::vector<int>& finest_labels, int& repairs) {
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = probability(i, j);
      if (p > 0.0 && rng.bernoulli(p)) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!adj[i].empty()) continue;
    std::vector<int> peers;
    for (int j = 0; j < n; ++j) {
      if (j != i && finest_labels[j] == finest_labels[i]) peers.push_back(j);
    }
    if (peers.empty()) {
      for (int j = 0; j < n; ++j) {
        if (j != i) peers.push_back(j);
      }
    }
    const int j = peers[rng.below(peers.size())];
    adj[i].push_back(j);
    adj[j].push_back(i);
    ++repairs;
  }
  std::vector<Triplet> triplets;
  for (int i = 0; i < n; ++i) {
    for (int j : adj[i]) triplets.push_back({i, j, 1.0});
  }
  return csr_from_triplets(n, std::move(triplets));
}

// Geometric degree contributions with per-level caps. Levels are ordered
// finest first; weights f^3, f^2, f, 1 with f = 2 / rho, renormalized to sum
// to k_bar. Contributions above a level's pair capacity are clamped and the
// excess is redistributed over the remaining levels.
std::vector<double> solve_level_degrees(double k_bar, double f, const std::vector<double>& caps) {
  const int levels = static_cast<int>(caps.size());
  std::vector<double> weight(levels);
  for (int l = 0; l < levels; ++l) weight[l] = std::pow(f, levels - 1 - l);
  std::vector<double> k(levels, 0.0);
  std::vector<bool> clamped(levels, false);
  double remaining = k_bar;
  for (int round = 0; round < levels; ++round) {
    double weight_sum = 0.0;
    for (int l = 0; l < levels; ++l) {
      if (!clamped[l]) weight_sum += weight[l];
    }
    if (weight_sum <= 0.0) break;
    bool changed = false;
    for (int l = 0; l < levels; ++l) {
      if (clamped[l]) continue;
      k[l] = remaining * weight[l] / weight_sum;
      if (k[l] > caps[l]) {
        k[l] = caps[l];
        clamped[l] = true;
        changed = true;
      }
    }
    if (!changed) break;
    remaining = k_bar;
    for (int l = 0; l < levels; ++l) {
      if (clamped[l]) remaining -= k[l];
    }
    if (remaining < 0.0) {
      throw DomainError("average degree exceeds the hierarchy's pair capacity");
    }
  }
  return k;
}

}  // namespace

GeneratedBenchmark generate_sp_temporal(const SPParams& params) {
  if (!(params.rho > 0.0) || !(params.k_bar > 0.0)) {
    throw DomainError("rho and k_bar must be positive");
  }
  const int branching = params.n_large * params.medium_per_large * params.small_per_medium;
  if (params.n_large < 2 || params.medium_per_large < 2 || params.small_per_medium < 1 ||
      params.n_nodes <= 0 || params.n_nodes % branching != 0) {
    throw DomainError("n_nodes must be divisible by the hierarchy branching");
  }
  const int n = params.n_nodes;
  const int small_size = n / branching;
  if (small_size < 2) {
    throw DomainError("small communities need at least 2 nodes");
  }
  const int medium_size = small_size * params.small_per_medium;
  const int large_size = medium_size * params.medium_per_large;
  const int n_small = n / small_size;
  const int n_medium = n / medium_size;

  int t_count = params.n_layers;
  if (t_count == 0) {
    t_count = params.change_class == SPChangeClass::SSC   ? 21
              : params.change_class == SPChangeClass::MSC ? 17
                                                          : 33;
  }
  if (t_count < 1) {
    throw DomainError("n_layers must be positive");
  }
  const int merge_at = params.merge_layer > 0
                           ? params.merge_layer
                           : static_cast<int>(std::ceil(t_count / 3.0));
  const int split_at = params.split_layer > 0
                           ? params.split_layer
                           : static_cast<int>(std::ceil(2.0 * t_count / 3.0));

  // expected-degree calibration: contributions per level (small, medium,
  // large, background) against the per-level pair counts
  const std::vector<double> caps = {static_cast<double>(small_size - 1),
                                    static_cast<double>(medium_size - small_size),
                                    static_cast<double>(large_size - medium_size),
                                    static_cast<double>(n - large_size)};
  const std::vector<double> k = solve_level_degrees(params.k_bar, 2.0 / params.rho, caps);
  const double p_small = k[0] / caps[0];
  const double p_medium = k[1] / caps[1];
  const double p_large = k[2] / caps[2];
  const double p_background = caps[3] > 0.0 ? k[3] / caps[3] : 0.0;
  if (!(p_small > p_medium && p_medium > p_large &&
        (caps[3] == 0.0 || p_large > p_background))) {
    throw DomainError("parameters do not yield ordered level probabilities");
  }

  GeneratedBenchmark out;
  out.network.n_nodes = n;
  out.truth.scales = {{"large", {}}, {"medium", {}}, {"small", {}}};

  // static nested labels by block layout; the merging pair is (0, 1) at the
  // change class's scale, always inside the same parent
  std::vector<int> base_small(n), base_medium(n), base_large(n);
  for (int i = 0; i < n; ++i) {
    base_small[i] = i / small_size;
    base_medium[i] = i / medium_size;
    base_large[i] = i / large_size;
  }

  int repairs = 0;
  for (int t = 1; t <= t_count; ++t) {
    const bool merged = t >= merge_at && t < split_at;
    std::vector<int> small = base_small, medium = base_medium, large = base_large;
    if (merged) {
      if (params.change_class == SPChangeClass::SSC) {
        for (int i = 0; i < n; ++i) {
          if (small[i] == 1) small[i] = 0;
        }
      } else if (params.change_class == SPChangeClass::MSC) {
        for (int i = 0; i < n; ++i) {
          if (medium[i] == 1) medium[i] = 0;
        }
      } else {
        for (int i = 0; i < n; ++i) {
          if (large[i] == 1) large[i] = 0;
        }
      }
    }

    Rng rng(derive_seed(params.seed, 0x5A1E5, t));
    auto probability = [&](int i, int j) {
      if (small[i] == small[j]) return p_small;
      if (medium[i] == medium[j]) return p_medium;
      if (large[i] == large[j]) return p_large;
      return p_background;
    };
    out.network.layers.push_back(sample_layer(n, rng, probability, small, repairs));
    out.truth.scales[0].labels.push_back(std::move(large));
    out.truth.scales[1].labels.push_back(std::move(medium));
    out.truth.scales[2].labels.push_back(std::move(small));
  }

  out.metadata = {
      {"family", "sp"},
      {"change_class", params.change_class == SPChangeClass::SSC   ? "ssc"
                       : params.change_class == SPChangeClass::MSC ? "msc"
                                                                   : "lsc"},
      {"n_nodes", n},
      {"n_layers", t_count},
      {"rho", params.rho},
      {"k_bar", params.k_bar},
      {"seed", params.seed},
      {"group_sizes", {{"large", large_size}, {"medium", medium_size}, {"small", small_size}}},
      {"group_counts", {{"large", params.n_large}, {"medium", n_medium}, {"small", n_small}}},
      {"level_degrees", {{"small", k[0]}, {"medium", k[1]}, {"large", k[2]}, {"background", k[3]}}},
      {"probabilities",
       {{"p_small", p_small},
        {"p_medium", p_medium},
        {"p_large", p_large},
        {"p_background", p_background}}},
      {"merge_layer", merge_at},
      {"split_layer", split_at},
      {"isolated_repairs", repairs},
  };
  return out;
}

GeneratedBenchmark generate_granell(const GranellParams& params) {
  const int n = params.n_nodes;
  const int t_count = params.n_layers;
  const int q = params.n_communities;
  if (n < 2 * q || q < 2) {
    throw DomainError("n_nodes too small for the planted community count");
  }
  if (t_count < 1) {
    throw DomainError("n_layers must be positive");
  }
  if (!(params.mixing >= 0.0 && params.mixing < 1.0)) {
    throw DomainError("mixing must lie in [0, 1)");
  }
  if (!(params.grow_fraction >= 0.0 && params.grow_fraction <= 1.0)) {
    throw DomainError("grow_fraction must lie in [0, 1]");
  }

  // equal-size base communities, remainder on the first ones
  std::vector<int> base(n);
  std::vector<int> community_size(q, n / q);
  for (int r = 0; r < n % q; ++r) ++community_size[r];
  {
    int node = 0;
    for (int c = 0; c < q; ++c) {
      for (int s = 0; s < community_size[c]; ++s) base[node++] = c;
    }
  }

  const double k_out = params.k_bar * params.mixing;
  const double k_in = params.k_bar - k_out;
  const double size0 = static_cast<double>(community_size[0]);
  const double p_in = k_in / (size0 - 1.0);
  const double p_out = k_out / (n - size0);
  if (p_in > 1.0 || p_in <= p_out) {
    throw DomainError("degree parameters do not yield a planted structure");
  }

  const bool grows = params.model == GranellModel::Grow || params.model == GranellModel::Mixed;
  const bool merges = params.model == GranellModel::Merge || params.model == GranellModel::Mixed;
  const int donor_pool = static_cast<int>(std::floor(params.grow_fraction * community_size[1]));

  GeneratedBenchmark out;
  out.network.n_nodes = n;
  out.truth.scales = {{"single", {}}};

  int repairs = 0;
  for (int t = 1; t <= t_count; ++t) {
    // grow: the first `moved` members of community 1 belong to community 0
    int moved = 0;
    if (grows && t_count > 1) {
      moved = static_cast<int>(
          std::llround(static_cast<double>(donor_pool) * (t - 1) / (t_count - 1)));
    }
    std::vector<int> labels = base;
    if (moved > 0) {
      int seen = 0;
      for (int i = 0; i < n && seen < moved; ++i) {
        if (base[i] == 1) {
          labels[i] = 0;
          ++seen;
        }
      }
    }

    // merge: cross probability between communities 2 and 3 ramps up to p_in
    // by ceil(T/2) and back down; merged truth while above the midpoint
    double p_cross = p_out;
    if (merges && t_count > 1) {
      const int t_mid = (t_count + 1) / 2;
      const double ramp = t <= t_mid
                              ? static_cast<double>(t - 1) / std::max(1, t_mid - 1)
                              : static_cast<double>(t_count - t) / std::max(1, t_count - t_mid);
      p_cross = p_out + (p_in - p_out) * ramp;
      if (p_cross >= 0.5 * (p_in + p_out)) {
        for (int i = 0; i < n; ++i) {
          if (labels[i] == 3) labels[i] = 2;
        }
      }
    }

    Rng rng(derive_seed(params.seed, 0x6AE11, t));
    auto probability = [&](int i, int j) {
      // the merging pair follows the ramp regardless of the truth switch
      if (merges && ((base[i] == 2 && base[j] == 3) || (base[i] == 3 && base[j] == 2))) {
        return p_cross;
      }
      return labels[i] == labels[j] ? p_in : p_out;
    };
    out.network.layers.push_back(sample_layer(n, rng, probability, labels, repairs));
    out.truth.scales[0].labels.push_back(std::move(labels));
  }

  out.metadata = {
      {"family", "granell"},
      {"model", params.model == GranellModel::Grow    ? "grow"
                : params.model == GranellModel::Merge ? "merge"
                                                      : "mixed"},
      {"n_nodes", n},
      {"n_layers", t_count},
      {"n_communities", q},
      {"k_bar", params.k_bar},
      {"mixing", params.mixing},
      {"p_in", p_in},
      {"p_out", p_out},
      {"grow_fraction", params.grow_fraction},
      {"seed", params.seed},
      {"isolated_repairs", repairs},
  };
  return out;
}

}  // namespace tmscd
