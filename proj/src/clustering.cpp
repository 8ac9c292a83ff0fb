#include "tmscd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "tmscd/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tmscd {

namespace {

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Candidate {
  double distance;
  int a, b;  // a < b
  bool operator>(const Candidate& o) const {
    if (distance != o.distance) return distance > o.distance;
    if (a != o.a) return a > o.a;
    return b > o.b;
  }
};

// Active clusters referenced by id; merged clusters keep child links so that
// member sets can be enumerated without storing them.
struct ClusterForest {
  std::vector<int> size;
  std::vector<int> child_a, child_b;

  explicit ClusterForest(int n) : size(n, 1), child_a(n, -1), child_b(n, -1) {}

  int add(int a, int b) {
    size.push_back(size[a] + size[b]);
    child_a.push_back(a);
    child_b.push_back(b);
    return static_cast<int>(size.size()) - 1;
  }

  void members(int id, std::vector<int>& out) const {
    out.clear();
    std::vector<int> stack{id};
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      if (child_a[c] < 0) {
        out.push_back(c);
      } else {
        stack.push_back(child_a[c]);
        stack.push_back(child_b[c]);
      }
    }
  }
};

// Shared agglomeration core. The policy supplies initial leaf-pair distances
// and merged-pair distances; everything else (constraint bookkeeping, heap,
// tie-breaking, monotone heights, synthetic top merges) is common.
template <typename Policy>
Dendrogram linkage_core(int n, const CsrMatrix& adjacency, Policy&& policy) {
  if (n < 1 || adjacency.n != n) {
    throw PreconditionError("adjacency must cover all leaves");
  }
  Dendrogram dend;
  dend.n_leaves = n;
  if (n == 1) return dend;

  ClusterForest forest(n);
  std::vector<bool> alive(n, true);
  std::vector<std::unordered_set<int>> neighbors(n);
  std::unordered_map<std::uint64_t, double> pair_distance;
  pair_distance.reserve(static_cast<std::size_t>(adjacency.nnz()));
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> heap;

  for (int i = 0; i < n; ++i) {
    for (int j : adjacency.row_cols(i)) {
      if (j == i || j < i) continue;
      neighbors[i].insert(j);
      neighbors[j].insert(i);
      const double d = policy.leaf_pair(i, j);
      pair_distance.emplace(pair_key(i, j), d);
      heap.push({d, i, j});
    }
  }

  double last_height = -std::numeric_limits<double>::infinity();
  int merges_done = 0;
  const int total_merges = n - 1;

  while (merges_done < total_merges && !heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (!alive[top.a] || !alive[top.b]) continue;
    const auto it = pair_distance.find(pair_key(top.a, top.b));
    if (it == pair_distance.end() || it->second != top.distance) continue;  // stale entry

    const int a = top.a, b = top.b;
    double height = top.distance;
    if (height < last_height) {
      height = last_height;  // constrained linkage can invert; keep heights monotone
      ++dend.clamped_heights;
    }
    last_height = height;

    const int merged = forest.add(a, b);
    policy.merge(merged, a, b);
    alive[a] = alive[b] = false;
    alive.push_back(true);
    dend.merges.push_back({a, b, height, forest.size[merged], false});
    ++merges_done;

    // union of neighbor sets, deterministic order
    std::vector<int> update;
    update.reserve(neighbors[a].size() + neighbors[b].size());
    for (int c : neighbors[a]) {
      if (c != b && alive[c]) update.push_back(c);
    }
    for (int c : neighbors[b]) {
      if (c != a && alive[c] && !neighbors[a].count(c)) update.push_back(c);
    }
    std::sort(update.begin(), update.end());

    neighbors.emplace_back();
    for (int c : update) {
      const double d = policy.merged_pair(forest, pair_distance, merged, a, b, c);
      pair_distance[pair_key(merged, c)] = d;
      neighbors[merged].insert(c);
      neighbors[c].insert(merged);
      heap.push({d, std::min(merged, c), std::max(merged, c)});
      neighbors[c].erase(a);
      neighbors[c].erase(b);
      pair_distance.erase(pair_key(a, c));
      pair_distance.erase(pair_key(b, c));
    }
    pair_distance.erase(pair_key(a, b));
    neighbors[a].clear();
    neighbors[b].clear();
  }

  // disconnected graph: join the remaining roots at (max height + 1)
  if (merges_done < total_merges) {
    std::vector<int> roots;
    for (int id = 0; id < static_cast<int>(alive.size()); ++id) {
      if (alive[id]) roots.push_back(id);
    }
    const double synthetic_height =
        (dend.merges.empty() ? 0.0 : dend.merges.back().height) + 1.0;
    int current = roots[0];
    for (std::size_t r = 1; r < roots.size(); ++r) {
      const int merged = forest.add(current, roots[r]);
      dend.merges.push_back({current, roots[r], synthetic_height, forest.size[merged], true});
      ++dend.synthetic_merges;
      current = merged;
    }
  }
  return dend;
}

// Exact unweighted average linkage against an arbitrary leaf-distance oracle.
// Pairs that first meet after earlier merges are filled in lazily by the
// member-pair mean, so the running Lance-Williams update stays exact.
struct OraclePolicy {
  const std::function<double(int, int)>& leaf_distance;
  std::vector<int> members_x, members_y;

  double leaf_pair(int i, int j) { return leaf_distance(i, j); }

  void merge(int, int, int) {}

  double lazy(const ClusterForest& forest,
              const std::unordered_map<std::uint64_t, double>& pair_distance, int x, int y) {
    const auto it = pair_distance.find(pair_key(x, y));
    if (it != pair_distance.end()) return it->second;
    forest.members(x, members_x);
    forest.members(y, members_y);
    double acc = 0.0;
    for (int u : members_x) {
      for (int v : members_y) acc += leaf_distance(u, v);
    }
    return acc / (static_cast<double>(members_x.size()) * members_y.size());
  }

  double merged_pair(const ClusterForest& forest,
                     const std::unordered_map<std::uint64_t, double>& pair_distance, int merged,
                     int a, int b, int c) {
    (void)merged;
    const double d_ac = lazy(forest, pair_distance, a, c);
    const double d_bc = lazy(forest, pair_distance, b, c);
    const int sa = forest.size[a], sb = forest.size[b];
    return (sa * d_ac + sb * d_bc) / static_cast<double>(sa + sb);
  }
};

// Average linkage specialized to the correlation distance. With rows centered
// and unit-normalized, the member-pair mean collapses to
//   D(X, Y) = 1 - (S_X . S_Y) / (|X| |Y|),   S_X = sum of member rows,
// so any cluster pair costs one dot of the maintained sum vectors. Flagged
// zero-variance rows are stored as zero vectors, which reproduces their
// fixed distance of 1.
struct FeatureSumPolicy {
  const CorrelationFeatures& features;
  std::vector<double> sums;  // one width-long sum vector per cluster id

  explicit FeatureSumPolicy(const CorrelationFeatures& f, int n) : features(f) {
    sums.reserve(static_cast<std::size_t>(2 * n - 1) * f.width);
    sums.assign(f.rows.begin(), f.rows.begin() + static_cast<std::size_t>(n) * f.width);
  }

  double leaf_pair(int i, int j) { return features.distance(i, j); }

  void merge(int merged, int a, int b) {
    const int width = features.width;
    const std::size_t base = sums.size();
    sums.resize(base + width);
    const double* sa = sums.data() + static_cast<std::size_t>(a) * width;
    const double* sb = sums.data() + static_cast<std::size_t>(b) * width;
    double* out = sums.data() + base;
    for (int c = 0; c < width; ++c) out[c] = sa[c] + sb[c];
    (void)merged;
  }

  double merged_pair(const ClusterForest& forest,
                     const std::unordered_map<std::uint64_t, double>&, int merged, int, int,
                     int c) {
    const int width = features.width;
    const double* sm = sums.data() + static_cast<std::size_t>(merged) * width;
    const double* sc = sums.data() + static_cast<std::size_t>(c) * width;
    double corr = 0.0;
    for (int k = 0; k < width; ++k) corr += sm[k] * sc[k];
    const double d =
        1.0 - corr / (static_cast<double>(forest.size[merged]) * forest.size[c]);
    return d < 0.0 ? 0.0 : (d > 2.0 ? 2.0 : d);
  }
};

}  // namespace

Dendrogram constrained_average_linkage(int n,
                                       const std::function<double(int, int)>& leaf_distance,
                                       const CsrMatrix& adjacency) {
  OraclePolicy policy{leaf_distance, {}, {}};
  return linkage_core(n, adjacency, policy);
}

Dendrogram constrained_average_linkage_features(const CorrelationFeatures& features,
                                                const CsrMatrix& adjacency) {
  FeatureSumPolicy policy(features, features.n);
  return linkage_core(features.n, adjacency, policy);
}

Partition cut_max_gap(const Dendrogram& dendrogram) {
  const int n = dendrogram.n_leaves;
  Partition part;
  if (n == 1) {
    part.labels = {0};
    part.n_communities = 1;
    return part;
  }

  // Parents for the top-down walk; synthetic merges are skipped so their
  // children behave as roots.
  const int total = n + static_cast<int>(dendrogram.merges.size());
  std::vector<int> parent(total, -1);
  for (std::size_t s = 0; s < dendrogram.merges.size(); ++s) {
    const DendrogramMerge& m = dendrogram.merges[s];
    if (m.synthetic) continue;
    parent[m.a] = n + static_cast<int>(s);
    parent[m.b] = n + static_cast<int>(s);
  }

  // One top-down pass per real root carrying the best (gap, top) so far.
  // A path that touches a single merge has no consecutive-merge gap; it falls
  // back to that merge's full height (top = height, gap = height).
  struct PathState {
    double best_gap;
    double best_top;
    bool has_gap;
  };
  std::vector<PathState> state(total, {0.0, 0.0, false});
  double cut_accumulator = 0.0;

  auto merge_of = [&](int id) -> const DendrogramMerge& {
    return dendrogram.merges[id - n];
  };

  for (int s = static_cast<int>(dendrogram.merges.size()) - 1; s >= 0; --s) {
    if (dendrogram.merges[s].synthetic) continue;
    const int id = n + s;
    if (parent[id] >= 0) continue;  // not a root
    // iterative DFS from this root
    std::vector<int> stack{id};
    state[id] = {merge_of(id).height, merge_of(id).height, false};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (v < n) {
        const PathState& ps = state[v];
        cut_accumulator += ps.best_top - 0.5 * ps.best_gap;
        continue;
      }
      const DendrogramMerge& m = merge_of(v);
      for (int child : {m.a, m.b}) {
        PathState child_state = state[v];
        if (child >= n) {
          const double gap = m.height - merge_of(child).height;
          if (!child_state.has_gap || gap > child_state.best_gap) {
            child_state.best_gap = gap;
            child_state.best_top = m.height;
            child_state.has_gap = true;
          }
        }
        state[child] = child_state;
        stack.push_back(child);
      }
    }
  }

  // leaves that are direct children of synthetic merges never got a state:
  // they are singleton communities above every real merge
  int orphan_leaves = 0;
  std::vector<bool> reached(n, false);
  {
    std::vector<int> stack;
    for (int s = static_cast<int>(dendrogram.merges.size()) - 1; s >= 0; --s) {
      if (dendrogram.merges[s].synthetic) continue;
      const int id = n + s;
      if (parent[id] >= 0) continue;
      stack.push_back(id);
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (v < n) {
          reached[v] = true;
          continue;
        }
        stack.push_back(merge_of(v).a);
        stack.push_back(merge_of(v).b);
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!reached[i]) ++orphan_leaves;
    }
  }

  const int counted_leaves = n - orphan_leaves;
  const double cut_height = counted_leaves > 0 ? cut_accumulator / counted_leaves : 0.0;

  // communities: connected components of merges strictly below the cut
  std::vector<int> comp(total);
  for (int i = 0; i < total; ++i) comp[i] = i;
  auto find = [&](int x) {
    while (comp[x] != x) {
      comp[x] = comp[comp[x]];
      x = comp[x];
    }
    return x;
  };
  for (std::size_t s = 0; s < dendrogram.merges.size(); ++s) {
    const DendrogramMerge& m = dendrogram.merges[s];
    if (m.synthetic || m.height >= cut_height) continue;
    const int id = n + static_cast<int>(s);
    comp[find(m.a)] = find(id);
    comp[find(m.b)] = find(id);
  }

  part.labels.assign(n, -1);
  std::unordered_map<int, int> label_of_root;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    auto [it, inserted] = label_of_root.emplace(root, static_cast<int>(label_of_root.size()));
    part.labels[i] = it->second;
  }
  part.n_communities = static_cast<int>(label_of_root.size());
  return part;
}

double mean_pairwise_ari(const std::vector<std::vector<int>>& labelings) {
  const int r = static_cast<int>(labelings.size());
  if (r < 2) {
    throw DomainError("pairwise agreement needs at least 2 partitions");
  }
  double acc = 0.0;
  int pairs = 0;
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      acc += adjusted_rand_index(labelings[i], labelings[j]);
      ++pairs;
    }
  }
  return acc / pairs;
}

namespace {

struct ScaleOutcome {
  Partition partition;
  Dendrogram dendrogram;
  int zero_variance = 0;
};

ScaleOutcome run_scale_partition(const SupraSystem& sys, const CorrelationFeatures& features,
                                 double scale) {
  ScaleOutcome out;
  out.dendrogram = constrained_average_linkage_features(features, sys.adjacency);
  out.partition = cut_max_gap(out.dendrogram);
  out.partition.scale = scale;
  out.zero_variance = features.zero_variance_count;
  return out;
}

ScaleOutcome run_scale_sketch(const SupraSystem& sys, const ChebyshevExpansion& expansion,
                              double scale, int eta, std::uint64_t seed, kernels::Exec exec) {
  const int n = sys.size();
  std::vector<double> signals(static_cast<std::size_t>(n) * eta);
  Rng rng(seed);
  const double amp = 1.0 / std::sqrt(static_cast<double>(eta));
  for (double& s : signals) s = amp * rng.rademacher();
  WaveletFeatures feats = wavelet_sketch_from_signals(sys, expansion, signals, eta, scale, exec);
  CorrelationFeatures corr = correlation_features(feats, exec);
  return run_scale_partition(sys, corr, scale);
}

}  // namespace

double stability_gamma(const SupraSystem& sys, const WaveletFilterSpec& filter, double scale,
                       const StabilityOptions& opts) {
  if (opts.mode == FeatureMode::Exact) {
    throw DomainError(
        "stability needs resampling variability; use sketch mode (exact mode is deterministic)");
  }
  if (opts.repetitions < 2) {
    throw DomainError("stability needs at least 2 repetitions");
  }
  ChebyshevExpansion expansion =
      chebyshev_coefficients(filter, scale, opts.order, opts.lambda_max);
  std::vector<std::vector<int>> labelings;
  labelings.reserve(opts.repetitions);
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(opts.seed, 0x57AB, rep);
    ScaleOutcome outcome =
        run_scale_sketch(sys, expansion, scale, opts.eta, rep_seed, opts.exec);
    labelings.push_back(std::move(outcome.partition.labels));
  }
  const double gamma = mean_pairwise_ari(labelings);
  return gamma < 0.0 ? 0.0 : (gamma > 1.0 ? 1.0 : gamma);
}

MultiScaleResult detect_multiscale(const TemporalNetwork& net, const InterLayerWeights& weights,
                                   const DetectConfig& config) {
  if (config.n_scales < 2 || config.eta < 1 || config.cheb_order < 3) {
    throw DomainError("invalid detection configuration");
  }
  if (config.compute_stability && config.repetitions < 2) {
    throw DomainError("stability needs at least 2 repetitions");
  }

  MultiScaleResult result;
  result.n_nodes = net.n_nodes;
  result.n_layers = net.n_layers();
  result.binarized_weights = weights.binarized_input;
  result.repetitions = config.compute_stability ? config.repetitions : 0;

  const SupraSystem sys = build_supra_system(net, weights);
  const int nt = sys.size();
  const int t_count = net.n_layers();

  EigOptions eig = config.eig;
  eig.seed = derive_seed(config.seed, 0xE16);
  int k = 0;
  if (config.mode == FeatureMode::Exact) {
    if (nt > eig.dense_threshold) {
      throw PreconditionError("exact mode needs the full spectrum; NT exceeds the dense limit");
    }
    k = nt;
  } else {
    k = std::min(nt, t_count + 1 + std::max(1, config.extra_eigenpairs));
  }
  SpectralBasis basis;
  const bool cached = config.load_basis && config.load_basis(eig, k, basis) && basis.n == nt &&
                      basis.k() >= std::min(k, nt);
  if (!cached) {
    basis = leading_eigenpairs(sys, k, eig);
    if (config.store_basis) config.store_basis(eig, k, basis);
  }
  result.eigenvalues = basis.eigenvalues;
  result.lambda_max = basis.lambda_max_estimate;

  const LayerNullBasis nulls = layer_null_basis(net, sys);
  const LambdaStarSelection sel =
      select_lambda_star(basis, nulls, config.residual_threshold);
  result.lambda_star = sel.lambda_star;
  result.q_index = sel.q_index;
  result.q_capped = sel.capped;
  result.residual_norms = sel.residual_norms;

  // next strictly larger eigenvalue, skipping numerical multiplicity
  std::optional<double> lambda_next;
  for (int j = sel.q_index; j < basis.k(); ++j) {
    if (basis.eigenvalues[j] > sel.lambda_star + 1e-10) {
      lambda_next = std::min(2.0, basis.eigenvalues[j]);
      break;
    }
  }
  const FilterDerivation derivation =
      derive_filter_and_scales(sel.lambda_star, lambda_next, config.n_scales);
  result.filter = derivation.filter;
  result.y4_fallback = derivation.y4_fallback;
  result.grid = derivation.grid;

  const int m = result.grid.size();
  result.partitions.assign(m, {});
  result.dendrograms.assign(m, {});
  result.gamma.assign(m, std::numeric_limits<double>::quiet_NaN());

  std::vector<bool> wants_stability(m, false);
  if (config.compute_stability) {
    if (config.stability_scales.empty()) {
      wants_stability.assign(m, true);
    } else {
      for (int idx : config.stability_scales) {
        if (idx < 0 || idx >= m) {
          throw DomainError("stability scale index out of range");
        }
        wants_stability[idx] = true;
      }
    }
  }

#ifdef _OPENMP
  const int default_threads = omp_get_max_threads();
#else
  const int default_threads = 1;
#endif
  const int threads = config.threads > 0 ? config.threads : default_threads;

  std::vector<long> clamped(m, 0), synthetic(m, 0), zero_var(m, 0);
  std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int si = 0; si < m; ++si) {
    try {
      const double scale = result.grid.scales[si];
      ScaleOutcome outcome;
      if (config.mode == FeatureMode::Exact) {
        WaveletFeatures feats = wavelet_matrix_exact(basis, result.filter, scale);
        CorrelationFeatures corr = correlation_features(feats, kernels::Exec::Serial);
        outcome = run_scale_partition(sys, corr, scale);
      } else {
        ChebyshevExpansion expansion = chebyshev_coefficients(result.filter, scale,
                                                              config.cheb_order, result.lambda_max);
        const std::uint64_t scale_seed = derive_seed(config.seed, 0x5CA1E, si);
        outcome = run_scale_sketch(sys, expansion, scale, config.eta, scale_seed,
                                   kernels::Exec::Serial);
      }
      clamped[si] = outcome.dendrogram.clamped_heights;
      synthetic[si] = outcome.dendrogram.synthetic_merges;
      zero_var[si] = outcome.zero_variance;
      result.partitions[si] = std::move(outcome.partition);
      result.dendrograms[si] = std::move(outcome.dendrogram);

      if (wants_stability[si]) {
        StabilityOptions stab;
        stab.repetitions = config.repetitions;
        stab.seed = derive_seed(config.seed, 0x6A3A, si);
        stab.eta = config.eta;
        stab.order = config.cheb_order;
        stab.lambda_max = result.lambda_max;
        stab.exec = kernels::Exec::Serial;
        result.gamma[si] = stability_gamma(sys, result.filter, scale, stab);
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (int si = 0; si < m; ++si) {
    result.clamped_heights += clamped[si];
    result.synthetic_merges += synthetic[si];
    result.zero_variance_rows += zero_var[si];
  }
  return result;
}

}  // namespace tmscd
