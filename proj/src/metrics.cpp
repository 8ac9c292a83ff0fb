#include "tmscd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace tmscd {

namespace {

// dense relabeling plus cluster sizes
std::vector<int> compact_labels(std::span<const int> labels, std::vector<double>& sizes) {
  std::unordered_map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
    if (inserted) {
      sizes.push_back(0.0);
    }
    sizes[out[i]] += 1.0;
  }
  return out;
}

struct Contingency {
  std::vector<double> a_sizes, b_sizes;
  std::unordered_map<std::uint64_t, double> cells;
  double n = 0.0;
};

Contingency contingency_table(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw DomainError("partition length mismatch");
  }
  Contingency c;
  c.n = static_cast<double>(a.size());
  const std::vector<int> ca = compact_labels(a, c.a_sizes);
  const std::vector<int> cb = compact_labels(b, c.b_sizes);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(ca[i]) << 32) | static_cast<std::uint32_t>(cb[i]);
    c.cells[key] += 1.0;
  }
  return c;
}

double comb2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency_table(a, b);
  if (c.n < 2.0) return 1.0;

  double sum_cells = 0.0;
  for (const auto& [key, count] : c.cells) sum_cells += comb2(count);
  double sum_a = 0.0, sum_b = 0.0;
  for (double s : c.a_sizes) sum_a += comb2(s);
  for (double s : c.b_sizes) sum_b += comb2(s);

  const double expected = sum_a * sum_b / comb2(c.n);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (std::abs(denom) < 1e-12) {
    // both partitions degenerate: all-singletons and/or one block
    return c.cells.size() == c.a_sizes.size() && c.cells.size() == c.b_sizes.size() ? 1.0 : 0.0;
  }
  return (sum_cells - expected) / denom;
}

double normalized_variation_of_information(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency_table(a, b);
  if (c.n < 2.0) return 0.0;

  // VI = H(a) + H(b) - 2 I(a, b), computed from the joint distribution
  double h_a = 0.0, h_b = 0.0, h_ab = 0.0;
  for (double s : c.a_sizes) {
    const double p = s / c.n;
    h_a -= p * std::log(p);
  }
  for (double s : c.b_sizes) {
    const double p = s / c.n;
    h_b -= p * std::log(p);
  }
  for (const auto& [key, count] : c.cells) {
    const double p = count / c.n;
    h_ab -= p * std::log(p);
  }
  const double vi = 2.0 * h_ab - h_a - h_b;  // H(a|b) + H(b|a)
  const double norm = std::log(c.n);
  const double out = vi / norm;
  return out < 0.0 ? 0.0 : out;
}

double success_rate(std::span<const double> curve) {
  if (curve.empty()) {
    throw DomainError("empty similarity curve");
  }
  std::vector<double> sorted(curve.begin(), curve.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t take = std::min<std::size_t>(5, sorted.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < take; ++i) acc += sorted[i];
  return acc / static_cast<double>(take);
}

SimilarityStats layer_similarity(std::span<const int> flat_labels,
                                 const std::vector<std::vector<int>>& truth_per_layer,
                                 int n_nodes) {
  const int t_count = static_cast<int>(truth_per_layer.size());
  if (t_count == 0 || n_nodes <= 0 ||
      flat_labels.size() != static_cast<std::size_t>(t_count) * n_nodes) {
    throw DomainError("labeling does not match the truth dimensions");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < t_count; ++t) {
    if (static_cast<int>(truth_per_layer[t].size()) != n_nodes) {
      throw DomainError("truth labels must cover every node at every layer");
    }
    const double ari = adjusted_rand_index(
        flat_labels.subspan(static_cast<std::size_t>(t) * n_nodes, n_nodes), truth_per_layer[t]);
    sum += ari;
    sum_sq += ari * ari;
  }
  SimilarityStats stats;
  stats.mean = sum / t_count;
  stats.stddev = std::sqrt(std::max(0.0, sum_sq / t_count - stats.mean * stats.mean));
  return stats;
}

SimilarityCurve per_layer_similarity(const std::vector<Partition>& partitions,
                                     const std::vector<std::vector<int>>& truth_per_layer,
                                     int n_nodes) {
  SimilarityCurve curve;
  curve.mean.reserve(partitions.size());
  curve.stddev.reserve(partitions.size());
  for (const Partition& p : partitions) {
    const SimilarityStats stats = layer_similarity(p.labels, truth_per_layer, n_nodes);
    curve.mean.push_back(stats.mean);
    curve.stddev.push_back(stats.stddev);
  }
  return curve;
}

}  // namespace tmscd
