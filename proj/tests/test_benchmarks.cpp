#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <doctest.h>

#include <cmath>
#include <set>

#include "tmscd/benchmarks.hpp"

using namespace tmscd;

namespace {

double mean_degree(const TemporalNetwork& net) {
  double edge_ends = 0.0;
  for (const CsrMatrix& layer : net.layers) edge_ends += layer.nnz();
  return edge_ends / (static_cast<double>(net.n_nodes) * net.n_layers());
}

bool layers_equal(const CsrMatrix& a, const CsrMatrix& b) {
  return a.row_ptr == b.row_ptr && a.col == b.col && a.val == b.val;
}

}  // namespace

TEST_CASE("sp defaults per change class") {
  for (auto [cls, layers] : std::vector<std::pair<SPChangeClass, int>>{
           {SPChangeClass::SSC, 21}, {SPChangeClass::MSC, 17}, {SPChangeClass::LSC, 33}}) {
    SPParams params;
    params.change_class = cls;
    params.seed = 1;
    GeneratedBenchmark bench = generate_sp_temporal(params);
    CHECK(bench.network.n_nodes == 640);
    CHECK(bench.network.n_layers() == layers);
    REQUIRE(bench.truth.scales.size() == 3);
    CHECK(bench.truth.find("large") != nullptr);
    CHECK(bench.truth.find("medium") != nullptr);
    CHECK(bench.truth.find("small") != nullptr);
  }
}

TEST_CASE("sp realized mean degree is close to k_bar") {
  SPParams params;
  params.change_class = SPChangeClass::LSC;
  params.seed = 7;
  GeneratedBenchmark bench = generate_sp_temporal(params);
  CHECK(std::abs(mean_degree(bench.network) - 16.0) < 1.6);  // within 10%
}

TEST_CASE("sp truth labels are nested at every layer") {
  SPParams params;
  params.change_class = SPChangeClass::MSC;
  params.seed = 3;
  params.n_layers = 9;
  GeneratedBenchmark bench = generate_sp_temporal(params);
  const auto& large = bench.truth.find("large")->labels;
  const auto& medium = bench.truth.find("medium")->labels;
  const auto& small = bench.truth.find("small")->labels;
  for (int t = 0; t < 9; ++t) {
    std::map<int, int> medium_of_small, large_of_medium;
    for (int i = 0; i < 640; ++i) {
      auto [ms, inserted_s] = medium_of_small.emplace(small[t][i], medium[t][i]);
      CHECK(ms->second == medium[t][i]);
      auto [lm, inserted_m] = large_of_medium.emplace(medium[t][i], large[t][i]);
      CHECK(lm->second == large[t][i]);
    }
  }
}

TEST_CASE("sp change schedule merges and splits at the configured layers") {
  SPParams params;
  params.change_class = SPChangeClass::LSC;
  params.seed = 11;
  params.n_layers = 9;  // merge at ceil(9/3) = 3, split at ceil(18/3) = 6
  GeneratedBenchmark bench = generate_sp_temporal(params);
  const auto& large = bench.truth.find("large")->labels;
  const auto& small = bench.truth.find("small")->labels;

  auto label_count = [](const std::vector<int>& labels) {
    return std::set<int>(labels.begin(), labels.end()).size();
  };
  for (int t = 0; t < 9; ++t) {
    const bool merged = t + 1 >= 3 && t + 1 < 6;
    CHECK(label_count(large[t]) == (merged ? 3u : 4u));
    CHECK(label_count(small[t]) == 64u);  // finer scales untouched
  }
  // labels identical between consecutive layers without a change point,
  // different across the merge (t=3) and split (t=6) boundaries
  CHECK(large[0] == large[1]);
  CHECK(large[3] == large[4]);
  CHECK(large[6] == large[7]);
  CHECK(large[2] != large[1]);
  CHECK(large[5] != large[4]);
}

TEST_CASE("sp generation is deterministic in the seed") {
  SPParams params;
  params.change_class = SPChangeClass::SSC;
  params.seed = 21;
  params.n_layers = 5;
  GeneratedBenchmark a = generate_sp_temporal(params);
  GeneratedBenchmark b = generate_sp_temporal(params);
  for (int t = 0; t < 5; ++t) {
    CHECK(layers_equal(a.network.layers[t], b.network.layers[t]));
  }
  params.seed = 22;
  GeneratedBenchmark c = generate_sp_temporal(params);
  CHECK_FALSE(layers_equal(a.network.layers[0], c.network.layers[0]));
}

TEST_CASE("sp expected degree calibration across k_bar") {
  for (double k_bar : {11.0, 16.0, 21.0}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SPParams params;
      params.change_class = SPChangeClass::SSC;
      params.k_bar = k_bar;
      params.n_layers = 5;
      params.seed = 1000 + seed;
      total += mean_degree(generate_sp_temporal(params).network);
    }
    const double avg = total / 20.0;
    CHECK(std::abs(avg - k_bar) < 0.05 * k_bar);
  }
}

TEST_CASE("sp probabilities are ordered and recorded") {
  SPParams params;
  params.seed = 2;
  params.n_layers = 3;
  GeneratedBenchmark bench = generate_sp_temporal(params);
  const auto& p = bench.metadata.at("probabilities");
  const double ps = p.at("p_small").get<double>();
  const double pm = p.at("p_medium").get<double>();
  const double pl = p.at("p_large").get<double>();
  const double pb = p.at("p_background").get<double>();
  CHECK(ps > pm);
  CHECK(pm > pl);
  CHECK(pl > pb);
  CHECK(pb > 0.0);
  CHECK(ps <= 1.0);
  // level degrees sum to k_bar
  const auto& k = bench.metadata.at("level_degrees");
  const double total = k.at("small").get<double>() + k.at("medium").get<double>() +
                       k.at("large").get<double>() + k.at("background").get<double>();
  CHECK(total == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("sp rejects indivisible node counts") {
  SPParams params;
  params.n_nodes = 641;
  params.seed = 1;
  CHECK_THROWS_AS(generate_sp_temporal(params), DomainError);
}

TEST_CASE("granell grow transfers membership monotonically") {
  GranellParams params;
  params.model = GranellModel::Grow;
  params.seed = 5;
  GeneratedBenchmark bench = generate_granell(params);
  CHECK(bench.network.n_nodes == 128);
  CHECK(bench.network.n_layers() == 100);
  const auto& truth = bench.truth.scales[0].labels;
  CHECK(truth.front() != truth.back());
  int previous = 0;
  for (int t = 0; t < 100; ++t) {
    int moved = 0;
    for (int i = 0; i < 128; ++i) {
      if (truth[t][i] == 0 && truth[0][i] == 1) ++moved;
    }
    CHECK(moved >= previous);
    previous = moved;
  }
  CHECK(previous == 16);  // half of the 32-node donor at the default fraction
}

TEST_CASE("granell zero rate is static") {
  GranellParams params;
  params.model = GranellModel::Grow;
  params.grow_fraction = 0.0;
  params.seed = 5;
  params.n_layers = 12;
  GeneratedBenchmark bench = generate_granell(params);
  const auto& truth = bench.truth.scales[0].labels;
  for (int t = 1; t < 12; ++t) {
    CHECK(truth[t] == truth[0]);
  }
}

TEST_CASE("granell merge unifies and then separates the pair") {
  GranellParams params;
  params.model = GranellModel::Merge;
  params.seed = 9;
  GeneratedBenchmark bench = generate_granell(params);
  const auto& truth = bench.truth.scales[0].labels;
  auto label_count = [](const std::vector<int>& labels) {
    return std::set<int>(labels.begin(), labels.end()).size();
  };
  CHECK(label_count(truth.front()) == 4u);
  CHECK(label_count(truth.back()) == 4u);
  CHECK(label_count(truth[49]) == 3u);  // merged around the ramp peak
}

TEST_CASE("granell within-community density exceeds between density") {
  for (GranellModel model : {GranellModel::Grow, GranellModel::Merge, GranellModel::Mixed}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      GranellParams params;
      params.model = model;
      params.seed = 3000 + seed;
      params.n_layers = 10;
      GeneratedBenchmark bench = generate_granell(params);
      const auto& truth = bench.truth.scales[0].labels;
      for (int t = 0; t < 10; ++t) {
        double within_edges = 0, within_pairs = 0, between_edges = 0, between_pairs = 0;
        const CsrMatrix& layer = bench.network.layers[t];
        for (int i = 0; i < 128; ++i) {
          for (int j = i + 1; j < 128; ++j) {
            const bool same = truth[t][i] == truth[t][j];
            (same ? within_pairs : between_pairs) += 1;
            if (layer.at(i, j) > 0) (same ? within_edges : between_edges) += 1;
          }
        }
        CHECK(within_edges / within_pairs > between_edges / between_pairs);
      }
    }
  }
}

TEST_CASE("granell rejects tiny node counts") {
  GranellParams params;
  params.n_nodes = 6;
  params.seed = 1;
  CHECK_THROWS_AS(generate_granell(params), DomainError);
}

TEST_CASE("isolated nodes are repaired with a same-community edge") {
  GranellParams params;
  params.model = GranellModel::Grow;
  params.k_bar = 1.0;  // sparse enough to strand nodes
  params.mixing = 0.2;
  params.seed = 13;
  params.n_layers = 6;
  GeneratedBenchmark bench = generate_granell(params);
  CHECK(bench.metadata.at("isolated_repairs").get<int>() > 0);
  for (const CsrMatrix& layer : bench.network.layers) {
    for (int i = 0; i < layer.n; ++i) {
      CHECK(layer.degree(i) > 0);
    }
  }
}
