#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tmscd/metrics.hpp"
#include "tmscd/rng.hpp"

using namespace tmscd;

namespace {

std::vector<int> random_labels(Rng& rng, int n, int max_clusters) {
  std::vector<int> labels(n);
  for (int& l : labels) l = static_cast<int>(rng.below(max_clusters));
  return labels;
}

}  // namespace

TEST_CASE("ari identities") {
  std::vector<int> p{0, 0, 1, 1, 2};
  CHECK(adjusted_rand_index(p, p) == doctest::Approx(1.0));
  std::vector<int> relabeled{7, 7, 3, 3, 5};
  CHECK(adjusted_rand_index(p, relabeled) == doctest::Approx(1.0));
}

TEST_CASE("crossed two-block partitions") {
  // {a,a,b,b} against {a,b,a,b}: brute-force pair counting gives -1/2
  std::vector<int> p{0, 0, 1, 1};
  std::vector<int> q{0, 1, 0, 1};
  const double expected = oracle::ari_pair_counting(p, q);
  CHECK(expected == doctest::Approx(-0.5));
  CHECK(adjusted_rand_index(p, q) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("degenerate ari conventions") {
  std::vector<int> singletons{0, 1, 2, 3, 4};
  std::vector<int> one_block{0, 0, 0, 0, 0};
  CHECK(adjusted_rand_index(singletons, one_block) == 0.0);
  CHECK(adjusted_rand_index(singletons, singletons) == 1.0);
  CHECK(adjusted_rand_index(one_block, one_block) == 1.0);
}

TEST_CASE("ari validates lengths") {
  std::vector<int> p{0, 1};
  std::vector<int> q{0, 1, 2};
  CHECK_THROWS_AS(adjusted_rand_index(p, q), DomainError);
  CHECK_THROWS_AS(normalized_variation_of_information(p, q), DomainError);
}

TEST_CASE("ari matches brute force on random partitions") {
  Rng rng(404);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(rng.below(10));  // n <= 12
    const std::vector<int> p = random_labels(rng, n, 4);
    const std::vector<int> q = random_labels(rng, n, 4);
    CHECK(adjusted_rand_index(p, q) ==
          doctest::Approx(oracle::ari_pair_counting(p, q)).epsilon(1e-12));
  }
}

TEST_CASE("nvi identities and the crossed pair") {
  std::vector<int> p{0, 0, 1, 1};
  CHECK(normalized_variation_of_information(p, p) == 0.0);
  std::vector<int> q{0, 1, 0, 1};
  // H(p|q) + H(q|p) = 2 log 2, normalized by log 4
  CHECK(normalized_variation_of_information(p, q) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nvi of a refinement is the conditional entropy") {
  std::vector<int> coarse{0, 0, 0, 0, 1, 1, 1, 1};
  std::vector<int> refined{0, 0, 1, 1, 2, 2, 3, 3};
  // VI(p, refinement) = H(refined | p) = log 2 here, normalized by log 8
  const double expected = std::log(2.0) / std::log(8.0);
  CHECK(normalized_variation_of_information(coarse, refined) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("nvi matches the entropy oracle and stays within [0, 1]") {
  Rng rng(505);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(rng.below(10));
    const std::vector<int> p = random_labels(rng, n, 4);
    const std::vector<int> q = random_labels(rng, n, 4);
    const double nvi = normalized_variation_of_information(p, q);
    CHECK(nvi == doctest::Approx(oracle::nvi_entropy(p, q)).epsilon(1e-11));
    CHECK(nvi >= 0.0);
    CHECK(nvi <= 1.0 + 1e-12);
    // symmetry
    CHECK(nvi ==
          doctest::Approx(normalized_variation_of_information(q, p)).epsilon(1e-12));
  }
}

TEST_CASE("unnormalized vi satisfies the triangle inequality on random triples") {
  Rng rng(606);
  const int n = 10;
  const double log_n = std::log(static_cast<double>(n));
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<int> a = random_labels(rng, n, 3);
    const std::vector<int> b = random_labels(rng, n, 3);
    const std::vector<int> c = random_labels(rng, n, 3);
    const double ab = normalized_variation_of_information(a, b) * log_n;
    const double bc = normalized_variation_of_information(b, c) * log_n;
    const double ac = normalized_variation_of_information(a, c) * log_n;
    CHECK(ac <= ab + bc + 1e-10);
  }
}

TEST_CASE("success rate takes the top five") {
  std::vector<double> perfect{1, 1, 1, 1, 1, 0, 0};
  CHECK(success_rate(perfect) == doctest::Approx(1.0));
  std::vector<double> mixed{0.9, 0.8, 0.7, 0.6, 0.5, 0.1};
  CHECK(success_rate(mixed) == doctest::Approx(0.7));
  std::vector<double> three{0.3, 0.6, 0.9};
  CHECK(success_rate(three) == doctest::Approx(0.6));
  CHECK_THROWS_AS(success_rate(std::vector<double>{}), DomainError);
}

TEST_CASE("success rate is monotone in the curve") {
  Rng rng(707);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> curve(8), larger(8);
    for (int i = 0; i < 8; ++i) {
      curve[i] = rng.uniform01();
      larger[i] = curve[i] + rng.uniform01() * 0.2;
    }
    CHECK(success_rate(larger) >= success_rate(curve) - 1e-12);
  }
}

TEST_CASE("layer similarity aggregates per-layer ARI") {
  // three layers of four nodes; flat labels layer-major
  std::vector<std::vector<int>> truth{{0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 1, 1}};
  std::vector<int> perfect{0, 0, 1, 1, 2, 2, 3, 3, 1, 1, 0, 0};
  SimilarityStats stats = layer_similarity(perfect, truth, 4);
  CHECK(stats.mean == doctest::Approx(1.0));
  CHECK(stats.stddev == doctest::Approx(0.0));

  // constant labeling scores 0 against a multi-community truth
  std::vector<int> constant(12, 0);
  SimilarityStats degenerate = layer_similarity(constant, truth, 4);
  CHECK(degenerate.mean == doctest::Approx(0.0));
}

TEST_CASE("layer similarity mean and stddev follow the direct formula") {
  // craft per-layer ARIs (1, -0.5, 1): layer 2 is the crossed pair
  std::vector<std::vector<int>> truth{{0, 0, 1, 1}, {0, 0, 1, 1}, {0, 0, 1, 1}};
  std::vector<int> labels{0, 0, 1, 1, 0, 1, 0, 1, 0, 0, 1, 1};
  SimilarityStats stats = layer_similarity(labels, truth, 4);
  const double mean = (1.0 - 0.5 + 1.0) / 3.0;
  const double var = ((1 - mean) * (1 - mean) + (-0.5 - mean) * (-0.5 - mean) +
                      (1 - mean) * (1 - mean)) /
                     3.0;
  CHECK(stats.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(stats.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("layer similarity validates dimensions") {
  std::vector<std::vector<int>> truth{{0, 0, 1, 1}};
  std::vector<int> labels{0, 0, 1};
  CHECK_THROWS_AS(layer_similarity(labels, truth, 4), DomainError);
  std::vector<std::vector<int>> ragged{{0, 0, 1}};
  std::vector<int> four{0, 0, 1, 1};
  CHECK_THROWS_AS(layer_similarity(four, ragged, 4), DomainError);
}

TEST_CASE("per-layer similarity builds one curve point per partition") {
  std::vector<std::vector<int>> truth{{0, 0, 1, 1}, {0, 0, 1, 1}};
  Partition good;
  good.labels = {0, 0, 1, 1, 0, 0, 1, 1};
  Partition bad;
  bad.labels = {0, 1, 0, 1, 0, 1, 0, 1};
  SimilarityCurve curve = per_layer_similarity({good, bad}, truth, 4);
  REQUIRE(curve.mean.size() == 2);
  CHECK(curve.mean[0] == doctest::Approx(1.0));
  CHECK(curve.mean[1] == doctest::Approx(-0.5));
}
