#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "test_helpers.hpp"
#include "tmscd/kernels.hpp"
#include "tmscd/rng.hpp"
#include "tmscd/temporal_graph.hpp"

using namespace tmscd;

namespace {

// random single-layer laplacian; a spanning path keeps every degree positive
CsrMatrix random_laplacian(int n, std::uint64_t seed) {
  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < n; ++i) pairs.emplace(i, i + 1);
  for (auto [i, j] : helpers::er_edges(n, 0.3, seed)) pairs.emplace(i, j);
  std::vector<helpers::Edge> edges;
  for (auto [i, j] : pairs) edges.push_back({1, i, j, 1.0});
  TemporalNetwork net = helpers::make_network(n, 1, edges);
  return build_supra_system(net, constant_weights(net, 0.0)).laplacian;
}

std::vector<double> random_block(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> block(static_cast<std::size_t>(n) * m);
  for (double& v : block) v = rng.uniform(-1.0, 1.0);
  return block;
}

}  // namespace

TEST_CASE("openmp spmv is bit-identical to the serial reference") {
  CsrMatrix lap = random_laplacian(101, 3);
  std::vector<double> x = random_block(101, 1, 4);
  std::vector<double> ys(101), yp(101);
  kernels::serial::spmv(lap, x, ys);
  kernels::omp::spmv(lap, x, yp);
  CHECK(ys == yp);
}

TEST_CASE("openmp spmm is bit-identical to the serial reference") {
  CsrMatrix lap = random_laplacian(64, 5);
  const int m = 17;
  std::vector<double> x = random_block(64, m, 6);
  std::vector<double> ys(x.size()), yp(x.size());
  kernels::serial::spmm(lap, x, ys, m);
  kernels::omp::spmm(lap, x, yp, m);
  CHECK(ys == yp);
}

TEST_CASE("openmp chebyshev block application is bit-identical") {
  CsrMatrix lap = random_laplacian(80, 7);
  const int m = 9;
  std::vector<double> x = random_block(80, m, 8);
  std::vector<double> coeffs{1.1, -0.4, 0.25, -0.05, 0.01, 0.003};
  std::vector<double> ys(x.size()), yp(x.size());
  kernels::serial::chebyshev_apply_block(lap, coeffs, 2.0, x, ys, m);
  kernels::omp::chebyshev_apply_block(lap, coeffs, 2.0, x, yp, m);
  CHECK(ys == yp);
}

TEST_CASE("openmp row normalization is bit-identical") {
  const int n = 150, m = 33;
  std::vector<double> rows = random_block(n, m, 9);
  // plant zero-variance rows
  for (int c = 0; c < m; ++c) {
    rows[static_cast<std::size_t>(3) * m + c] = 2.5;
    rows[static_cast<std::size_t>(77) * m + c] = 0.0;
  }
  std::vector<double> serial_rows = rows, parallel_rows = rows;
  std::vector<std::uint8_t> fs, fp;
  kernels::serial::normalize_rows(serial_rows, n, m, fs);
  kernels::omp::normalize_rows(parallel_rows, n, m, fp);
  CHECK(serial_rows == parallel_rows);
  CHECK(fs == fp);
  CHECK(fs[3] == 1);
  CHECK(fs[77] == 1);
  CHECK(fs[0] == 0);
}

TEST_CASE("normalized rows have zero mean and unit norm") {
  const int n = 40, m = 21;
  std::vector<double> rows = random_block(n, m, 10);
  std::vector<std::uint8_t> flags;
  kernels::normalize_rows(rows, n, m, flags, kernels::Exec::Serial);
  for (int i = 0; i < n; ++i) {
    double mean = 0.0, norm = 0.0;
    for (int c = 0; c < m; ++c) {
      mean += rows[static_cast<std::size_t>(i) * m + c];
      norm += rows[static_cast<std::size_t>(i) * m + c] * rows[static_cast<std::size_t>(i) * m + c];
    }
    CHECK(std::abs(mean) < 1e-10);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dispatch wrappers route to both variants") {
  CsrMatrix lap = random_laplacian(30, 11);
  std::vector<double> x = random_block(30, 1, 12);
  std::vector<double> a(30), b(30);
  kernels::spmv(lap, x, a, kernels::Exec::Serial);
  kernels::spmv(lap, x, b, kernels::Exec::Parallel);
  CHECK(a == b);
}
