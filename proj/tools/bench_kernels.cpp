// Throughput comparison of the serial reference kernels against their OpenMP
// variants, plus a bit-exactness check, on a synthetic supra-Laplacian.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tmscd/benchmarks.hpp"
#include "tmscd/kernels.hpp"
#include "tmscd/rng.hpp"
#include "tmscd/spectral.hpp"
#include "tmscd/temporal_graph.hpp"

using namespace tmscd;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  const int n_layers = argc > 1 ? std::atoi(argv[1]) : 40;
  const int eta = argc > 2 ? std::atoi(argv[2]) : 100;
  const int order = argc > 3 ? std::atoi(argv[3]) : 80;

  GranellParams params;
  params.seed = 1;
  params.n_layers = n_layers;
  GeneratedBenchmark bench = generate_granell(params);
  InterLayerWeights w = lart_weights(bench.network);
  SupraSystem sys = build_supra_system(bench.network, w);
  const int n = sys.size();
  const std::size_t block = static_cast<std::size_t>(n) * eta;

#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("NT=%d nnz=%d eta=%d order=%d threads=%d\n", n, sys.laplacian.nnz(), eta, order,
              threads);

  Rng rng(7);
  std::vector<double> x(block), y_serial(block), y_omp(block);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);

  WaveletFilterSpec filter{1.0, 4.0, 4.0, 12.0};
  ChebyshevExpansion exp = chebyshev_coefficients(filter, 2.0, order, 2.0);

  struct Row {
    const char* name;
    double serial;
    double parallel;
    bool identical;
  };
  std::vector<Row> rows;

  {
    std::vector<double> xs(x.begin(), x.begin() + n), ys(n), yo(n);
    const double ts = time_best_of(5, [&] { kernels::serial::spmv(sys.laplacian, xs, ys); });
    const double tp = time_best_of(5, [&] { kernels::omp::spmv(sys.laplacian, xs, yo); });
    rows.push_back({"spmv", ts, tp, bit_equal(ys, yo)});
  }
  {
    const double ts =
        time_best_of(3, [&] { kernels::serial::spmm(sys.laplacian, x, y_serial, eta); });
    const double tp = time_best_of(3, [&] { kernels::omp::spmm(sys.laplacian, x, y_omp, eta); });
    rows.push_back({"spmm", ts, tp, bit_equal(y_serial, y_omp)});
  }
  {
    const double ts = time_best_of(3, [&] {
      kernels::serial::chebyshev_apply_block(sys.laplacian, exp.coeffs, exp.lambda_max, x,
                                             y_serial, eta);
    });
    const double tp = time_best_of(3, [&] {
      kernels::omp::chebyshev_apply_block(sys.laplacian, exp.coeffs, exp.lambda_max, x, y_omp,
                                          eta);
    });
    rows.push_back({"chebyshev", ts, tp, bit_equal(y_serial, y_omp)});
  }
  {
    std::vector<double> rows_serial = y_serial, rows_omp = y_serial;
    std::vector<std::uint8_t> fs, fo;
    const double ts =
        time_best_of(3, [&] { kernels::serial::normalize_rows(rows_serial, n, eta, fs); });
    const double tp = time_best_of(3, [&] { kernels::omp::normalize_rows(rows_omp, n, eta, fo); });
    rows.push_back({"normalize", ts, tp, bit_equal(rows_serial, rows_omp) && fs == fo});
  }

  std::printf("%-10s %12s %12s %9s %s\n", "kernel", "serial [s]", "openmp [s]", "speedup",
              "bit-identical");
  for (const Row& r : rows) {
    std::printf("%-10s %12.4f %12.4f %8.2fx %s\n", r.name, r.serial, r.parallel,
                r.serial / r.parallel, r.identical ? "yes" : "NO");
  }
  for (const Row& r : rows) {
    if (!r.identical) return 1;
  }
  return 0;
}
