#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmscd/sparse.hpp"

// Data-parallel inner loops of the pipeline. Every kernel exists twice: a
// serial reference implementation under kernels::serial and an OpenMP variant
// under kernels::omp. The OpenMP variants parallelize only across independent
// output elements and keep the per-element summation order identical to the
// reference, so both produce bit-identical results for any thread count.
// tools/bench_kernels compares their throughput.

namespace tmscd::kernels {

enum class Exec { Serial, Parallel };

namespace serial {

// y = A x
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

// Y = A X for row-major blocks of m signals side by side (shape n x m).
void spmm(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int m);

// Y = sum_k c_k T_k(As) X with As = (2 / lambda_max) A - I, block form.
// coeffs[0] enters halved (Chebyshev series convention).
void chebyshev_apply_block(const CsrMatrix& a, std::span<const double> coeffs,
                           double lambda_max, std::span<const double> x,
                           std::span<double> y, int m);

// Center each length-m row to zero mean and rescale to unit norm; rows with
// (numerically) zero variance are zeroed and flagged.
void normalize_rows(std::span<double> rows, int n, int m,
                    std::vector<std::uint8_t>& zero_variance);

}  // namespace serial

namespace omp {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void spmm(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int m);
void chebyshev_apply_block(const CsrMatrix& a, std::span<const double> coeffs,
                           double lambda_max, std::span<const double> x,
                           std::span<double> y, int m);
void normalize_rows(std::span<double> rows, int n, int m,
                    std::vector<std::uint8_t>& zero_variance);

}  // namespace omp

// Dispatch wrappers.
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y, Exec exec);
void spmm(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int m, Exec exec);
void chebyshev_apply_block(const CsrMatrix& a, std::span<const double> coeffs,
                           double lambda_max, std::span<const double> x,
                           std::span<double> y, int m, Exec exec);
void normalize_rows(std::span<double> rows, int n, int m,
                    std::vector<std::uint8_t>& zero_variance, Exec exec);

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace tmscd::kernels
