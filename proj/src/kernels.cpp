#include "tmscd/kernels.hpp"

#include <cmath>

namespace tmscd::kernels {

namespace {

inline void spmv_row(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int i) {
  double acc = 0.0;
  for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
    acc += a.val[k] * x[a.col[k]];
  }
  y[i] = acc;
}

inline void spmm_row(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
                     int m, int i) {
  double* out = y.data() + static_cast<std::size_t>(i) * m;
  for (int c = 0; c < m; ++c) out[c] = 0.0;
  for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
    const double v = a.val[k];
    const double* in = x.data() + static_cast<std::size_t>(a.col[k]) * m;
    for (int c = 0; c < m; ++c) out[c] += v * in[c];
  }
}

inline void axpy_row(double c, const double* in, double* out, int m) {
  for (int k = 0; k < m; ++k) out[k] += c * in[k];
}

// one row of Y = (2/lambda_max) A X - X
inline void scaled_spmm_row(const CsrMatrix& a, double scale, std::span<const double> x,
                            std::span<double> y, int m, int i) {
  double* out = y.data() + static_cast<std::size_t>(i) * m;
  const double* self = x.data() + static_cast<std::size_t>(i) * m;
  for (int c = 0; c < m; ++c) out[c] = -self[c];
  for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
    const double v = scale * a.val[k];
    const double* in = x.data() + static_cast<std::size_t>(a.col[k]) * m;
    for (int c = 0; c < m; ++c) out[c] += v * in[c];
  }
}

// one row of the fused recurrence step: t_next = 2 As t_cur - t_prev, y += c t_next
inline void cheb_step_row(const CsrMatrix& a, double scale, double c,
                          std::span<const double> t_cur, std::span<const double> t_prev,
                          std::span<double> t_next, std::span<double> y, int m, int i) {
  scaled_spmm_row(a, scale, t_cur, t_next, m, i);
  double* nx = t_next.data() + static_cast<std::size_t>(i) * m;
  const double* pv = t_prev.data() + static_cast<std::size_t>(i) * m;
  double* out = y.data() + static_cast<std::size_t>(i) * m;
  for (int k = 0; k < m; ++k) {
    nx[k] = 2.0 * nx[k] - pv[k];
    out[k] += c * nx[k];
  }
}

inline void normalize_row(std::span<double> rows, int m, std::vector<std::uint8_t>& flags, int i) {
  double* r = rows.data() + static_cast<std::size_t>(i) * m;
  double mean = 0.0;
  for (int c = 0; c < m; ++c) mean += r[c];
  mean /= m;
  double raw = 0.0, centered = 0.0;
  for (int c = 0; c < m; ++c) {
    raw += r[c] * r[c];
    const double d = r[c] - mean;
    centered += d * d;
  }
  if (centered <= 1e-28 * std::max(1.0, raw)) {
    for (int c = 0; c < m; ++c) r[c] = 0.0;
    flags[i] = 1;
    return;
  }
  const double inv = 1.0 / std::sqrt(centered);
  for (int c = 0; c < m; ++c) r[c] = (r[c] - mean) * inv;
  flags[i] = 0;
}

}  // namespace

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  for (int i = 0; i < a.n; ++i) spmv_row(a, x, y, i);
}

void spmm(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int m) {
  for (int i = 0; i < a.n; ++i) spmm_row(a, x, y, m, i);
}

void chebyshev_apply_block(const CsrMatrix& a, std::span<const double> coeffs,
                           double lambda_max, std::span<const double> x,
                           std::span<double> y, int m) {
  const int n = a.n;
  const std::size_t len = static_cast<std::size_t>(n) * m;
  const double scale = 2.0 / lambda_max;
  const int order = static_cast<int>(coeffs.size()) - 1;

  const double c0 = 0.5 * coeffs[0];
  for (std::size_t k = 0; k < len; ++k) y[k] = c0 * x[k];
  if (order == 0) return;

  std::vector<double> t_prev(x.begin(), x.end());
  std::vector<double> t_cur(len), t_next(len);
  for (int i = 0; i < n; ++i) scaled_spmm_row(a, scale, x, t_cur, m, i);
  for (int i = 0; i < n; ++i) {
    axpy_row(coeffs[1], t_cur.data() + static_cast<std::size_t>(i) * m,
             y.data() + static_cast<std::size_t>(i) * m, m);
  }
  for (int k = 2; k <= order; ++k) {
    for (int i = 0; i < n; ++i) cheb_step_row(a, scale, coeffs[k], t_cur, t_prev, t_next, y, m, i);
    std::swap(t_prev, t_cur);
    std::swap(t_cur, t_next);
  }
}

void normalize_rows(std::span<double> rows, int n, int m,
                    std::vector<std::uint8_t>& zero_variance) {
  zero_variance.assign(n, 0);
  for (int i = 0; i < n; ++i) normalize_row(rows, m, zero_variance, i);
}

}  // namespace serial

namespace omp {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.n; ++i) spmv_row(a, x, y, i);
}

void spmm(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int m) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.n; ++i) spmm_row(a, x, y, m, i);
}

void chebyshev_apply_block(const CsrMatrix& a, std::span<const double> coeffs,
                           double lambda_max, std::span<const double> x,
                           std::span<double> y, int m) {
  const int n = a.n;
  const std::size_t len = static_cast<std::size_t>(n) * m;
  const double scale = 2.0 / lambda_max;
  const int order = static_cast<int>(coeffs.size()) - 1;

  const double c0 = 0.5 * coeffs[0];
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* out = y.data() + static_cast<std::size_t>(i) * m;
    const double* in = x.data() + static_cast<std::size_t>(i) * m;
    for (int c = 0; c < m; ++c) out[c] = c0 * in[c];
  }
  if (order == 0) return;

  std::vector<double> t_prev(x.begin(), x.end());
  std::vector<double> t_cur(len), t_next(len);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) scaled_spmm_row(a, scale, x, t_cur, m, i);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    axpy_row(coeffs[1], t_cur.data() + static_cast<std::size_t>(i) * m,
             y.data() + static_cast<std::size_t>(i) * m, m);
  }
  for (int k = 2; k <= order; ++k) {
    const double ck = coeffs[k];
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) cheb_step_row(a, scale, ck, t_cur, t_prev, t_next, y, m, i);
    std::swap(t_prev, t_cur);
    std::swap(t_cur, t_next);
  }
}

void normalize_rows(std::span<double> rows, int n, int m,
                    std::vector<std::uint8_t>& zero_variance) {
  zero_variance.assign(n, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) normalize_row(rows, m, zero_variance, i);
}

}  // namespace omp

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y, Exec exec) {
  exec == Exec::Serial ? serial::spmv(a, x, y) : omp::spmv(a, x, y);
}

void spmm(const CsrMatrix& a, std::span<const double> x, std::span<double> y, int m, Exec exec) {
  exec == Exec::Serial ? serial::spmm(a, x, y, m) : omp::spmm(a, x, y, m);
}

void chebyshev_apply_block(const CsrMatrix& a, std::span<const double> coeffs,
                           double lambda_max, std::span<const double> x,
                           std::span<double> y, int m, Exec exec) {
  exec == Exec::Serial ? serial::chebyshev_apply_block(a, coeffs, lambda_max, x, y, m)
                       : omp::chebyshev_apply_block(a, coeffs, lambda_max, x, y, m);
}

void normalize_rows(std::span<double> rows, int n, int m,
                    std::vector<std::uint8_t>& zero_variance, Exec exec) {
  exec == Exec::Serial ? serial::normalize_rows(rows, n, m, zero_variance)
                       : omp::normalize_rows(rows, n, m, zero_variance);
}

}  // namespace tmscd::kernels
