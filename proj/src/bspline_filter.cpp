#include "tmscd/bspline_filter.hpp"

#include <cmath>

namespace tmscd {

void WaveletFilterSpec::validate() const {
  if (!(0.0 < y1 && y1 < y2 && y2 == y3 && y3 < y4) || !std::isfinite(y4)) {
    throw DomainError("filter knots must satisfy 0 < y1 < y2 = y3 < y4");
  }
}

double evaluate_filter(const WaveletFilterSpec& spec, double y) {
  const double t[5] = {0.0, spec.y1, spec.y2, spec.y3, spec.y4};
  if (y <= t[0] || y >= t[4]) return 0.0;

  // degree-0 indicators on the knot spans, then the de Boor-Cox recursion
  // with the 0/0 = 0 convention for the double knot
  double b[4];
  for (int i = 0; i < 4; ++i) b[i] = (y >= t[i] && y < t[i + 1]) ? 1.0 : 0.0;
  for (int deg = 1; deg <= 3; ++deg) {
    for (int i = 0; i + deg < 4; ++i) {
      double acc = 0.0;
      const double den_left = t[i + deg] - t[i];
      if (den_left > 0.0) acc += (y - t[i]) / den_left * b[i];
      const double den_right = t[i + deg + 1] - t[i + 1];
      if (den_right > 0.0) acc += (t[i + deg + 1] - y) / den_right * b[i + 1];
      b[i] = acc;
    }
  }
  return b[0];
}

FilterDerivation derive_filter_and_scales(double lambda_star,
                                          std::optional<double> lambda_next,
                                          int n_scales) {
  if (!(lambda_star > 0.0) || !std::isfinite(lambda_star)) {
    throw DomainError("lambda_star must be a positive finite real");
  }
  if (lambda_star >= 1.0) {
    throw DomainError("informative eigenvalue >= 1; no valid scale range");
  }
  if (lambda_next && !(*lambda_next > lambda_star && *lambda_next <= 2.0)) {
    throw DomainError("lambda_next must lie in (lambda_star, 2]");
  }
  if (n_scales < 2) {
    throw DomainError("scale grid needs at least 2 scales");
  }

  FilterDerivation out;
  WaveletFilterSpec& f = out.filter;
  f.y1 = 1.0;
  const double s_min = f.y1 / lambda_star;
  f.y2 = f.y3 = s_min;
  const double s_max = f.y1 / (lambda_star * lambda_star);

  // y4 from the attenuation condition g(s_max * lambda_next) = g(y2) / 10.
  // Both sides depend on y4, so solve the residual by bisection after a
  // geometric scan for a sign change on (y3, 50 y3].
  if (lambda_next) {
    const double x0 = s_max * (*lambda_next);
    auto residual = [&](double y4) {
      WaveletFilterSpec probe = f;
      probe.y4 = y4;
      return evaluate_filter(probe, x0) - 0.1 * evaluate_filter(probe, probe.y2);
    };
    const double lo_limit = f.y3;
    const double hi_limit = 50.0 * f.y3;
    double lo = 0.0, hi = 0.0;
    bool bracketed = false;
    double prev_y = lo_limit * (1.0 + 1e-9);
    double prev_r = residual(prev_y);
    const int scan_steps = 200;
    for (int k = 1; k <= scan_steps; ++k) {
      const double y = lo_limit * std::pow(hi_limit / lo_limit, static_cast<double>(k) / scan_steps);
      const double r = residual(y);
      if ((prev_r <= 0.0 && r >= 0.0) || (prev_r >= 0.0 && r <= 0.0)) {
        lo = prev_y;
        hi = y;
        bracketed = true;
        break;
      }
      prev_y = y;
      prev_r = r;
    }
    if (bracketed) {
      double r_lo = residual(lo);
      for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r_mid = residual(mid);
        if ((r_lo <= 0.0) == (r_mid <= 0.0)) {
          lo = mid;
          r_lo = r_mid;
        } else {
          hi = mid;
        }
      }
      f.y4 = 0.5 * (lo + hi);
      out.attenuation_residual = std::abs(residual(f.y4));
    } else {
      out.y4_fallback = true;
      const double midpoint = f.y3 + 0.5 * (x0 - f.y3);
      f.y4 = midpoint > f.y3 ? midpoint : 2.0 * f.y2;
      out.attenuation_residual = std::abs(residual(f.y4));
    }
  } else {
    out.y4_fallback = true;
    f.y4 = 2.0 * f.y2;
  }
  f.validate();

  ScaleGrid& grid = out.grid;
  grid.s_min = s_min;
  grid.s_max = s_max;
  grid.scales.resize(n_scales);
  const double log_min = std::log(s_min), log_max = std::log(s_max);
  for (int k = 0; k < n_scales; ++k) {
    grid.scales[k] = std::exp(log_min + (log_max - log_min) * k / (n_scales - 1));
  }
  grid.scales.front() = s_min;
  grid.scales.back() = s_max;
  return out;
}

}  // namespace tmscd
