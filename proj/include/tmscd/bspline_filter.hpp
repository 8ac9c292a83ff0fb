#pragma once

#include <optional>
#include <vector>

#include "tmscd/common.hpp"

namespace tmscd {

// Band-pass filter kernel: the cubic B-spline on knots (0, y1, y2, y3, y4)
// with a double knot at y2 = y3. Zero outside [0, y4], positive inside.
struct WaveletFilterSpec {
  double y1 = 1.0;
  double y2 = 2.0;
  double y3 = 2.0;
  double y4 = 4.0;

  void validate() const;
};

// De Boor-Cox evaluation of the spline; exactly 0 for y <= 0 and y >= y4.
double evaluate_filter(const WaveletFilterSpec& spec, double y);

// M logarithmically spaced scales on [s_min, s_max], endpoints exact.
struct ScaleGrid {
  double s_min = 0.0;
  double s_max = 0.0;
  std::vector<double> scales;

  int size() const { return static_cast<int>(scales.size()); }
};

struct FilterDerivation {
  WaveletFilterSpec filter;
  ScaleGrid grid;
  bool y4_fallback = false;          // attenuation root not bracketed
  double attenuation_residual = 0.0; // |g(s_max l_next) - g(y2)/10| at the chosen y4
};

// Fixes y1 = 1, s_min = 1/l*, y2 = y3 = 1/l*, s_max = 1/l*^2, and solves y4 so
// that the filter at s_max attenuates lambda_next by a factor 10 relative to
// the peak knot. lambda_next empty means no distinct next eigenvalue was
// available; y4 then falls back to 2*y2.
FilterDerivation derive_filter_and_scales(double lambda_star,
                                          std::optional<double> lambda_next,
                                          int n_scales);

}  // namespace tmscd
