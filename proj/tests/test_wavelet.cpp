#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "tmscd/rng.hpp"
#include "tmscd/wavelet.hpp"

using namespace tmscd;

TEST_CASE("filter vanishes at the support boundary and is positive inside") {
  WaveletFilterSpec spec{1.0, 2.0, 2.0, 4.0};
  CHECK(evaluate_filter(spec, 0.0) == 0.0);
  CHECK(evaluate_filter(spec, 4.0) == 0.0);
  CHECK(evaluate_filter(spec, -0.5) == 0.0);
  CHECK(evaluate_filter(spec, 4.5) == 0.0);
  for (double y = 0.05; y < 4.0; y += 0.05) {
    CHECK(evaluate_filter(spec, y) > 0.0);
  }
}

TEST_CASE("filter matches the independent de Boor recursion") {
  WaveletFilterSpec spec{1.0, 2.0, 2.0, 4.0};
  const std::vector<double> knots{0.0, 1.0, 2.0, 2.0, 4.0};
  // value at the double knot, hand-derived from the recursion
  CHECK(evaluate_filter(spec, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(oracle::bspline_recursive(knots, 0, 3, 2.0) == doctest::Approx(2.0 / 3.0));
  for (double y = -0.4; y < 4.6; y += 0.0137) {
    CHECK(evaluate_filter(spec, y) ==
          doctest::Approx(oracle::bspline_recursive(knots, 0, 3, y)).epsilon(1e-13));
  }
  // a second knot layout, irrational spacing
  WaveletFilterSpec other{0.7, 1.9, 1.9, 6.3};
  const std::vector<double> other_knots{0.0, 0.7, 1.9, 1.9, 6.3};
  for (double y = 0.01; y < 6.3; y += 0.0191) {
    CHECK(evaluate_filter(other, y) ==
          doctest::Approx(oracle::bspline_recursive(other_knots, 0, 3, y)).epsilon(1e-13));
  }
}

TEST_CASE("filter is continuous on a fine grid") {
  WaveletFilterSpec spec{1.0, 2.0, 2.0, 4.0};
  const double h = 1e-6;
  double max_jump = 0.0;
  for (double y = h; y < 4.0; y += 0.001) {
    max_jump = std::max(max_jump,
                        std::abs(evaluate_filter(spec, y + h) - evaluate_filter(spec, y)));
  }
  CHECK(max_jump < 10.0 * h);  // Lipschitz with a modest constant
}

TEST_CASE("invalid knot layouts are rejected") {
  CHECK_THROWS_AS((WaveletFilterSpec{0.0, 2.0, 2.0, 4.0}).validate(), DomainError);
  CHECK_THROWS_AS((WaveletFilterSpec{1.0, 2.0, 3.0, 4.0}).validate(), DomainError);
  CHECK_THROWS_AS((WaveletFilterSpec{1.0, 2.0, 2.0, 2.0}).validate(), DomainError);
}

TEST_CASE("scale derivation follows the closed-form boundaries") {
  FilterDerivation d = derive_filter_and_scales(0.5, 0.6, 4);
  CHECK(d.filter.y1 == 1.0);
  CHECK(d.grid.s_min == 2.0);
  CHECK(d.filter.y2 == 2.0);
  CHECK(d.filter.y3 == 2.0);
  CHECK(d.grid.s_max == 4.0);

  FilterDerivation q = derive_filter_and_scales(0.25, 0.3, 3);
  CHECK(q.grid.s_min == 4.0);
  CHECK(q.grid.s_max == 16.0);
  REQUIRE(q.grid.size() == 3);
  CHECK(q.grid.scales[1] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("y4 satisfies the factor-10 attenuation by bisection") {
  FilterDerivation d = derive_filter_and_scales(0.1, 0.12, 50);
  CHECK_FALSE(d.y4_fallback);
  const double lhs = evaluate_filter(d.filter, d.grid.s_max * 0.12);
  const double rhs = evaluate_filter(d.filter, d.filter.y2) / 10.0;
  CHECK(std::abs(lhs - rhs) < 1e-10);
  CHECK(d.attenuation_residual < 1e-10);
}

TEST_CASE("scale identities hold for random informative eigenvalues") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const double lambda_star = rng.uniform(1e-3, 0.999);
    const double lambda_next = std::min(2.0, lambda_star * rng.uniform(1.001, 1.8));
    FilterDerivation d = derive_filter_and_scales(lambda_star, lambda_next, 7);
    CHECK(std::abs(d.grid.s_min * lambda_star - 1.0) < 1e-13);
    CHECK(std::abs(d.grid.s_max * lambda_star * lambda_star - 1.0) < 1e-12);
    CHECK(d.filter.y2 == d.grid.s_min);
    CHECK(d.filter.y3 == d.filter.y2);
    // attenuation whenever the bisection found the root
    if (!d.y4_fallback) {
      const double peak = evaluate_filter(d.filter, d.grid.s_max * lambda_star);
      const double next = evaluate_filter(d.filter, d.grid.s_max * lambda_next);
      CHECK(peak >= 10.0 * next - 1e-9);
    }
    // log-spaced grid: constant ratio
    const double ratio = d.grid.scales[1] / d.grid.scales[0];
    for (int k = 1; k + 1 < d.grid.size(); ++k) {
      CHECK(d.grid.scales[k + 1] / d.grid.scales[k] == doctest::Approx(ratio).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate informative eigenvalues are rejected") {
  CHECK_THROWS_AS(derive_filter_and_scales(1.0, 1.5, 5), DomainError);
  CHECK_THROWS_AS(derive_filter_and_scales(1.2, 1.5, 5), DomainError);
  CHECK_THROWS_AS(derive_filter_and_scales(0.0, 0.5, 5), DomainError);
  CHECK_THROWS_AS(derive_filter_and_scales(0.5, 0.4, 5), DomainError);
  CHECK_THROWS_AS(derive_filter_and_scales(0.5, 0.6, 1), DomainError);
}

TEST_CASE("missing next eigenvalue falls back to y4 = 2 y2") {
  FilterDerivation d = derive_filter_and_scales(0.5, std::nullopt, 5);
  CHECK(d.y4_fallback);
  CHECK(d.filter.y4 == doctest::Approx(2.0 * d.filter.y2));
}

namespace {

SupraSystem random_two_layer(int n, std::uint64_t seed, InterLayerWeights* weights_out = nullptr,
                             TemporalNetwork* net_out = nullptr) {
  std::vector<helpers::Edge> edges;
  for (auto [i, j] : helpers::er_edges(n, 0.4, seed)) edges.push_back({1, i, j, 1.0});
  for (auto [i, j] : helpers::er_edges(n, 0.4, seed + 1)) edges.push_back({2, i, j, 1.0});
  TemporalNetwork net = helpers::make_network(n, 2, edges);
  InterLayerWeights w = lart_weights(net);
  for (double& v : w.w) v += 0.25;
  if (weights_out) *weights_out = w;
  if (net_out) *net_out = net;
  return build_supra_system(net, w);
}

}  // namespace

TEST_CASE("unit gains reproduce the identity") {
  SupraSystem sys = random_two_layer(8, 21);
  SpectralBasis basis = leading_eigenpairs(sys, sys.size());
  std::vector<double> gains(sys.size(), 1.0);
  WaveletFeatures psi = wavelet_matrix_from_gains(basis, gains);
  for (int a = 0; a < sys.size(); ++a) {
    for (int b = 0; b < sys.size(); ++b) {
      const double expected = a == b ? 1.0 : 0.0;
      CHECK(psi.rows[static_cast<std::size_t>(a) * sys.size() + b] ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact wavelet matrix is symmetric") {
  SupraSystem sys = random_two_layer(9, 33);
  SpectralBasis basis = leading_eigenpairs(sys, sys.size());
  WaveletFilterSpec spec{1.0, 2.5, 2.5, 6.0};
  WaveletFeatures psi = wavelet_matrix_exact(basis, spec, 1.3);
  for (int a = 0; a < sys.size(); ++a) {
    for (int b = a + 1; b < sys.size(); ++b) {
      CHECK(psi.rows[static_cast<std::size_t>(a) * sys.size() + b] ==
            doctest::Approx(psi.rows[static_cast<std::size_t>(b) * sys.size() + a])
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("partial bases are rejected for the exact path") {
  SupraSystem sys = random_two_layer(8, 5);
  SpectralBasis partial = leading_eigenpairs(sys, 4);
  WaveletFilterSpec spec{1.0, 2.0, 2.0, 4.0};
  CHECK_THROWS_AS(wavelet_matrix_exact(partial, spec, 1.0), PreconditionError);
}

TEST_CASE("exact columns match the chebyshev path on deltas") {
  TemporalNetwork net;
  InterLayerWeights w;
  SupraSystem sys = random_two_layer(4, 77, &w, &net);  // NT = 8
  SpectralBasis basis = leading_eigenpairs(sys, sys.size());
  WaveletFilterSpec spec{1.0, 2.2, 2.2, 5.1};
  const double scale = 1.4;
  WaveletFeatures psi = wavelet_matrix_exact(basis, spec, scale);
  ChebyshevExpansion exp = chebyshev_coefficients(spec, scale, 80, basis.lambda_max_estimate);
  for (int probe = 0; probe < sys.size(); ++probe) {
    std::vector<double> delta(sys.size(), 0.0);
    delta[probe] = 1.0;
    std::vector<double> filtered = apply_filtered_operator(sys, exp, delta);
    for (int i = 0; i < sys.size(); ++i) {
      CHECK(std::abs(filtered[i] - psi.rows[static_cast<std::size_t>(probe) * sys.size() + i]) <
            1e-3);
    }
  }
}

TEST_CASE("sketches are deterministic in the seed") {
  SupraSystem sys = random_two_layer(10, 4);
  WaveletFilterSpec spec{1.0, 2.0, 2.0, 4.5};
  WaveletFeatures a = wavelet_sketch_fast(sys, spec, 1.5, 40, 99, 40);
  WaveletFeatures b = wavelet_sketch_fast(sys, spec, 1.5, 40, 99, 40);
  CHECK(a.rows == b.rows);
  WaveletFeatures c = wavelet_sketch_fast(sys, spec, 1.5, 40, 100, 40);
  CHECK(a.rows != c.rows);
}

TEST_CASE("full orthonormal signal sets reproduce exact correlations") {
  // eta = NT with an orthonormal signal matrix that maps the all-ones vector
  // to itself (a rotation of its complement): the sketch is then an exact
  // rotation of the wavelet matrix that also preserves row means, so row
  // correlations are reproduced to rounding.
  SupraSystem sys = random_two_layer(8, 55);
  const int nt = sys.size();
  SpectralBasis basis = leading_eigenpairs(sys, nt);
  WaveletFilterSpec spec{1.0, 2.4, 2.4, 5.5};
  const double scale = 1.2;

  // orthonormal frame [u | q_2 .. q_nt] with u parallel to the ones vector
  Eigen::MatrixXd frame_input(nt, nt);
  frame_input.col(0).setOnes();
  Rng rng(8);
  for (int c = 1; c < nt; ++c) {
    for (int r = 0; r < nt; ++r) frame_input(r, c) = rng.uniform(-1.0, 1.0);
  }
  Eigen::MatrixXd frame =
      Eigen::HouseholderQR<Eigen::MatrixXd>(frame_input).householderQ();
  // rotation of the complement, identity on u
  Eigen::MatrixXd w_input(nt - 1, nt - 1);
  for (int c = 0; c < nt - 1; ++c) {
    for (int r = 0; r < nt - 1; ++r) w_input(r, c) = rng.uniform(-1.0, 1.0);
  }
  Eigen::MatrixXd w = Eigen::HouseholderQR<Eigen::MatrixXd>(w_input).householderQ();
  Eigen::MatrixXd block = Eigen::MatrixXd::Identity(nt, nt);
  block.bottomRightCorner(nt - 1, nt - 1) = w;
  Eigen::MatrixXd rotation = frame * block * frame.transpose();

  WaveletFeatures exact = wavelet_matrix_exact(basis, spec, scale);
  // apply the rotation through the exact operator so only the estimator
  // geometry is under test, not the chebyshev error
  Eigen::Map<const Eigen::MatrixXd> psi(exact.rows.data(), nt, nt);
  Eigen::MatrixXd sketch_matrix = psi.transpose() * rotation;
  WaveletFeatures sketch;
  sketch.scale = scale;
  sketch.mode = FeatureMode::Sketch;
  sketch.n = nt;
  sketch.width = nt;
  sketch.rows.resize(static_cast<std::size_t>(nt) * nt);
  for (int r = 0; r < nt; ++r) {
    for (int c = 0; c < nt; ++c) {
      sketch.rows[static_cast<std::size_t>(r) * nt + c] = sketch_matrix(r, c);
    }
  }

  CorrelationFeatures exact_corr = correlation_features(exact);
  CorrelationFeatures sketch_corr = correlation_features(sketch);
  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      CHECK(exact_corr.distance(a, b) ==
            doctest::Approx(sketch_corr.distance(a, b)).epsilon(1e-6));
    }
  }
}

TEST_CASE("sketch correlation distances approximate exact mode") {
  // NT = 640: 64 nodes over 10 layers with strongly separated 2-block
  // structure and strong constant couplings, evaluated at the maximum scale
  // where the filter concentrates on the informative eigenvalue and the
  // correlations polarize
  std::vector<helpers::Edge> edges;
  Rng rng(2024);
  for (int t = 1; t <= 10; ++t) {
    for (int i = 0; i < 64; ++i) {
      for (int j = i + 1; j < 64; ++j) {
        const bool same = (i < 32) == (j < 32);
        if (rng.bernoulli(same ? 0.6 : 0.01)) {
          edges.push_back({t, i, j, 1.0});
        }
      }
    }
  }
  TemporalNetwork net = helpers::make_network(64, 10, edges);
  InterLayerWeights w = constant_weights(net, 10.0);
  SupraSystem sys = build_supra_system(net, w);
  const int nt = sys.size();
  SpectralBasis basis = leading_eigenpairs(sys, nt);
  LayerNullBasis nulls = layer_null_basis(net, sys);
  LambdaStarSelection sel = select_lambda_star(basis, nulls);
  const FilterDerivation derivation =
      derive_filter_and_scales(sel.lambda_star, basis.eigenvalues[sel.q_index], 10);

  const double scale = derivation.grid.s_max;
  WaveletFeatures exact = wavelet_matrix_exact(basis, derivation.filter, scale);
  CorrelationFeatures exact_corr = correlation_features(exact);

  WaveletFeatures sketch = wavelet_sketch_fast(sys, derivation.filter, scale, 100, 7, 80,
                                               basis.lambda_max_estimate);
  CorrelationFeatures sketch_corr = correlation_features(sketch);

  long within = 0, total = 0;
  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      ++total;
      if (std::abs(exact_corr.distance(a, b) - sketch_corr.distance(a, b)) < 0.05) ++within;
    }
  }
  CHECK(static_cast<double>(within) / total > 0.95);
}

TEST_CASE("correlation distance basics") {
  WaveletFeatures f;
  f.n = 4;
  f.width = 4;
  f.rows = {1, 2, 3, 4,
            1, 2, 3, 4,
            -1, -2, -3, -4,
            1, 2, 3, 5};
  CorrelationFeatures corr = correlation_features(f);
  CHECK(corr.distance(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(corr.distance(0, 2) == doctest::Approx(2.0).epsilon(1e-12));
  // hand-computed Pearson correlation of (1,2,3,4) and (1,2,3,5)
  const double r = 6.5 / std::sqrt(5.0 * 8.75);
  CHECK(corr.distance(0, 3) == doctest::Approx(1.0 - r).epsilon(1e-12));
  CHECK(corr.distance(2, 2) == 0.0);
}

TEST_CASE("zero-variance rows sit at distance 1") {
  WaveletFeatures f;
  f.n = 3;
  f.width = 4;
  f.rows = {2, 2, 2, 2,
            1, 2, 3, 4,
            0, 0, 0, 0};
  CorrelationFeatures corr = correlation_features(f);
  CHECK(corr.zero_variance_count == 2);
  CHECK(corr.distance(0, 1) == 1.0);
  CHECK(corr.distance(0, 2) == 1.0);
  CHECK(corr.distance(1, 2) == 1.0);
}

TEST_CASE("correlation distance is invariant under positive affine rescaling") {
  Rng rng(12);
  WaveletFeatures f;
  f.n = 6;
  f.width = 20;
  f.rows.resize(6 * 20);
  for (double& v : f.rows) v = rng.uniform(-1.0, 1.0);
  WaveletFeatures g = f;
  for (int row = 0; row < 6; ++row) {
    const double a = rng.uniform(0.1, 3.0);
    const double b = rng.uniform(-2.0, 2.0);
    for (int c = 0; c < 20; ++c) {
      g.rows[static_cast<std::size_t>(row) * 20 + c] =
          a * f.rows[static_cast<std::size_t>(row) * 20 + c] + b;
    }
  }
  CorrelationFeatures cf = correlation_features(f);
  CorrelationFeatures cg = correlation_features(g);
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      CHECK(cf.distance(a, b) == doctest::Approx(cg.distance(a, b)).epsilon(1e-11));
    }
  }
}
