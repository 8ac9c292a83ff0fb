#include "tmscd/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tmscd/rng.hpp"

namespace tmscd {

namespace {

double gershgorin_bound(const CsrMatrix& m) {
  double bound = 0.0;
  for (int i = 0; i < m.n; ++i) {
    double center = 0.0, radius = 0.0;
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      if (m.col[k] == i) {
        center = m.val[k];
      } else {
        radius += std::abs(m.val[k]);
      }
    }
    bound = std::max(bound, center + radius);
  }
  return bound;
}

SpectralBasis dense_eigenpairs(const SupraSystem& sys, int k) {
  const int n = sys.size();
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  const CsrMatrix& lap = sys.laplacian;
  for (int i = 0; i < n; ++i) {
    for (int p = lap.row_ptr[i]; p < lap.row_ptr[i + 1]; ++p) {
      dense(i, lap.col[p]) = lap.val[p];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw SolverError("dense eigensolver failed to converge");
  }
  SpectralBasis basis;
  basis.n = n;
  basis.full = (k == n);
  basis.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
  basis.eigenvectors.resize(static_cast<std::size_t>(n) * k);
  for (int j = 0; j < k; ++j) {
    Eigen::Map<Eigen::VectorXd>(basis.eigenvectors.data() + static_cast<std::size_t>(j) * n, n) =
        solver.eigenvectors().col(j);
  }
  return basis;
}

// Shift-invert deflated Lanczos with full reorthogonalization. The iteration
// runs on B = (L + sigma I)^{-1}, whose largest eigenvalues are the smallest
// eigenvalues of L stretched far apart, so clustered spectra converge in few
// steps. Converged Ritz pairs are locked from the bottom of L's spectrum and
// every restart runs in the orthogonal complement of the locked set, which is
// what resolves multiplicities.
class DeflatedLanczos {
 public:
  DeflatedLanczos(const CsrMatrix& a, double tol, std::uint64_t seed, long max_matvecs)
      : a_(a), n_(a.n), tol_(tol), rng_(seed), max_matvecs_(max_matvecs) {
    Eigen::SparseMatrix<double> shifted(n_, n_);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(a.col.size() + n_);
    for (int i = 0; i < n_; ++i) {
      bool has_diag = false;
      for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        double v = a.val[p];
        if (a.col[p] == i) {
          v += kShift;
          has_diag = true;
        }
        triplets.emplace_back(i, a.col[p], v);
      }
      if (!has_diag) triplets.emplace_back(i, i, kShift);
    }
    shifted.setFromTriplets(triplets.begin(), triplets.end());
    factorization_.compute(shifted);
    if (factorization_.info() != Eigen::Success) {
      throw SolverError("sparse factorization of the shifted laplacian failed");
    }
  }

  void run(int k) {
    int stagnant_rounds = 0;
    while (static_cast<int>(values_.size()) < k) {
      const int locked = static_cast<int>(values_.size());
      const int room = n_ - locked;
      const int m = std::min(room, std::max(2 * (k - locked) + 60, 240) + 80 * stagnant_rounds);
      const int locked_before = locked;
      lanczos_round(m, k);
      if (static_cast<int>(values_.size()) == locked_before) {
        if (++stagnant_rounds > 6) {
          throw SolverError("eigensolver stagnated; best residual " +
                            std::to_string(best_residual_));
        }
      } else {
        stagnant_rounds = 0;
      }
    }
    // Confirmation probes: a missed copy of a degenerate eigenvalue would show
    // up in the deflated complement below the current k-th value.
    for (int probe = 0; probe < 3; ++probe) {
      if (static_cast<int>(values_.size()) >= n_) break;
      const double kth = values_[k - 1];
      const std::size_t before = values_.size();
      lanczos_round(std::min(n_ - static_cast<int>(values_.size()), 40), 1, true, kth + tol_);
      if (values_.size() == before) break;
      sort_locked();
    }
    sort_locked();
    if (static_cast<int>(values_.size()) > k) {
      values_.resize(k);
      vectors_.resize(static_cast<std::size_t>(k) * n_);
    }
  }

  std::vector<double> take_values() { return std::move(values_); }
  std::vector<double> take_vectors() { return std::move(vectors_); }

 private:
  static constexpr double kShift = 0.01;

  std::span<const double> locked_vector(int j) const {
    return {vectors_.data() + static_cast<std::size_t>(j) * n_, static_cast<std::size_t>(n_)};
  }

  void orthogonalize_against_locked(std::span<double> w) const {
    for (int j = 0; j < static_cast<int>(values_.size()); ++j) {
      auto q = locked_vector(j);
      const double c = kernels::dot(w, q);
      for (int i = 0; i < n_; ++i) w[i] -= c * q[i];
    }
  }

  void apply_inverse(const std::vector<double>& x, std::vector<double>& y) {
    if (matvecs_++ >= max_matvecs_) {
      throw SolverError("eigensolver exceeded its iteration budget; best residual " +
                        std::to_string(best_residual_));
    }
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), n_);
    Eigen::Map<Eigen::VectorXd>(y.data(), n_) = factorization_.solve(xv);
  }

  // One restart: an m-step basis for B in the deflated complement; converged
  // Ritz pairs are locked from the bottom of L's spectrum. In bounded mode
  // locking stops above only_below (confirmation probes). A restart continues
  // from the smallest unconverged Ritz vector of the previous round when one
  // is available.
  void lanczos_round(int m, int want, bool bounded = false, double only_below = 0.0) {
    if (m < 1) return;
    std::vector<double> basis;  // column-major m_used x n_
    basis.reserve(static_cast<std::size_t>(m) * n_);
    std::vector<double> alpha, beta;
    std::vector<double> v(n_), w(n_), v_prev(n_, 0.0);

    if (restart_hint_.size() == static_cast<std::size_t>(n_)) {
      v = restart_hint_;
      restart_hint_.clear();
    } else {
      for (int i = 0; i < n_; ++i) v[i] = rng_.uniform(-1.0, 1.0);
    }
    orthogonalize_against_locked(v);
    double norm = std::sqrt(kernels::dot(v, v));
    if (norm < 1e-12) return;
    for (int i = 0; i < n_; ++i) v[i] /= norm;

    int m_used = 0;
    for (int j = 0; j < m; ++j) {
      basis.insert(basis.end(), v.begin(), v.end());  // column j
      apply_inverse(v, w);
      const double a_j = kernels::dot(v, w);
      for (int i = 0; i < n_; ++i) w[i] -= a_j * v[i];
      if (j > 0) {
        for (int i = 0; i < n_; ++i) w[i] -= beta[j - 1] * v_prev[i];
      }
      // full reorthogonalization; second pass only when the first removed a
      // substantial component (DGKS criterion)
      double norm_before = std::sqrt(kernels::dot(w, w));
      for (int pass = 0; pass < 2; ++pass) {
        orthogonalize_against_locked(w);
        for (int col = 0; col <= j; ++col) {
          std::span<const double> q{basis.data() + static_cast<std::size_t>(col) * n_,
                                    static_cast<std::size_t>(n_)};
          const double c = kernels::dot(w, q);
          for (int i = 0; i < n_; ++i) w[i] -= c * q[i];
        }
        const double norm_after = std::sqrt(kernels::dot(w, w));
        if (norm_after > 0.707 * norm_before) break;
        norm_before = norm_after;
      }
      alpha.push_back(a_j);
      m_used = j + 1;
      const double b_j = std::sqrt(kernels::dot(w, w));
      if (b_j < 1e-13) {
        beta.push_back(0.0);
        break;  // invariant subspace reached
      }
      beta.push_back(b_j);
      v_prev = v;
      for (int i = 0; i < n_; ++i) v[i] = w[i] / b_j;
    }

    Eigen::VectorXd diag(m_used), sub(std::max(0, m_used - 1));
    for (int i = 0; i < m_used; ++i) diag[i] = alpha[i];
    for (int i = 0; i + 1 < m_used; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub);
    if (tri.info() != Eigen::Success) {
      throw SolverError("tridiagonal eigensolver failed");
    }

    // Ritz values of B in descending order are candidate smallest eigenvalues
    // of L. The scan stops at the first unconverged pair: a true eigenvalue
    // could hide behind it, so nothing above may be locked.
    const double beta_last = beta[m_used - 1];
    Eigen::Map<const Eigen::MatrixXd> v_mat(basis.data(), n_, m_used);
    for (int pos = m_used - 1; pos >= 0; --pos) {
      const double theta = tri.eigenvalues()[pos];
      if (theta <= 0.0) break;  // beyond B's positive spectrum: noise
      const double lambda = 1.0 / theta - kShift;
      if (bounded && lambda > only_below) break;
      const double est_b = std::abs(beta_last * tri.eigenvectors()(m_used - 1, pos));
      // back-transformed residual estimate for L
      const double est = est_b * (2.0 + kShift) / theta;
      best_residual_ = std::min(best_residual_, est);
      if (est > tol_) {
        Eigen::VectorXd hint = v_mat * tri.eigenvectors().col(pos);
        restart_hint_.assign(hint.data(), hint.data() + n_);
        break;
      }
      Eigen::VectorXd y = v_mat * tri.eigenvectors().col(pos);
      std::span<double> ys{y.data(), static_cast<std::size_t>(n_)};
      orthogonalize_against_locked(ys);
      const double y_norm = std::sqrt(kernels::dot(ys, ys));
      if (y_norm < 0.5) continue;  // collapsed onto the locked set
      for (int i = 0; i < n_; ++i) y[i] /= y_norm;
      // direct residual check on L before locking
      std::vector<double> ly(n_);
      kernels::serial::spmv(a_, ys, ly);
      double res = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double r = ly[i] - lambda * y[i];
        res += r * r;
      }
      res = std::sqrt(res);
      best_residual_ = std::min(best_residual_, res);
      if (res > 10.0 * tol_) break;
      values_.push_back(lambda);
      vectors_.insert(vectors_.end(), y.data(), y.data() + n_);
      if (!bounded && static_cast<int>(values_.size()) >= want) break;
    }
  }

  void sort_locked() {
    const int count = static_cast<int>(values_.size());
    std::vector<int> order(count);
    for (int i = 0; i < count; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values_[a] < values_[b]; });
    std::vector<double> sorted_values(count);
    std::vector<double> sorted_vectors(static_cast<std::size_t>(count) * n_);
    for (int i = 0; i < count; ++i) {
      sorted_values[i] = values_[order[i]];
      std::copy_n(vectors_.data() + static_cast<std::size_t>(order[i]) * n_, n_,
                  sorted_vectors.data() + static_cast<std::size_t>(i) * n_);
    }
    values_ = std::move(sorted_values);
    vectors_ = std::move(sorted_vectors);
  }

  const CsrMatrix& a_;
  int n_;
  double tol_;
  Rng rng_;
  long max_matvecs_;
  long matvecs_ = 0;
  double best_residual_ = 1e300;
  std::vector<double> restart_hint_;
  std::vector<double> values_;
  std::vector<double> vectors_;  // column-major
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factorization_;
};

}  // namespace

SpectralBasis leading_eigenpairs(const SupraSystem& sys, int k, const EigOptions& opts) {
  const int n = sys.size();
  if (k < 1 || k > n) {
    throw PreconditionError("eigenpair count must lie in [1, NT]");
  }
  EigMethod method = opts.method;
  if (method == EigMethod::Auto) {
    // dense is worthwhile only when most of the spectrum is needed anyway
    const bool small = n <= 256;
    const bool wants_most = n <= opts.dense_threshold && k >= n / 3;
    method = (small || wants_most) ? EigMethod::Dense : EigMethod::Lanczos;
  }

  SpectralBasis basis;
  if (method == EigMethod::Dense) {
    basis = dense_eigenpairs(sys, k);
  } else {
    const long budget = opts.max_iterations > 0 ? opts.max_iterations : 10L * n;
    DeflatedLanczos solver(sys.laplacian, opts.tol, opts.seed, budget);
    solver.run(k);
    basis.n = n;
    basis.eigenvalues = solver.take_values();
    basis.eigenvectors = solver.take_vectors();
    basis.full = (k == n);
  }
  basis.lambda_max_estimate = std::min(2.0, gershgorin_bound(sys.laplacian));
  return basis;
}

LayerNullBasis layer_null_basis(const TemporalNetwork& net, const SupraSystem& sys) {
  const int n = net.n_nodes;
  const int t_count = net.n_layers();
  const IndexMap map = sys.map;

  LayerNullBasis nulls;
  nulls.n = sys.size();
  nulls.n_layers = t_count;

  std::vector<std::vector<double>> extras;
  std::vector<int> extras_layer;

  for (int t = 0; t < t_count; ++t) {
    const CsrMatrix& layer = net.layers[t];
    std::vector<int> component(n);
    const int n_comp = connected_components(layer, &component);
    if (n_comp > 1) nulls.has_disconnected_layer = true;

    std::vector<double> sqrt_deg(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      for (double v : layer.row_vals(i)) d += v;
      sqrt_deg[i] = std::sqrt(d);
    }

    // per-component sqrt-degree vectors; an all-isolated component (degree 0)
    // degenerates to its indicator
    auto component_column = [&](int c) {
      std::vector<double> column(nulls.n, 0.0);
      double norm_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        if (component[i] != c && c >= 0) continue;
        column[map.flat(i, t)] = sqrt_deg[i];
        norm_sq += sqrt_deg[i] * sqrt_deg[i];
      }
      if (norm_sq == 0.0) {
        for (int i = 0; i < n; ++i) {
          if (component[i] != c && c >= 0) continue;
          column[map.flat(i, t)] = 1.0;
          norm_sq += 1.0;
        }
      }
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (int i = 0; i < n; ++i) {
        if (component[i] != c && c >= 0) continue;
        column[map.flat(i, t)] *= inv;
      }
      return column;
    };

    nulls.columns.push_back(component_column(-1));  // whole layer
    nulls.column_layer.push_back(t);
    for (int c = 1; c < n_comp; ++c) {
      extras.push_back(component_column(c));
      extras_layer.push_back(t);
    }
  }

  for (std::size_t e = 0; e < extras.size(); ++e) {
    nulls.columns.push_back(std::move(extras[e]));
    nulls.column_layer.push_back(extras_layer[e]);
  }
  return nulls;
}

LambdaStarSelection select_lambda_star(const SpectralBasis& basis, const LayerNullBasis& nulls,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw DomainError("residual threshold must lie in (0, 1]");
  }
  const int t_count = nulls.n_layers;
  if (basis.k() < t_count + 1) {
    throw PreconditionError("lambda_star selection needs at least T+1 eigenpairs");
  }
  const int n = basis.n;

  // Orthonormalize the null columns (modified Gram-Schmidt, two passes);
  // rank-deficient columns are dropped, the projector is what matters.
  std::vector<std::vector<double>> q;
  q.reserve(nulls.columns.size());
  for (const auto& column : nulls.columns) {
    std::vector<double> v = column;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& existing : q) {
        const double c = kernels::dot(v, existing);
        for (int i = 0; i < n; ++i) v[i] -= c * existing[i];
      }
    }
    const double norm = std::sqrt(kernels::dot(v, v));
    if (norm > 1e-10) {
      for (int i = 0; i < n; ++i) v[i] /= norm;
      q.push_back(std::move(v));
    }
  }

  LambdaStarSelection sel;
  const int cap = t_count + 1;
  std::vector<double> remainder(n);
  for (int tau = 1; tau <= cap; ++tau) {
    auto v = basis.eigenvector(tau - 1);
    // subtract the projection vector directly; the difference-of-squares form
    // loses half the digits exactly where the residual should vanish
    std::copy(v.begin(), v.end(), remainder.begin());
    for (const auto& column : q) {
      const double c = kernels::dot(remainder, column);
      for (int i = 0; i < n; ++i) remainder[i] -= c * column[i];
    }
    const double residual = std::sqrt(kernels::dot(remainder, remainder));
    sel.residual_norms.push_back(residual);
    if (residual > threshold) {
      sel.q_index = tau;
      sel.lambda_star = basis.eigenvalues[tau - 1];
      return sel;
    }
  }
  sel.q_index = cap;
  sel.lambda_star = basis.eigenvalues[cap - 1];
  sel.capped = true;
  return sel;
}

ChebyshevExpansion chebyshev_expand(const std::function<double(double)>& target, int order,
                                    double lambda_max) {
  if (!(lambda_max > 0.0)) {
    throw DomainError("lambda_max must be positive");
  }
  if (order < 3) {
    throw DomainError("chebyshev order must be at least 3");
  }
  ChebyshevExpansion out;
  out.lambda_max = lambda_max;
  out.coeffs.assign(order + 1, 0.0);

  const int quad = std::max(2 * order + 2, 512);
  const double half = 0.5 * lambda_max;
  std::vector<double> theta(quad), f(quad);
  for (int p = 0; p < quad; ++p) {
    theta[p] = std::numbers::pi * (p + 0.5) / quad;
    f[p] = target(half * (std::cos(theta[p]) + 1.0));
  }
  for (int c = 0; c <= order; ++c) {
    double acc = 0.0;
    for (int p = 0; p < quad; ++p) acc += f[p] * std::cos(c * theta[p]);
    out.coeffs[c] = 2.0 * acc / quad;
  }

  // report the approximation error on a fixed 1000-point grid
  const int grid = 1000;
  double max_err = 0.0;
  for (int gi = 0; gi < grid; ++gi) {
    const double y = lambda_max * gi / (grid - 1.0);
    const double x = y / half - 1.0;
    // Clenshaw evaluation
    double b1 = 0.0, b2 = 0.0;
    for (int c = order; c >= 1; --c) {
      const double b0 = out.coeffs[c] + 2.0 * x * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    const double approx = 0.5 * out.coeffs[0] + x * b1 - b2;
    max_err = std::max(max_err, std::abs(approx - target(y)));
  }
  out.grid_max_error = max_err;
  return out;
}

ChebyshevExpansion chebyshev_coefficients(const WaveletFilterSpec& filter, double scale,
                                          int order, double lambda_max) {
  filter.validate();
  return chebyshev_expand([&](double y) { return evaluate_filter(filter, scale * y); }, order,
                          lambda_max);
}

std::vector<double> apply_filtered_operator(const SupraSystem& sys,
                                            const ChebyshevExpansion& expansion,
                                            std::span<const double> signal,
                                            kernels::Exec exec) {
  if (expansion.coeffs.empty()) {
    throw DomainError("empty chebyshev coefficient list");
  }
  if (static_cast<int>(signal.size()) != sys.size()) {
    throw PreconditionError("signal length must equal NT");
  }
  std::vector<double> out(signal.size());
  kernels::chebyshev_apply_block(sys.laplacian, expansion.coeffs, expansion.lambda_max, signal,
                                 out, 1, exec);
  return out;
}

}  // namespace tmscd
