#pragma once

// Random instance generators and brute-force oracles shared by the tests.
// The oracles deliberately use explicit loops over (m, n) pairs and scalar
// arithmetic so they share no code path with the library kernels.

#include <cmath>
#include <numbers>
#include <random>

#include "cfm/frame.hpp"
#include "cfm/mixture.hpp"

namespace cfm::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Mat2 random_mat(Rng& rng, double lo = -1.0, double hi = 1.0) {
  Mat2 m;
  m << uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi);
  return m;
}

inline Vec2 random_vec(Rng& rng, double lo = -1.0, double hi = 1.0) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

/// Frames with well-conditioned shape matrices.
inline FeatureFrame random_frame(Rng& rng, double extent = 2.0) {
  FeatureFrame f;
  do {
    f.a = random_mat(rng, -1.5, 1.5);
  } while (std::abs(f.a.determinant()) < 0.1);
  f.x = random_vec(rng, -extent, extent);
  return f;
}

inline FrameSet random_frames(Rng& rng, Eigen::Index n, double extent = 2.0) {
  Matrix6X m(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FrameVec6 v = to_vec6(random_frame(rng, extent));
    m.col(i) << v.dot, v.ddot, v.tdot;
  }
  return FrameSet(std::move(m));
}

/// Random responsibilities: each column of p plus its outlier mass sums to 1.
inline PosteriorMatrix random_posterior(Rng& rng, Eigen::Index m, Eigen::Index n) {
  PosteriorMatrix post;
  post.p.resize(m, n);
  post.outlier_mass.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) total += post.p(i, j) = uniform(rng, 0.0, 1.0);
    const double out = uniform(rng, 0.0, 0.5);
    total += out;
    post.p.col(j) /= total;
    post.outlier_mass(j) = out / total;
  }
  return post;
}

inline PosteriorMatrix identity_posterior(Eigen::Index n) {
  PosteriorMatrix post;
  post.p = Eigen::MatrixXd::Identity(n, n);
  post.outlier_mass = Eigen::VectorXd::Zero(n);
  return post;
}

inline BlockCovariance random_covariance(Rng& rng, double lo = 0.2, double hi = 2.0) {
  return {{uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)}};
}

inline double sq(double v) { return v * v; }

/// |x_n - y_m|^2 in block k, scalar by scalar.
inline double block_dist2(const FrameSet& x, Eigen::Index n, const FrameSet& y, Eigen::Index m,
                          int k) {
  return sq(x.matrix()(2 * k, n) - y.matrix()(2 * k, m)) +
         sq(x.matrix()(2 * k + 1, n) - y.matrix()(2 * k + 1, m));
}

/// 1/2 sum_k sum_{m,n} p(m,n) |x_n - t_m|_k^2 / sigma_k^2 over active blocks.
inline double naive_weighted_residual(const FrameSet& data, const FrameSet& moved,
                                      const PosteriorMatrix& post, const BlockCovariance& cov,
                                      BlockMask mask = BlockMask::all()) {
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!mask.on[static_cast<std::size_t>(k)]) continue;
    double r = 0.0;
    for (Eigen::Index m = 0; m < moved.size(); ++m)
      for (Eigen::Index n = 0; n < data.size(); ++n)
        r += post.p(m, n) * block_dist2(data, n, moved, m, k);
    total += 0.5 * r / cov.var[static_cast<std::size_t>(k)];
  }
  return total;
}

/// Expected complete-data negative log-likelihood, term by term.
inline double naive_q(const FrameSet& data, const FrameSet& moved, const PosteriorMatrix& post,
                      const BlockCovariance& cov, double omega,
                      BlockMask mask = BlockMask::all()) {
  double np = 0.0;
  for (Eigen::Index m = 0; m < post.p.rows(); ++m)
    for (Eigen::Index n = 0; n < post.p.cols(); ++n) np += post.p(m, n);
  const double dims = mask.dims();
  double log_det = 0.0;
  for (int k = 0; k < 3; ++k)
    if (mask.on[static_cast<std::size_t>(k)]) log_det += std::log(cov.var[static_cast<std::size_t>(k)]);
  const double n = double(data.size());
  double q = naive_weighted_residual(data, moved, post, cov, mask);
  q += np * log_det;
  q += np * dims / 2.0 * std::log(2.0 * std::numbers::pi);
  q -= np * std::log(1.0 - omega);
  if (n - np > 0.0) q -= (n - np) * std::log(omega);
  return q;
}

/// Posterior straight from the mixture density: inlier component m has
/// weight (1 - omega)/M and density N(x; t_m, Sigma), the outlier component
/// weight omega and density 1/N.
inline PosteriorMatrix naive_posterior(const FrameSet& data, const FrameSet& moved,
                                       const BlockCovariance& cov, double omega,
                                       BlockMask mask = BlockMask::all()) {
  const Eigen::Index m_count = moved.size(), n_count = data.size();
  PosteriorMatrix post;
  post.p.resize(m_count, n_count);
  post.outlier_mass.resize(n_count);
  const double dims = mask.dims();
  double det = 1.0;
  for (int k = 0; k < 3; ++k)
    if (mask.on[static_cast<std::size_t>(k)]) det *= cov.var[static_cast<std::size_t>(k)];
  const double norm = std::pow(2.0 * std::numbers::pi, dims / 2.0) * det;
  double nll = 0.0;
  for (Eigen::Index n = 0; n < n_count; ++n) {
    double total = omega / double(n_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
      double d = 0.0;
      for (int k = 0; k < 3; ++k)
        if (mask.on[static_cast<std::size_t>(k)])
          d += block_dist2(data, n, moved, m, k) / cov.var[static_cast<std::size_t>(k)];
      post.p(m, n) = (1.0 - omega) / double(m_count) * std::exp(-0.5 * d) / norm;
      total += post.p(m, n);
    }
    post.p.col(n) /= total;
    post.outlier_mass(n) = omega / double(n_count) / total;
    nll -= std::log(total);
  }
  post.neg_log_likelihood = nll;
  return post;
}

/// Central finite difference of f at x along coordinate i.
template <class F, class V>
double central_difference(const F& f, V x, int i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

}  // namespace cfm::test
