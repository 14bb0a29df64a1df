#include "cfm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfm/error.hpp"
#include "cfm/kernels.hpp"

namespace cfm {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

kernels::BlockWeights weights(const BlockCovariance& cov, BlockMask mask) {
  kernels::BlockWeights w{};
  for (Block b : kBlocks)
    if (mask[b]) w[static_cast<std::size_t>(index(b))] = 1.0 / cov[b];
  return w;
}

double log_det_sqrt(const BlockCovariance& cov, BlockMask mask) {
  double s = 0.0;
  for (Block b : kBlocks)
    if (mask[b]) s += std::log(cov[b]);
  return s;
}

}  // namespace

void MixtureConfig::validate() const {
  if (!(0.0 < omega_lo && omega_lo <= omega && omega <= omega_hi && omega_hi < 1.0))
    throw InvalidArgument("MixtureConfig: need 0 < omega_lo <= omega <= omega_hi < 1");
  if (!(var_floor > 0.0)) throw InvalidArgument("MixtureConfig: var_floor must be positive");
}

BlockCovariance init_covariance(const FrameSet& data, const FrameSet& model, double var_floor) {
  if (data.empty() || model.empty())
    throw InvalidArgument("init_covariance: frame sets must be non-empty");
  const auto sums = kernels::pair_block_sums(data.matrix(), model.matrix());
  const double scale = 1.0 / (2.0 * double(data.size()) * double(model.size()));
  BlockCovariance cov;
  for (std::size_t b = 0; b < 3; ++b) cov.var[b] = std::max(sums[b] * scale, var_floor);
  return cov;
}

double log_outlier_constant(const BlockCovariance& cov, double omega, Eigen::Index n_model,
                            Eigen::Index n_data, BlockMask mask) {
  return 0.5 * mask.dims() * kLog2Pi + log_det_sqrt(cov, mask) + std::log(omega) -
         std::log1p(-omega) + std::log(double(n_model)) - std::log(double(n_data));
}

PosteriorMatrix e_step(const FrameSet& data, const FrameSet& transformed_model,
                       const BlockCovariance& cov, const MixtureConfig& cfg, BlockMask mask) {
  const Eigen::Index n = data.size(), m = transformed_model.size();
  kernels::PosteriorBuffers buf;
  kernels::posterior(data.matrix(), transformed_model.matrix(), weights(cov, mask),
                     log_outlier_constant(cov, cfg.omega, m, n, mask), buf);

  PosteriorMatrix post;
  post.p = std::move(buf.p);
  post.outlier_mass = std::move(buf.outlier);
  // -sum_n log(omega/N + (1-omega)/M sum_m g_mn), with g_mn the normalized
  // Gaussian: the per-column normalizer times (1-omega) / (M Z).
  const double log_scale = std::log1p(-cfg.omega) - std::log(double(m)) -
                           0.5 * mask.dims() * kLog2Pi - log_det_sqrt(cov, mask);
  post.neg_log_likelihood = -(buf.log_norm.sum() + double(n) * log_scale);
  return post;
}

double q_value(const FrameSet& data, const FrameSet& transformed_model,
               const PosteriorMatrix& post, const BlockCovariance& cov, const MixtureConfig& cfg,
               BlockMask mask) {
  const double n = double(data.size());
  const double np = post.inlier_mass();
  const auto res = kernels::weighted_block_residuals(data.matrix(), transformed_model.matrix(), post.p);
  double q = 0.0;
  for (Block b : kBlocks)
    if (mask[b]) q += 0.5 * res[static_cast<std::size_t>(index(b))] / cov[b];
  q += np * log_det_sqrt(cov, mask);
  q += 0.5 * np * mask.dims() * kLog2Pi;
  q -= np * std::log1p(-cfg.omega);
  q -= (n - np) * std::log(cfg.omega);
  return q;
}

double update_omega(const PosteriorMatrix& post, Eigen::Index n_data, const MixtureConfig& cfg) {
  if (n_data < 1) throw InvalidArgument("update_omega: need at least one data point");
  const double n = double(n_data);
  return std::clamp((n - post.inlier_mass()) / n, cfg.omega_lo, cfg.omega_hi);
}

double block_variance(double weighted_residual, double inlier_mass, double var_floor) {
  return std::max(weighted_residual / (2.0 * inlier_mass), var_floor);
}

}  // namespace cfm
