#pragma once

// Weighted first and second moments shared by the rigid and affine M-steps.

#include <array>
#include <string>

#include "cfm/error.hpp"
#include "cfm/frame.hpp"
#include "cfm/kernels.hpp"
#include "cfm/mixture.hpp"

namespace cfm::detail {

inline double checked_inlier_mass(const PosteriorMatrix& post, Eigen::Index n_data,
                                  double min_mass_ratio) {
  const double np = post.inlier_mass();
  if (!(np >= min_mass_ratio * double(n_data)) || np <= 0.0) {
    throw DegenerateResponsibility(
        "inlier mass " + std::to_string(np) + " below minimum for " + std::to_string(n_data) +
            " data points",
        np);
  }
  return np;
}

struct LinearMoments {
  double np = 0.0;
  Vec2 mu_x = Vec2::Zero();
  Vec2 mu_y = Vec2::Zero();
  /// sum_k X'_k P^T Y'_k^T with whitened (and, for tdot, centered) blocks.
  Mat2 cross = Mat2::Zero();
  /// sum_k Y'_k d(P1) Y'_k^T.
  Mat2 gram = Mat2::Zero();
};

inline LinearMoments linear_moments(const FrameSet& data, const FrameSet& model,
                                    const PosteriorMatrix& post, const BlockCovariance& cov,
                                    BlockMask mask, double min_mass_ratio) {
  LinearMoments out;
  out.np = checked_inlier_mass(post, data.size(), min_mass_ratio);
  const Eigen::VectorXd row = post.model_mass();
  const Eigen::VectorXd col = post.data_mass();
  out.mu_x = data.block(Block::tdot) * col / out.np;
  out.mu_y = model.block(Block::tdot) * row / out.np;

  for (Block b : kBlocks) {
    if (!mask[b]) continue;
    Matrix2X xc = data.block(b);
    Matrix2X yc = model.block(b);
    if (b == Block::tdot) {
      xc.colwise() -= out.mu_x;
      yc.colwise() -= out.mu_y;
    }
    const double w = 1.0 / cov[b];
    out.cross += w * kernels::cross_moment(xc, post.p) * yc.transpose();
    out.gram += w * yc * row.asDiagonal() * yc.transpose();
  }
  return out;
}

inline BlockCovariance refreshed_covariance(const FrameSet& data, const FrameSet& transformed,
                                            const PosteriorMatrix& post, double np,
                                            const BlockCovariance& old, BlockMask mask,
                                            double var_floor) {
  const auto res = kernels::weighted_block_residuals(data.matrix(), transformed.matrix(), post.p);
  BlockCovariance cov = old;
  for (Block b : kBlocks)
    if (mask[b]) cov[b] = block_variance(res[static_cast<std::size_t>(index(b))], np, var_floor);
  return cov;
}

}  // namespace cfm::detail
