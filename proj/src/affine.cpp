#include "cfm/affine.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "moments.hpp"

namespace cfm {

AffineStep affine_m_step(const FrameSet& data, const FrameSet& model, const PosteriorMatrix& post,
                         const BlockCovariance& cov, BlockMask mask, double var_floor,
                         double min_mass_ratio) {
  const auto mom = detail::linear_moments(data, model, post, cov, mask, min_mass_ratio);

  AffineStep out;
  Mat2 gram = mom.gram;
  // The Gram matrix is symmetric PSD, so its condition number is the ratio
  // of its eigenvalues.
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Mat2>(gram).eigenvalues();
  const double cond = ev(0) > 0.0 ? ev(1) / ev(0) : std::numeric_limits<double>::infinity();
  if (!(cond <= kGramConditionLimit)) {
    double eps = kRidgeFactor * gram.trace();
    if (!(eps > 0.0)) eps = kRidgeFactor;
    gram += eps * Mat2::Identity();
    out.params.ridge_applied = true;
  }
  out.params.b = mom.cross * gram.inverse();
  out.params.t = mom.mu_x - out.params.b * mom.mu_y;
  out.params.near_singular = std::abs(out.params.b.determinant()) < kAffineDetFloor;

  const FrameSet moved = apply_transform(out.params.as_transform(), model);
  out.cov = detail::refreshed_covariance(data, moved, post, mom.np, cov, mask, var_floor);
  return out;
}

}  // namespace cfm
