#include "cfm/rigid.hpp"

#include <algorithm>

#include "cfm/svd2.hpp"
#include "moments.hpp"

namespace cfm {

RigidStep rigid_m_step(const FrameSet& data, const FrameSet& model, const PosteriorMatrix& post,
                       const BlockCovariance& cov, BlockMask mask, double var_floor,
                       double min_mass_ratio) {
  const auto mom = detail::linear_moments(data, model, post, cov, mask, min_mass_ratio);

  RigidStep out;
  out.params.r = optimal_rotation(mom.cross);
  const double denom = mom.gram.trace();
  const double numer = (mom.cross.transpose() * out.params.r).trace();
  out.params.s = denom > 0.0 ? std::max(numer / denom, kMinScale) : 1.0;
  out.params.t = mom.mu_x - out.params.s * out.params.r * mom.mu_y;

  const FrameSet moved = apply_transform(out.params.as_transform(), model);
  out.cov = detail::refreshed_covariance(data, moved, post, mom.np, cov, mask, var_floor);
  return out;
}

}  // namespace cfm
