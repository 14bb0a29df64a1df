#pragma once

#include "cfm/frame.hpp"
#include "cfm/mixture.hpp"

namespace cfm {

inline constexpr double kMinInlierMassRatio = 1e-8;
inline constexpr double kMinScale = 1e-6;

/// Scaled rotation s * r applied to every block, translation t on tdot only.
struct RigidParams {
  double s = 1.0;
  Mat2 r = Mat2::Identity();
  Vec2 t = Vec2::Zero();

  RelativeTransform as_transform() const { return {s * r, t}; }
  bool operator==(const RigidParams&) const = default;
};

struct RigidStep {
  RigidParams params;
  BlockCovariance cov;
};

/// One rigid M-step given fixed responsibilities and the current variances.
/// Throws DegenerateResponsibility if N_p < min_mass_ratio * N.
RigidStep rigid_m_step(const FrameSet& data, const FrameSet& model, const PosteriorMatrix& post,
                       const BlockCovariance& cov, BlockMask mask = BlockMask::all(),
                       double var_floor = kVarFloor,
                       double min_mass_ratio = kMinInlierMassRatio);

}  // namespace cfm
