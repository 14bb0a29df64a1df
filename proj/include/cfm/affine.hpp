#pragma once

#include "cfm/frame.hpp"
#include "cfm/mixture.hpp"
#include "cfm/rigid.hpp"

namespace cfm {

inline constexpr double kGramConditionLimit = 1e12;
inline constexpr double kRidgeFactor = 1e-9;
inline constexpr double kAffineDetFloor = 1e-9;

/// One 2x2 map b shared by all three blocks, translation t on tdot only.
struct AffineParams {
  Mat2 b = Mat2::Identity();
  Vec2 t = Vec2::Zero();
  /// The Gram matrix was ill-conditioned and a ridge term was added.
  bool ridge_applied = false;
  /// |det(b)| fell below kAffineDetFloor.
  bool near_singular = false;

  RelativeTransform as_transform() const { return {b, t}; }
  bool operator==(const AffineParams&) const = default;
};

struct AffineStep {
  AffineParams params;
  BlockCovariance cov;
};

AffineStep affine_m_step(const FrameSet& data, const FrameSet& model, const PosteriorMatrix& post,
                         const BlockCovariance& cov, BlockMask mask = BlockMask::all(),
                         double var_floor = kVarFloor,
                         double min_mass_ratio = kMinInlierMassRatio);

}  // namespace cfm
