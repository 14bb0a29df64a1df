#pragma once

#include <array>

#include "cfm/frame.hpp"
#include "cfm/mixture.hpp"

namespace cfm {

struct RigidParams;
struct AffineParams;

/// Mean squared block norm after normalization. The outlier density 1/N and
/// the (2 pi)^{D/2} |Sigma|^{1/2} factor are not unit-free, so this choice
/// sets how strongly outliers compete with the mixture: larger values let the
/// first E-steps write most frames off as outliers, smaller ones let inflated
/// Gaussians absorb genuine outliers.
inline constexpr double kUnitMeanSquare = 0.5;

/// Change of units applied before registration. Each block is divided by a
/// scale shared by both sets; the location block is first centered on each
/// set's own mean. Rigid and affine maps keep their linear part under this
/// change, so only the translation needs mapping back.
struct Normalization {
  std::array<double, 3> scale{1.0, 1.0, 1.0};
  Vec2 data_mean = Vec2::Zero();
  Vec2 model_mean = Vec2::Zero();

  /// Scales chosen so each block has mean squared norm kUnitMeanSquare over
  /// the union of both (location-centered) sets.
  static Normalization fit(const FrameSet& data, const FrameSet& model);

  bool is_identity() const;

  FrameSet data_to_unit(const FrameSet& data) const;
  FrameSet model_to_unit(const FrameSet& model) const;
  /// Inverse of data_to_unit.
  FrameSet unit_to_data(const FrameSet& unit) const;

  BlockCovariance covariance_to_data(const BlockCovariance& cov) const;
  RigidParams to_data(const RigidParams& unit) const;
  AffineParams to_data(const AffineParams& unit) const;

  bool operator==(const Normalization&) const = default;
};

}  // namespace cfm
