#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "cfm/affine.hpp"
#include "cfm/engine.hpp"
#include "cfm/frame.hpp"
#include "cfm/rigid.hpp"

namespace cfm {

/// Smooth ground-truth warp z -> z + v(z) with
/// v(z) = offset + linear * z + amplitude * (sin(f z_y), sin(f z_x)).
struct WarpField {
  Vec2 offset = Vec2::Zero();
  double linear = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;

  Vec2 displacement(const Vec2& z) const;
  /// d(z + v(z)) / dz.
  Mat2 jacobian(const Vec2& z) const;
  bool operator==(const WarpField&) const = default;
};

using TrueTransform = std::variant<RigidParams, AffineParams, WarpField>;

using IndexPair = std::pair<Eigen::Index, Eigen::Index>;  // (model, data)

struct SceneSpec {
  int n_inliers = 200;
  double outlier_ratio = 0.0;
  ModelKind kind = ModelKind::rigid;
  /// Must hold the alternative matching `kind`.
  TrueTransform truth = RigidParams{};
  /// Gaussian noise per block (dot, ddot, tdot) added to data inliers.
  std::array<double, 3> noise_sigma{0.0, 0.0, 0.0};
  std::uint64_t seed = 0;
  /// Locations are uniform in [extent_lo, extent_hi]^2.
  double extent_lo = -2.0;
  double extent_hi = 2.0;
  /// Shape matrices are s R(theta) [[1, k], [0, 1]] with s in
  /// [scale_lo, scale_hi], theta uniform and |k| <= shear_max.
  double scale_lo = 0.5;
  double scale_hi = 2.0;
  double shear_max = 0.3;

  void validate() const;
};

struct Scene {
  FrameSet data;
  FrameSet model;
  std::vector<IndexPair> ground_truth;
  TrueTransform true_transform;
};

/// Per-block noise of the benchmark scenes. Detected shapes are estimated far
/// less precisely than locations, relative to their magnitude.
inline constexpr std::array<double, 3> kBenchNoise{0.1, 0.1, 0.02};

/// The standard scene for outlier sweeps of `kind`, with kBenchNoise:
/// rigid rotates by 20 degrees, scales by 1.2 and shifts by (0.3, -0.2);
/// affine uses B = [[1.1, 0.3], [-0.1, 0.9]], t = (0.2, 0.1); non-rigid uses
/// a sinusoidal warp of amplitude 0.2 and unit frequency.
SceneSpec benchmark_scene(ModelKind kind, double outlier_ratio, std::uint64_t seed);

/// ceil(n * ratio / (1 - ratio)), robust to rounding noise in the quotient.
Eigen::Index outlier_count(int n_inliers, double ratio);

FrameVec6 apply_truth(const TrueTransform& t, const FrameVec6& v);

/// Moves each location by the warp and maps the shape columns by the warp's
/// Jacobian at that location.
FrameSet apply_nonrigid_truth(const FrameSet& model, const WarpField& field);

/// Inliers first (model i corresponds to data i), then independent outliers
/// appended to each set. Deterministic in `spec.seed`.
Scene generate(const SceneSpec& spec);

}  // namespace cfm
