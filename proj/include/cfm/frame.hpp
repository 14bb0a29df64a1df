#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace cfm {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;
using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Matrix2X = Eigen::Matrix<double, 2, Eigen::Dynamic>;

inline constexpr double kDetFloor = 1e-12;

/// The three 2-D blocks of a vectorized frame: the two columns of the
/// shape matrix and the location.
enum class Block : int { dot = 0, ddot = 1, tdot = 2 };
inline constexpr Block kBlocks[] = {Block::dot, Block::ddot, Block::tdot};
inline constexpr int index(Block b) { return static_cast<int>(b); }

/// An affine co-variant feature: shape/orientation map `a` and location `x`.
/// Equivalent to the homogeneous matrix [[a, x], [0, 1]].
struct FeatureFrame {
  Mat2 a = Mat2::Identity();
  Vec2 x = Vec2::Zero();

  bool operator==(const FeatureFrame&) const = default;
};

/// Column-major vectorization [a11, a21, a12, a22, x1, x2].
struct FrameVec6 {
  Vec2 dot = Vec2::Zero();
  Vec2 ddot = Vec2::Zero();
  Vec2 tdot = Vec2::Zero();

  const Vec2& operator[](Block b) const;
  Vec2& operator[](Block b);
  bool operator==(const FrameVec6&) const = default;
};

/// Relative affine map between two frames, acting block-diagonally on the
/// vectorized form with the translation on the location block only.
struct RelativeTransform {
  Mat2 b = Mat2::Identity();
  Vec2 t = Vec2::Zero();
};

bool is_valid(const FeatureFrame& f, double det_floor = kDetFloor);

FrameVec6 to_vec6(const FeatureFrame& f);
FeatureFrame from_vec6(const FrameVec6& v);

/// x_frame * y_frame^{-1}. Throws SingularFrame when |det(y_frame.a)| is
/// below `det_floor`.
RelativeTransform relative_transform(const FeatureFrame& x_frame, const FeatureFrame& y_frame,
                                     double det_floor = kDetFloor);

FrameVec6 apply_transform(const RelativeTransform& t, const FrameVec6& v);

/// An ordered set of vectorized frames stored one frame per column.
class FrameSet {
 public:
  FrameSet() = default;
  explicit FrameSet(Matrix6X columns);
  explicit FrameSet(std::span<const FrameVec6> frames);

  static FrameSet from_frames(std::span<const FeatureFrame> frames);

  Eigen::Index size() const { return data_.cols(); }
  bool empty() const { return data_.cols() == 0; }

  FrameVec6 operator[](Eigen::Index i) const;
  void set(Eigen::Index i, const FrameVec6& v);

  /// 2 x size() view of one block.
  auto block(Block b) const { return data_.middleRows<2>(2 * index(b)); }
  auto block(Block b) { return data_.middleRows<2>(2 * index(b)); }

  const Matrix6X& matrix() const { return data_; }
  std::vector<FeatureFrame> frames() const;

  bool operator==(const FrameSet& o) const {
    return data_.cols() == o.data_.cols() && data_ == o.data_;
  }

 private:
  Matrix6X data_;
};

FrameSet apply_transform(const RelativeTransform& t, const FrameSet& set);

}  // namespace cfm
