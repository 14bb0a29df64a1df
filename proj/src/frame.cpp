#include "cfm/frame.hpp"

#include <cmath>
#include <string>

#include "cfm/error.hpp"

namespace cfm {

const Vec2& FrameVec6::operator[](Block b) const {
  switch (b) {
    case Block::dot:
      return dot;
    case Block::ddot:
      return ddot;
    default:
      return tdot;
  }
}

Vec2& FrameVec6::operator[](Block b) {
  return const_cast<Vec2&>(static_cast<const FrameVec6&>(*this)[b]);
}

bool is_valid(const FeatureFrame& f, double det_floor) {
  return f.a.allFinite() && f.x.allFinite() && std::abs(f.a.determinant()) > det_floor;
}

FrameVec6 to_vec6(const FeatureFrame& f) { return {f.a.col(0), f.a.col(1), f.x}; }

FeatureFrame from_vec6(const FrameVec6& v) {
  FeatureFrame f;
  f.a.col(0) = v.dot;
  f.a.col(1) = v.ddot;
  f.x = v.tdot;
  return f;
}

RelativeTransform relative_transform(const FeatureFrame& x_frame, const FeatureFrame& y_frame,
                                     double det_floor) {
  const double det = y_frame.a.determinant();
  if (!(std::abs(det) >= det_floor)) {
    throw SingularFrame("relative_transform: model frame has |det(a)| = " +
                        std::to_string(std::abs(det)));
  }
  RelativeTransform out;
  out.b = x_frame.a * y_frame.a.inverse();
  out.t = x_frame.x - out.b * y_frame.x;
  return out;
}

FrameVec6 apply_transform(const RelativeTransform& t, const FrameVec6& v) {
  return {t.b * v.dot, t.b * v.ddot, t.b * v.tdot + t.t};
}

FrameSet::FrameSet(Matrix6X columns) : data_(std::move(columns)) {
  if (data_.cols() == 0) throw InvalidArgument("FrameSet: a frame set needs at least one frame");
}

FrameSet::FrameSet(std::span<const FrameVec6> frames) {
  if (frames.empty()) throw InvalidArgument("FrameSet: a frame set needs at least one frame");
  data_.resize(6, static_cast<Eigen::Index>(frames.size()));
  for (Eigen::Index i = 0; i < data_.cols(); ++i) set(i, frames[static_cast<std::size_t>(i)]);
}

FrameSet FrameSet::from_frames(std::span<const FeatureFrame> frames) {
  std::vector<FrameVec6> v;
  v.reserve(frames.size());
  for (const auto& f : frames) v.push_back(to_vec6(f));
  return FrameSet(std::span<const FrameVec6>(v));
}

FrameVec6 FrameSet::operator[](Eigen::Index i) const {
  return {data_.col(i).segment<2>(0), data_.col(i).segment<2>(2), data_.col(i).segment<2>(4)};
}

void FrameSet::set(Eigen::Index i, const FrameVec6& v) {
  data_.col(i).segment<2>(0) = v.dot;
  data_.col(i).segment<2>(2) = v.ddot;
  data_.col(i).segment<2>(4) = v.tdot;
}

std::vector<FeatureFrame> FrameSet::frames() const {
  std::vector<FeatureFrame> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) out.push_back(from_vec6((*this)[i]));
  return out;
}

FrameSet apply_transform(const RelativeTransform& t, const FrameSet& set) {
  Matrix6X out(6, set.size());
  for (Block b : kBlocks) out.middleRows<2>(2 * index(b)) = t.b * set.block(b);
  out.middleRows<2>(4).colwise() += t.t;
  return FrameSet(std::move(out));
}

}  // namespace cfm
