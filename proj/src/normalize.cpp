#include "cfm/normalize.hpp"

#include <cmath>

#include "cfm/affine.hpp"
#include "cfm/rigid.hpp"

namespace cfm {

Normalization Normalization::fit(const FrameSet& data, const FrameSet& model) {
  Normalization out;
  out.data_mean = data.block(Block::tdot).rowwise().mean();
  out.model_mean = model.block(Block::tdot).rowwise().mean();
  const double count = double(data.size() + model.size());
  for (Block b : kBlocks) {
    double sum = 0.0;
    if (b == Block::tdot) {
      sum = (data.block(b).colwise() - out.data_mean).squaredNorm() +
            (model.block(b).colwise() - out.model_mean).squaredNorm();
    } else {
      sum = data.block(b).squaredNorm() + model.block(b).squaredNorm();
    }
    const double c = std::sqrt(sum / count / kUnitMeanSquare);
    out.scale[static_cast<std::size_t>(index(b))] = c > 0.0 && std::isfinite(c) ? c : 1.0;
  }
  return out;
}

bool Normalization::is_identity() const {
  return scale == std::array<double, 3>{1.0, 1.0, 1.0} && data_mean.isZero(0.0) &&
         model_mean.isZero(0.0);
}

namespace {

FrameSet to_unit(const FrameSet& set, const Vec2& mean, const std::array<double, 3>& scale) {
  Matrix6X m = set.matrix();
  m.middleRows<2>(2 * index(Block::tdot)).colwise() -= mean;
  for (Block b : kBlocks) m.middleRows<2>(2 * index(b)) /= scale[static_cast<std::size_t>(index(b))];
  return FrameSet(std::move(m));
}

}  // namespace

FrameSet Normalization::data_to_unit(const FrameSet& data) const {
  return to_unit(data, data_mean, scale);
}

FrameSet Normalization::model_to_unit(const FrameSet& model) const {
  return to_unit(model, model_mean, scale);
}

FrameSet Normalization::unit_to_data(const FrameSet& unit) const {
  Matrix6X m = unit.matrix();
  for (Block b : kBlocks) m.middleRows<2>(2 * index(b)) *= scale[static_cast<std::size_t>(index(b))];
  m.middleRows<2>(2 * index(Block::tdot)).colwise() += data_mean;
  return FrameSet(std::move(m));
}

BlockCovariance Normalization::covariance_to_data(const BlockCovariance& cov) const {
  BlockCovariance out = cov;
  for (std::size_t k = 0; k < 3; ++k) out.var[k] *= scale[k] * scale[k];
  return out;
}

// x = c x' + mu_x and y' = (y - mu_y) / c with x' = L y' + t' give
// x = L y + (c t' + mu_x - L mu_y).
RigidParams Normalization::to_data(const RigidParams& unit) const {
  RigidParams out = unit;
  out.t = scale[2] * unit.t + data_mean - unit.s * unit.r * model_mean;
  return out;
}

AffineParams Normalization::to_data(const AffineParams& unit) const {
  AffineParams out = unit;
  out.t = scale[2] * unit.t + data_mean - unit.b * model_mean;
  return out;
}

}  // namespace cfm
