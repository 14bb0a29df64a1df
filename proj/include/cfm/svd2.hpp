#pragma once

#include <cmath>

#include "cfm/frame.hpp"

namespace cfm {

/// A = u * diag(s) * v^T with u, v orthogonal and s(0) >= s(1) >= 0.
struct Svd2 {
  Mat2 u;
  Vec2 s;
  Mat2 v;
};

/// Closed-form SVD of a 2x2 matrix.
Svd2 svd2(const Mat2& a);

/// Proper rotation maximizing tr(a^T r): r = u * diag(1, det(u v^T)) * v^T.
/// Returns the identity when a is exactly zero.
Mat2 optimal_rotation(const Mat2& a);

inline Mat2 rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

}  // namespace cfm
