#include "cfm/svd2.hpp"

#include <cmath>

namespace cfm {

// Writes a = [[a00, a01], [a10, a11]] as R(phi) * diag(q + r, q - r) * R(theta)
// using the similarity/anti-similarity split of the matrix.
Svd2 svd2(const Mat2& a) {
  const double e = 0.5 * (a(0, 0) + a(1, 1));
  const double f = 0.5 * (a(0, 0) - a(1, 1));
  const double g = 0.5 * (a(1, 0) + a(0, 1));
  const double h = 0.5 * (a(1, 0) - a(0, 1));
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  const double a1 = std::atan2(g, f);
  const double a2 = std::atan2(h, e);
  const double theta = 0.5 * (a2 - a1);
  const double phi = 0.5 * (a2 + a1);

  Svd2 out;
  out.u = rotation(phi);
  out.v = rotation(-theta);
  out.s << q + r, q - r;
  if (out.s(1) < 0.0) {
    out.s(1) = -out.s(1);
    out.u.col(1) = -out.u.col(1);
  }
  return out;
}

Mat2 optimal_rotation(const Mat2& a) {
  if (a.isZero(0.0)) return Mat2::Identity();
  const Svd2 d = svd2(a);
  const double det_uv = (d.u * d.v.transpose()).determinant();
  Mat2 c = Mat2::Identity();
  c(1, 1) = det_uv < 0.0 ? -1.0 : 1.0;
  return d.u * c * d.v.transpose();
}

}  // namespace cfm
