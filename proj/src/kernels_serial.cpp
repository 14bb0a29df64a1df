#include <algorithm>
#include <cmath>
#include <limits>

#include "cfm/kernels.hpp"

namespace cfm::kernels::serial {

void posterior(const Matrix6X& data, const Matrix6X& model, const BlockWeights& w,
               double log_outlier, PosteriorBuffers& out) {
  const Eigen::Index n_data = data.cols(), n_model = model.cols();
  out.p.resize(n_model, n_data);
  out.outlier.resize(n_data);
  out.log_norm.resize(n_data);
  for (Eigen::Index n = 0; n < n_data; ++n) {
    double peak = log_outlier;
    for (Eigen::Index m = 0; m < n_model; ++m) {
      double d = 0.0;
      for (int b = 0; b < 3; ++b) {
        if (w[b] == 0.0) continue;
        d += w[b] * (data.col(n).segment<2>(2 * b) - model.col(m).segment<2>(2 * b)).squaredNorm();
      }
      out.p(m, n) = -0.5 * d;
      peak = std::max(peak, out.p(m, n));
    }
    double denom = 0.0;
    for (Eigen::Index m = 0; m < n_model; ++m) {
      out.p(m, n) = std::exp(out.p(m, n) - peak);
      denom += out.p(m, n);
    }
    const double outlier = std::exp(log_outlier - peak);
    denom += outlier;
    for (Eigen::Index m = 0; m < n_model; ++m) out.p(m, n) /= denom;
    out.outlier(n) = outlier / denom;
    out.log_norm(n) = peak + std::log(denom);
  }
}

std::array<double, 3> pair_block_sums(const Matrix6X& data, const Matrix6X& model) {
  std::array<double, 3> total{};
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    std::array<double, 3> col{};
    for (Eigen::Index m = 0; m < model.cols(); ++m)
      for (int b = 0; b < 3; ++b)
        col[b] += (data.col(n).segment<2>(2 * b) - model.col(m).segment<2>(2 * b)).squaredNorm();
    for (int b = 0; b < 3; ++b) total[b] += col[b];
  }
  return total;
}

std::array<double, 3> weighted_block_residuals(const Matrix6X& data, const Matrix6X& model,
                                               const Eigen::MatrixXd& p) {
  std::array<double, 3> total{};
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    std::array<double, 3> col{};
    for (Eigen::Index m = 0; m < model.cols(); ++m) {
      const double w = p(m, n);
      for (int b = 0; b < 3; ++b)
        col[b] += w * (data.col(n).segment<2>(2 * b) - model.col(m).segment<2>(2 * b)).squaredNorm();
    }
    for (int b = 0; b < 3; ++b) total[b] += col[b];
  }
  return total;
}

Matrix2X cross_moment(const Eigen::Ref<const Matrix2X>& x, const Eigen::MatrixXd& p) {
  Matrix2X out = Matrix2X::Zero(2, p.rows());
  for (Eigen::Index n = 0; n < x.cols(); ++n)
    for (Eigen::Index m = 0; m < p.rows(); ++m) out.col(m) += p(m, n) * x.col(n);
  return out;
}

Eigen::MatrixXd gaussian_kernel(const Eigen::Ref<const Matrix2X>& y, double beta) {
  const Eigen::Index m = y.cols();
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      g(i, j) = std::exp(-(y.col(i) - y.col(j)).squaredNorm() / (2.0 * beta));
  return g;
}

}  // namespace cfm::kernels::serial
