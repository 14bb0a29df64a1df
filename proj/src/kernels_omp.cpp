#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfm/kernels.hpp"

namespace cfm::kernels::omp {

namespace {

// Column partials are reduced serially in index order so the result is the
// same for any thread count.
std::array<double, 3> reduce(const std::vector<std::array<double, 3>>& partial) {
  std::array<double, 3> total{};
  for (const auto& col : partial)
    for (int b = 0; b < 3; ++b) total[b] += col[b];
  return total;
}

}  // namespace

void posterior(const Matrix6X& data, const Matrix6X& model, const BlockWeights& w,
               double log_outlier, PosteriorBuffers& out) {
  const Eigen::Index n_data = data.cols(), n_model = model.cols();
  out.p.resize(n_model, n_data);
  out.outlier.resize(n_data);
  out.log_norm.resize(n_data);
#pragma omp parallel for schedule(static)
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
  std::vector<std::array<double, 3>> partial(static_cast<std::size_t>(data.cols()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    std::array<double, 3> col{};
    for (Eigen::Index m = 0; m < model.cols(); ++m)
      for (int b = 0; b < 3; ++b)
        col[b] += (data.col(n).segment<2>(2 * b) - model.col(m).segment<2>(2 * b)).squaredNorm();
    partial[static_cast<std::size_t>(n)] = col;
  }
  return reduce(partial);
}

std::array<double, 3> weighted_block_residuals(const Matrix6X& data, const Matrix6X& model,
                                               const Eigen::MatrixXd& p) {
  std::vector<std::array<double, 3>> partial(static_cast<std::size_t>(data.cols()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    std::array<double, 3> col{};
    for (Eigen::Index m = 0; m < model.cols(); ++m) {
      const double w = p(m, n);
      for (int b = 0; b < 3; ++b)
        col[b] += w * (data.col(n).segment<2>(2 * b) - model.col(m).segment<2>(2 * b)).squaredNorm();
    }
    partial[static_cast<std::size_t>(n)] = col;
  }
  return reduce(partial);
}

Matrix2X cross_moment(const Eigen::Ref<const Matrix2X>& x, const Eigen::MatrixXd& p) {
  const Eigen::Index n_model = p.rows();
  Matrix2X out = Matrix2X::Zero(2, n_model);
#pragma omp parallel
  {
    // Each thread owns a contiguous range of output columns and walks n in
    // order, matching the serial accumulation order per column.
    const Eigen::Index threads = omp_get_num_threads();
    const Eigen::Index tid = omp_get_thread_num();
    const Eigen::Index chunk = (n_model + threads - 1) / threads;
    const Eigen::Index lo = std::min(n_model, tid * chunk);
    const Eigen::Index hi = std::min(n_model, lo + chunk);
    for (Eigen::Index n = 0; n < x.cols(); ++n)
      for (Eigen::Index m = lo; m < hi; ++m) out.col(m) += p(m, n) * x.col(n);
  }
  return out;
}

Eigen::MatrixXd gaussian_kernel(const Eigen::Ref<const Matrix2X>& y, double beta) {
  const Eigen::Index m = y.cols();
  Eigen::MatrixXd g(m, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      g(i, j) = std::exp(-(y.col(i) - y.col(j)).squaredNorm() / (2.0 * beta));
  return g;
}

}  // namespace cfm::kernels::omp
