#pragma once

// Data-parallel inner loops shared by the E- and M-steps.
//
// Every kernel exists twice: `serial` is the plain reference used by the
// tests and benchmarks, `omp` is the OpenMP version the library calls. Both
// accumulate in the same order per output element, so results do not depend
// on the thread count.

#include <Eigen/Core>
#include <array>

#include "cfm/frame.hpp"

namespace cfm::kernels {

/// Per-block weights 1/sigma^2; a zero weight removes the block from the
/// distance.
using BlockWeights = std::array<double, 3>;

struct PosteriorBuffers {
  Eigen::MatrixXd p;            // M x N
  Eigen::VectorXd outlier;      // N
  Eigen::VectorXd log_norm;     // N, log(sum_m exp(-d_mn/2) + K)
};

namespace serial {

/// p(m,n) = exp(-d_mn/2) / (sum_m' exp(-d_m'n/2) + exp(log_outlier)).
void posterior(const Matrix6X& data, const Matrix6X& model, const BlockWeights& w,
               double log_outlier, PosteriorBuffers& out);

/// sum_{n,m} |x_n - y_m|^2 for each block.
std::array<double, 3> pair_block_sums(const Matrix6X& data, const Matrix6X& model);

/// sum_{n,m} p(m,n) |x_n - y_m|^2 for each block.
std::array<double, 3> weighted_block_residuals(const Matrix6X& data, const Matrix6X& model,
                                               const Eigen::MatrixXd& p);

/// x * p^T: 2 x M from a 2 x N block and an M x N posterior.
Matrix2X cross_moment(const Eigen::Ref<const Matrix2X>& x, const Eigen::MatrixXd& p);

/// G(i,j) = exp(-|y_i - y_j|^2 / (2 beta)).
Eigen::MatrixXd gaussian_kernel(const Eigen::Ref<const Matrix2X>& y, double beta);

}  // namespace serial

namespace omp {

void posterior(const Matrix6X& data, const Matrix6X& model, const BlockWeights& w,
               double log_outlier, PosteriorBuffers& out);
std::array<double, 3> pair_block_sums(const Matrix6X& data, const Matrix6X& model);
std::array<double, 3> weighted_block_residuals(const Matrix6X& data, const Matrix6X& model,
                                               const Eigen::MatrixXd& p);
Matrix2X cross_moment(const Eigen::Ref<const Matrix2X>& x, const Eigen::MatrixXd& p);
Eigen::MatrixXd gaussian_kernel(const Eigen::Ref<const Matrix2X>& y, double beta);

}  // namespace omp

using omp::cross_moment;
using omp::gaussian_kernel;
using omp::pair_block_sums;
using omp::posterior;
using omp::weighted_block_residuals;

}  // namespace cfm::kernels
