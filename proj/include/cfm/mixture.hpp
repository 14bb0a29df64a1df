#pragma once

#include <Eigen/Core>
#include <array>

#include "cfm/frame.hpp"

namespace cfm {

inline constexpr double kVarFloor = 1e-10;

/// Which blocks take part in distances, solves and variance updates.
/// The location-only ablation keeps just the tdot block.
struct BlockMask {
  std::array<bool, 3> on{true, true, true};

  static BlockMask all() { return {}; }
  static BlockMask location_only() { return {{false, false, true}}; }

  bool operator[](Block b) const { return on[static_cast<std::size_t>(index(b))]; }
  /// Dimension of the active subspace (D = 6 for the full model).
  int dims() const { return 2 * (int(on[0]) + int(on[1]) + int(on[2])); }
};

/// Isotropic variance per 2-D block: Sigma = diag(v0 I, v1 I, v2 I).
struct BlockCovariance {
  std::array<double, 3> var{1.0, 1.0, 1.0};

  double operator[](Block b) const { return var[static_cast<std::size_t>(index(b))]; }
  double& operator[](Block b) { return var[static_cast<std::size_t>(index(b))]; }
  bool operator==(const BlockCovariance&) const = default;
};

struct MixtureConfig {
  double omega = 0.1;
  double omega_lo = 1e-4;
  double omega_hi = 1.0 - 1e-4;
  double var_floor = kVarFloor;

  void validate() const;
};

/// Responsibilities of the M model centroids for the N data points, plus
/// the mass taken by the uniform outlier component.
struct PosteriorMatrix {
  Eigen::MatrixXd p;             // M x N
  Eigen::VectorXd outlier_mass;  // N
  /// Incomplete-data negative log-likelihood of the parameters the
  /// posterior was computed under.
  double neg_log_likelihood = 0.0;

  double inlier_mass() const { return p.sum(); }
  Eigen::VectorXd model_mass() const { return p.rowwise().sum(); }   // P 1
  Eigen::VectorXd data_mass() const { return p.colwise().sum().transpose(); }  // P^T 1
};

/// Per block: (1 / 2NM) sum_{n,m} |x_n - y_m|^2, floored.
BlockCovariance init_covariance(const FrameSet& data, const FrameSet& model,
                                double var_floor = kVarFloor);

/// log of (2 pi)^{D/2} |Sigma|^{1/2} * omega / (1 - omega) * M / N.
double log_outlier_constant(const BlockCovariance& cov, double omega, Eigen::Index n_model,
                            Eigen::Index n_data, BlockMask mask = BlockMask::all());

PosteriorMatrix e_step(const FrameSet& data, const FrameSet& transformed_model,
                       const BlockCovariance& cov, const MixtureConfig& cfg,
                       BlockMask mask = BlockMask::all());

/// Expected complete-data negative log-likelihood for fixed responsibilities.
double q_value(const FrameSet& data, const FrameSet& transformed_model,
               const PosteriorMatrix& post, const BlockCovariance& cov, const MixtureConfig& cfg,
               BlockMask mask = BlockMask::all());

/// clamp((N - N_p) / N, omega bounds).
double update_omega(const PosteriorMatrix& post, Eigen::Index n_data, const MixtureConfig& cfg);

/// sigma^2 = residual / (2 N_p), floored.
double block_variance(double weighted_residual, double inlier_mass, double var_floor);

}  // namespace cfm
