#pragma once

#include <Eigen/Core>
#include <array>
#include <string_view>

#include "cfm/frame.hpp"
#include "cfm/mixture.hpp"
#include "cfm/normalize.hpp"
#include "cfm/rigid.hpp"

namespace cfm {

/// per_block: each block's kernel uses that block's own coordinates.
/// spatial_shared: all blocks use the location-block kernel.
enum class KernelMode { per_block, spatial_shared };

std::string_view to_string(KernelMode mode);
KernelMode kernel_mode_from_string(std::string_view s);

/// Displacement field T_k = Y_k + W_k G_k for each block k. W and G live in
/// the units of `norm`; nonrigid_transformed maps in and out of them.
struct NonRigidParams {
  std::array<Matrix2X, 3> w;
  std::array<Eigen::MatrixXd, 3> g;
  double beta = 2.0;
  double lambda = 3.0;
  KernelMode mode = KernelMode::per_block;
  Normalization norm;

  /// Zero coefficients with kernels built from `model`; blocks off in `mask`
  /// get neither.
  static NonRigidParams initial(const FrameSet& model, double beta, double lambda,
                                KernelMode mode = KernelMode::per_block,
                                BlockMask mask = BlockMask::all());

  /// tr(W_k G_k W_k^T) summed over blocks.
  double regularization() const;
};

struct NonRigidStep {
  NonRigidParams params;
  BlockCovariance cov;
};

/// Kernels for every block active in `mask`; inactive blocks get an empty
/// matrix.
std::array<Eigen::MatrixXd, 3> build_kernels(const FrameSet& model, double beta,
                                             KernelMode mode = KernelMode::per_block,
                                             BlockMask mask = BlockMask::all());

/// Rebuilds the kernels of every block that carries coefficients, e.g. after
/// reading a result file that omits them.
void restore_kernels(NonRigidParams& params, const FrameSet& model);

FrameSet nonrigid_transformed(const FrameSet& model, const NonRigidParams& params);

/// Solves W_k (G_k d(P1) + lambda sigma_k^2 I) = X_k P^T - Y_k d(P1) for each
/// active block, then refreshes the variances.
NonRigidStep nonrigid_m_step(const FrameSet& data, const FrameSet& model,
                             const PosteriorMatrix& post, const BlockCovariance& cov,
                             const NonRigidParams& params, BlockMask mask = BlockMask::all(),
                             double var_floor = kVarFloor,
                             double min_mass_ratio = kMinInlierMassRatio);

}  // namespace cfm
