#include "cfm/nonrigid.hpp"

#include <Eigen/LU>
#include <string>

#include "cfm/error.hpp"
#include "cfm/kernels.hpp"
#include "moments.hpp"

namespace cfm {

std::string_view to_string(KernelMode mode) {
  return mode == KernelMode::per_block ? "per_block" : "spatial_shared";
}

KernelMode kernel_mode_from_string(std::string_view s) {
  if (s == "per_block") return KernelMode::per_block;
  if (s == "spatial_shared") return KernelMode::spatial_shared;
  throw InvalidArgument("unknown kernel mode '" + std::string(s) + "'");
}

std::array<Eigen::MatrixXd, 3> build_kernels(const FrameSet& model, double beta, KernelMode mode,
                                             BlockMask mask) {
  if (!(beta > 0.0)) throw InvalidArgument("build_kernels: beta must be positive");
  std::array<Eigen::MatrixXd, 3> g;
  if (mode == KernelMode::spatial_shared) {
    const Eigen::MatrixXd shared = kernels::gaussian_kernel(model.block(Block::tdot), beta);
    for (Block b : kBlocks)
      if (mask[b]) g[static_cast<std::size_t>(index(b))] = shared;
    return g;
  }
  for (Block b : kBlocks)
    if (mask[b]) g[static_cast<std::size_t>(index(b))] = kernels::gaussian_kernel(model.block(b), beta);
  return g;
}

NonRigidParams NonRigidParams::initial(const FrameSet& model, double beta, double lambda,
                                       KernelMode mode, BlockMask mask) {
  if (!(lambda > 0.0)) throw InvalidArgument("NonRigidParams: lambda must be positive");
  NonRigidParams p;
  p.beta = beta;
  p.lambda = lambda;
  p.mode = mode;
  p.g = build_kernels(model, beta, mode, mask);
  for (std::size_t k = 0; k < 3; ++k)
    if (mask.on[k]) p.w[k] = Matrix2X::Zero(2, model.size());
  return p;
}

double NonRigidParams::regularization() const {
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (g[k].size() == 0 || w[k].size() == 0) continue;
    total += (w[k] * g[k] * w[k].transpose()).trace();
  }
  return total;
}

void restore_kernels(NonRigidParams& params, const FrameSet& model) {
  BlockMask mask;
  for (std::size_t k = 0; k < 3; ++k) mask.on[k] = params.w[k].size() > 0;
  const FrameSet unit = params.norm.is_identity() ? model : params.norm.model_to_unit(model);
  params.g = build_kernels(unit, params.beta, params.mode, mask);
}

FrameSet nonrigid_transformed(const FrameSet& model, const NonRigidParams& params) {
  const bool unit = params.norm.is_identity();
  Matrix6X out = unit ? model.matrix() : params.norm.model_to_unit(model).matrix();
  for (Block b : kBlocks) {
    const auto k = static_cast<std::size_t>(index(b));
    if (params.g[k].size() == 0 || params.w[k].size() == 0) continue;
    out.middleRows<2>(2 * index(b)) += params.w[k] * params.g[k];
  }
  if (unit) return FrameSet(std::move(out));
  return params.norm.unit_to_data(FrameSet(std::move(out)));
}

NonRigidStep nonrigid_m_step(const FrameSet& data, const FrameSet& model,
                             const PosteriorMatrix& post, const BlockCovariance& cov,
                             const NonRigidParams& params, BlockMask mask, double var_floor,
                             double min_mass_ratio) {
  const double np = detail::checked_inlier_mass(post, data.size(), min_mass_ratio);
  const Eigen::VectorXd row = post.model_mass();
  const Eigen::Index m = model.size();

  NonRigidStep out{params, cov};
  for (Block b : kBlocks) {
    if (!mask[b]) continue;
    const auto k = static_cast<std::size_t>(index(b));
    const Eigen::MatrixXd& g = params.g[k];
    if (g.rows() != m) throw InvalidArgument("nonrigid_m_step: kernel does not match model size");
    // Transposed system: (d(P1) G + lambda sigma^2 I) W^T = (X P^T - Y d(P1))^T.
    Eigen::MatrixXd lhs = row.asDiagonal() * g;
    lhs.diagonal().array() += params.lambda * cov[b];
    const Matrix2X rhs = kernels::cross_moment(data.block(b), post.p) -
                         model.block(b) * row.asDiagonal();
    out.params.w[k] = Eigen::PartialPivLU<Eigen::MatrixXd>(lhs).solve(rhs.transpose()).transpose();
  }

  const FrameSet moved = nonrigid_transformed(model, out.params);
  out.cov = detail::refreshed_covariance(data, moved, post, np, cov, mask, var_floor);
  return out;
}

}  // namespace cfm
