#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "cfm/affine.hpp"
#include "cfm/frame.hpp"
#include "cfm/mixture.hpp"
#include "cfm/nonrigid.hpp"
#include "cfm/rigid.hpp"

namespace cfm {

enum class ModelKind { rigid, affine, nonrigid };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

struct EngineConfig {
  ModelKind model_kind = ModelKind::rigid;
  double omega_init = 0.1;
  double lambda = 3.0;
  double beta = 2.0;
  double match_threshold = 0.8;
  double tol = 1e-5;
  int max_iters = 150;
  /// Ablation: ignore the shape blocks, register locations only.
  bool location_only = false;
  /// Greedy uniqueness pass over the thresholded correspondences.
  bool one_to_one = false;
  KernelMode kernel_mode = KernelMode::per_block;
  double omega_lo = 1e-4;
  double omega_hi = 1.0 - 1e-4;
  double var_floor = kVarFloor;
  /// Run EM in per-block unit scale (see Normalization). Results are always
  /// reported in the caller's units.
  bool normalize = true;

  void validate() const;
  BlockMask mask() const {
    return location_only ? BlockMask::location_only() : BlockMask::all();
  }
  MixtureConfig mixture() const { return {omega_init, omega_lo, omega_hi, var_floor}; }
};

using TransformParams = std::variant<RigidParams, AffineParams, NonRigidParams>;

ModelKind kind_of(const TransformParams& t);
FrameSet transformed_model(const FrameSet& model, const TransformParams& t);

struct Correspondence {
  Eigen::Index model_index = 0;
  Eigen::Index data_index = 0;
  double posterior = 0.0;

  bool operator==(const Correspondence&) const = default;
};

enum class Status { converged, max_iters, degenerate };
std::string_view to_string(Status s);
Status status_from_string(std::string_view s);

struct MatchResult {
  std::vector<Correspondence> correspondences;
  TransformParams transform;
  PosteriorMatrix posterior;
  int iterations = 0;
  /// Objective after each E-step: negative log-likelihood, plus the
  /// lambda/2 tr(W G W^T) prior term for the non-rigid model.
  std::vector<double> q_trace;
  bool converged = false;
  Status status = Status::max_iters;
  BlockCovariance covariance;
  double omega = 0.1;
};

/// Pairs with posterior strictly above `threshold`, sorted by (model, data).
/// With `one_to_one`, pairs are taken in descending posterior order and any
/// pair reusing a model or data index is dropped.
std::vector<Correspondence> extract_correspondences(const PosteriorMatrix& post, double threshold,
                                                    bool one_to_one);

/// Fits the model set to the data set by EM under the configured model.
MatchResult register_frames(const FrameSet& data, const FrameSet& model, const EngineConfig& cfg);

}  // namespace cfm
