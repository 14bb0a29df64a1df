#include "cfm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "cfm/error.hpp"

namespace cfm {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::rigid:
      return "rigid";
    case ModelKind::affine:
      return "affine";
    default:
      return "nonrigid";
  }
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "rigid") return ModelKind::rigid;
  if (s == "affine") return ModelKind::affine;
  if (s == "nonrigid") return ModelKind::nonrigid;
  throw InvalidArgument("unknown model kind '" + std::string(s) + "'");
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged:
      return "converged";
    case Status::max_iters:
      return "max_iters";
    default:
      return "degenerate";
  }
}

Status status_from_string(std::string_view s) {
  if (s == "converged") return Status::converged;
  if (s == "max_iters") return Status::max_iters;
  if (s == "degenerate") return Status::degenerate;
  throw InvalidArgument("unknown status '" + std::string(s) + "'");
}

void EngineConfig::validate() const {
  if (!(match_threshold > 0.0 && match_threshold < 1.0))
    throw InvalidArgument("EngineConfig: match_threshold must lie in (0, 1)");
  if (!(tol > 0.0)) throw InvalidArgument("EngineConfig: tol must be positive");
  if (max_iters < 1) throw InvalidArgument("EngineConfig: max_iters must be at least 1");
  if (!(lambda > 0.0)) throw InvalidArgument("EngineConfig: lambda must be positive");
  if (!(beta > 0.0)) throw InvalidArgument("EngineConfig: beta must be positive");
  mixture().validate();
}

ModelKind kind_of(const TransformParams& t) { return static_cast<ModelKind>(t.index()); }

FrameSet transformed_model(const FrameSet& model, const TransformParams& t) {
  if (const auto* r = std::get_if<RigidParams>(&t)) return apply_transform(r->as_transform(), model);
  if (const auto* a = std::get_if<AffineParams>(&t)) return apply_transform(a->as_transform(), model);
  return nonrigid_transformed(model, std::get<NonRigidParams>(t));
}

std::vector<Correspondence> extract_correspondences(const PosteriorMatrix& post, double threshold,
                                                    bool one_to_one) {
  std::vector<Correspondence> found;
  for (Eigen::Index n = 0; n < post.p.cols(); ++n)
    for (Eigen::Index m = 0; m < post.p.rows(); ++m)
      if (post.p(m, n) > threshold) found.push_back({m, n, post.p(m, n)});

  const auto by_index = [](const Correspondence& a, const Correspondence& b) {
    return a.model_index != b.model_index ? a.model_index < b.model_index
                                          : a.data_index < b.data_index;
  };
  if (one_to_one) {
    std::stable_sort(found.begin(), found.end(), [&](const auto& a, const auto& b) {
      return a.posterior != b.posterior ? a.posterior > b.posterior : by_index(a, b);
    });
    std::vector<bool> model_used(static_cast<std::size_t>(post.p.rows()));
    std::vector<bool> data_used(static_cast<std::size_t>(post.p.cols()));
    std::vector<Correspondence> kept;
    for (const auto& c : found) {
      const auto m = static_cast<std::size_t>(c.model_index);
      const auto n = static_cast<std::size_t>(c.data_index);
      if (model_used[m] || data_used[n]) continue;
      model_used[m] = true;
      data_used[n] = true;
      kept.push_back(c);
    }
    found = std::move(kept);
  }
  std::sort(found.begin(), found.end(), by_index);
  return found;
}

namespace {

TransformParams initial_params(const FrameSet& model, const EngineConfig& cfg) {
  switch (cfg.model_kind) {
    case ModelKind::rigid:
      return RigidParams{};
    case ModelKind::affine:
      return AffineParams{};
    default:
      return NonRigidParams::initial(model, cfg.beta, cfg.lambda, cfg.kernel_mode, cfg.mask());
  }
}

double prior_energy(const TransformParams& t) {
  const auto* nr = std::get_if<NonRigidParams>(&t);
  return nr ? 0.5 * nr->lambda * nr->regularization() : 0.0;
}

MatchResult run_em(const FrameSet& data, const FrameSet& model, const EngineConfig& cfg) {
  const BlockMask mask = cfg.mask();
  MixtureConfig mix = cfg.mixture();

  MatchResult res;
  res.transform = initial_params(model, cfg);
  res.covariance = init_covariance(data, model, cfg.var_floor);
  FrameSet moved = transformed_model(model, res.transform);

  while (true) {
    res.posterior = e_step(data, moved, res.covariance, mix, mask);
    res.q_trace.push_back(res.posterior.neg_log_likelihood + prior_energy(res.transform));
    const auto t = res.q_trace.size();
    if (t >= 2 && std::abs(res.q_trace[t - 1] - res.q_trace[t - 2]) < cfg.tol) {
      res.status = Status::converged;
      break;
    }
    if (res.iterations >= cfg.max_iters) {
      res.status = Status::max_iters;
      break;
    }

    try {
      const double omega = update_omega(res.posterior, data.size(), mix);
      if (auto* r = std::get_if<RigidParams>(&res.transform)) {
        auto step = rigid_m_step(data, model, res.posterior, res.covariance, mask, cfg.var_floor);
        *r = step.params;
        res.covariance = step.cov;
      } else if (auto* a = std::get_if<AffineParams>(&res.transform)) {
        auto step = affine_m_step(data, model, res.posterior, res.covariance, mask, cfg.var_floor);
        *a = step.params;
        res.covariance = step.cov;
      } else {
        auto& nr = std::get<NonRigidParams>(res.transform);
        auto step = nonrigid_m_step(data, model, res.posterior, res.covariance, nr, mask,
                                    cfg.var_floor);
        nr = std::move(step.params);
        res.covariance = step.cov;
      }
      mix.omega = omega;
    } catch (const DegenerateResponsibility&) {
      res.status = Status::degenerate;
      break;
    }
    moved = transformed_model(model, res.transform);
    ++res.iterations;
  }

  res.converged = res.status == Status::converged;
  res.omega = mix.omega;
  return res;
}

}  // namespace

MatchResult register_frames(const FrameSet& data, const FrameSet& model, const EngineConfig& cfg) {
  if (data.empty() || model.empty())
    throw InvalidArgument("register_frames: frame sets must be non-empty");
  cfg.validate();

  MatchResult res;
  if (!cfg.normalize) {
    res = run_em(data, model, cfg);
  } else {
    const Normalization norm = Normalization::fit(data, model);
    res = run_em(norm.data_to_unit(data), norm.model_to_unit(model), cfg);
    res.covariance = norm.covariance_to_data(res.covariance);
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NonRigidParams>)
            p.norm = norm;
          else
            p = norm.to_data(p);
        },
        res.transform);
  }
  res.correspondences =
      extract_correspondences(res.posterior, cfg.match_threshold, cfg.one_to_one);
  return res;
}

}  // namespace cfm
