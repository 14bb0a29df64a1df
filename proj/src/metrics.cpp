#include "cfm/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "cfm/error.hpp"

namespace cfm {

EvalReport evaluate(std::span<const Correspondence> found, std::span<const IndexPair> truth) {
  const std::set<IndexPair> truth_set(truth.begin(), truth.end());
  std::set<IndexPair> found_set;
  for (const auto& c : found) found_set.emplace(c.model_index, c.data_index);

  EvalReport r;
  for (const auto& p : found_set) r.true_pos += truth_set.count(p) ? 1 : 0;
  r.false_pos = static_cast<int>(found_set.size()) - r.true_pos;
  r.false_neg = static_cast<int>(truth_set.size()) - r.true_pos;
  if (!found_set.empty()) r.precision = double(r.true_pos) / double(found_set.size());
  if (!truth_set.empty()) r.recall = double(r.true_pos) / double(truth_set.size());
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

Stat summarize(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= double(values.size());
  for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
  s.variance /= double(values.size());
  return s;
}

BatchSummary run_batch(const SceneSpec& spec, const EngineConfig& cfg, int trials) {
  if (trials < 1) throw InvalidArgument("run_batch: trials must be at least 1");
  spec.validate();
  cfg.validate();

  BatchSummary out;
  out.spec = spec;
  out.config = cfg;
  out.trial_count = trials;
  out.trials.resize(static_cast<std::size_t>(trials));

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < trials; ++i) {
    SceneSpec trial_spec = spec;
    trial_spec.seed = spec.seed + static_cast<std::uint64_t>(i);
    const Scene scene = generate(trial_spec);
    const auto start = std::chrono::steady_clock::now();
    const MatchResult res = register_frames(scene.data, scene.model, cfg);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    EvalReport rep = evaluate(res.correspondences, scene.ground_truth);
    rep.iterations = res.iterations;
    rep.wall_time = elapsed.count();
    rep.status = res.status;
    out.trials[static_cast<std::size_t>(i)] = rep;
  }

  std::vector<double> f1, precision, recall, iters, times;
  for (const auto& t : out.trials) {
    f1.push_back(t.f1);
    precision.push_back(t.precision);
    recall.push_back(t.recall);
    iters.push_back(t.iterations);
    times.push_back(t.wall_time);
    if (t.status == Status::degenerate) ++out.failures;
  }
  out.f1 = summarize(f1);
  out.precision = summarize(precision);
  out.recall = summarize(recall);
  out.iterations = summarize(iters);
  out.wall_time = summarize(times);
  return out;
}

}  // namespace cfm
