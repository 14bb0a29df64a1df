#pragma once

#include <span>
#include <vector>

#include "cfm/engine.hpp"
#include "cfm/synth.hpp"

namespace cfm {

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int true_pos = 0;
  int false_pos = 0;
  int false_neg = 0;
  int iterations = 0;
  double wall_time = 0.0;  // seconds spent in register_frames
  Status status = Status::converged;
};

/// Empty denominators give 0 rather than NaN.
EvalReport evaluate(std::span<const Correspondence> found, std::span<const IndexPair> truth);

struct Stat {
  double mean = 0.0;
  double variance = 0.0;  // population variance over trials
};

Stat summarize(std::span<const double> values);

struct BatchSummary {
  Stat f1, precision, recall, iterations, wall_time;
  int trial_count = 0;
  /// Trials that ended on a degenerate posterior; still included above.
  int failures = 0;
  SceneSpec spec;
  EngineConfig config;
  std::vector<EvalReport> trials;
};

/// Trial i uses seed spec.seed + i.
BatchSummary run_batch(const SceneSpec& spec, const EngineConfig& cfg, int trials);

}  // namespace cfm
