#pragma once

// File formats.
//
// Frame sets and ground-truth pairs are line-oriented text with a leading
// "<magic> <version>" line so they diff cleanly. Reals are written in the
// shortest form that reads back bit-exactly. Result files are JSON.
//
//   cfm-frames 1
//   units px
//   count 2
//   # a11 a21 a12 a22 x y
//   1 0 0 1 3 4
//   ...
//
//   cfm-truth 1
//   count 2
//   # model_index data_index
//   0 0
//   ...

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfm/engine.hpp"
#include "cfm/metrics.hpp"
#include "cfm/synth.hpp"

namespace cfm::io {

inline constexpr int kFrameFormatVersion = 1;
inline constexpr int kTruthFormatVersion = 1;
inline constexpr int kResultFormatVersion = 1;

struct FrameSetFile {
  std::string units = "px";
  FrameSet frames;

  bool operator==(const FrameSetFile&) const = default;
};

void write_frames(std::ostream& os, const FrameSetFile& file);
FrameSetFile read_frames(std::istream& is);

void write_truth(std::ostream& os, const std::vector<IndexPair>& pairs);
std::vector<IndexPair> read_truth(std::istream& is);

/// What a match run persists: the posterior matrix and the non-rigid kernel
/// matrices are omitted (kernels are a function of the model set, beta and
/// the kernel mode).
struct ResultFile {
  EngineConfig config;
  TransformParams transform;
  std::vector<Correspondence> correspondences;
  std::vector<double> q_trace;
  int iterations = 0;
  bool converged = false;
  Status status = Status::max_iters;
  double omega = 0.1;
  BlockCovariance covariance;
};

ResultFile make_result_file(const MatchResult& res, const EngineConfig& cfg);

std::string write_result(const ResultFile& r);
ResultFile read_result(const std::string& text);

bool same_result(const ResultFile& a, const ResultFile& b);

/// One benchmark row: a batch at one outlier ratio.
struct BenchRow {
  double ratio = 0.0;
  BatchSummary summary;
};

/// Header: ratio,f1_mean,f1_var,precision_mean,recall_mean,iters_mean,
/// iters_var,time_mean,failures,mode
inline constexpr const char* kBenchHeader =
    "ratio,f1_mean,f1_var,precision_mean,recall_mean,iters_mean,iters_var,time_mean,failures,mode";

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

/// Bench rows as plain numbers, for reading CSVs back.
struct BenchRecord {
  double ratio, f1_mean, f1_var, precision_mean, recall_mean, iters_mean, iters_var, time_mean;
  int failures;
  std::string mode;
  bool operator==(const BenchRecord&) const = default;
};
std::vector<BenchRecord> read_bench_csv(std::istream& is);

std::string format_real(double v);

// File helpers; throw ParseError / Error with the path in the message.
FrameSetFile load_frames(const std::filesystem::path& p);
void save_frames(const std::filesystem::path& p, const FrameSetFile& f);
std::vector<IndexPair> load_truth(const std::filesystem::path& p);
void save_truth(const std::filesystem::path& p, const std::vector<IndexPair>& pairs);

}  // namespace cfm::io
