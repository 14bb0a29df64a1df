// cfm: register feature-frame sets, generate synthetic scenes, sweep outlier
// ratios.
//
//   cfm match DATA MODEL [--model rigid|affine|nonrigid] [--out result.json]
//   cfm synth PREFIX --n 200 --outliers 0.35 --kind rigid --seed 7
//   cfm bench-outliers --kind rigid --ratios 0.15,0.25 --trials 30 --baseline
//
// Exit codes: 0 converged (or success), 2 iteration cap reached, 3 degenerate
// posterior, 1 bad input or flags.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cfm/engine.hpp"
#include "cfm/error.hpp"
#include "cfm/io.hpp"
#include "cfm/metrics.hpp"
#include "cfm/svd2.hpp"
#include "cfm/synth.hpp"

namespace {

using namespace cfm;

constexpr int kExitInput = 1;

int exit_code(Status s) {
  switch (s) {
    case Status::converged:
      return 0;
    case Status::max_iters:
      return 2;
    default:
      return 3;
  }
}

struct EngineFlags {
  EngineConfig cfg;
  std::string model = "rigid";
  std::string kernel_mode = "per_block";
  bool no_normalize = false;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "rigid, affine or nonrigid")->capture_default_str();
    app->add_option("--omega", cfg.omega_init, "initial outlier weight")->capture_default_str();
    app->add_option("--lambda", cfg.lambda, "non-rigid smoothness weight")->capture_default_str();
    app->add_option("--beta", cfg.beta, "non-rigid kernel width")->capture_default_str();
    app->add_option("--threshold", cfg.match_threshold, "posterior needed to report a match")
        ->capture_default_str();
    app->add_option("--tol", cfg.tol, "stop when the objective moves less than this")
        ->capture_default_str();
    app->add_option("--max-iters", cfg.max_iters)->capture_default_str();
    app->add_flag("--location-only", cfg.location_only, "ignore the shape blocks");
    app->add_flag("--one-to-one", cfg.one_to_one, "keep at most one match per frame");
    app->add_option("--kernel-mode", kernel_mode, "per_block or spatial_shared")
        ->capture_default_str();
    app->add_flag("--no-normalize", no_normalize, "run EM in the input units");
  }

  EngineConfig resolve() {
    cfg.model_kind = model_kind_from_string(model);
    cfg.kernel_mode = kernel_mode_from_string(kernel_mode);
    cfg.normalize = !no_normalize;
    cfg.validate();
    return cfg;
  }
};

struct MatchCmd {
  std::string data_path, model_path, out_path;
  EngineFlags engine;

  int run() {
    const EngineConfig cfg = engine.resolve();
    const auto data = io::load_frames(data_path);
    const auto model = io::load_frames(model_path);
    const MatchResult res = register_frames(data.frames, model.frames, cfg);
    const std::string text = io::write_result(io::make_result_file(res, cfg));
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream os(out_path, std::ios::binary);
      if (!(os << text)) throw Error("cannot write " + out_path);
      std::cout << "status " << to_string(res.status) << ", " << res.iterations << " iterations, "
                << res.correspondences.size() << " matches -> " << out_path << "\n";
    }
    return exit_code(res.status);
  }
};

struct SynthCmd {
  std::string prefix;
  std::string kind = "rigid";
  int n = 200;
  double outliers = 0.0;
  std::uint64_t seed = 0;
  double theta_deg = 0.0, scale = 1.0, tx = 0.0, ty = 0.0;
  std::vector<double> affine{1.0, 0.0, 0.0, 1.0};
  double amplitude = 0.2, frequency = 1.0, linear = 0.0;
  double noise = 0.0;
  std::optional<double> noise_shape, noise_loc;

  void attach(CLI::App* app) {
    app->add_option("prefix", prefix, "writes PREFIX.model, PREFIX.data and PREFIX.truth")
        ->required();
    app->add_option("--kind", kind, "rigid, affine or nonrigid")->capture_default_str();
    app->add_option("--n", n, "inlier count")->capture_default_str();
    app->add_option("--outliers", outliers, "outlier ratio in [0, 1)")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--theta", theta_deg, "rigid rotation, degrees")->capture_default_str();
    app->add_option("--scale", scale, "rigid scale")->capture_default_str();
    app->add_option("--tx", tx, "translation x (rigid, affine)")->capture_default_str();
    app->add_option("--ty", ty, "translation y (rigid, affine)")->capture_default_str();
    app->add_option("--affine", affine, "affine matrix b11 b12 b21 b22")->expected(4);
    app->add_option("--amplitude", amplitude, "warp amplitude")->capture_default_str();
    app->add_option("--frequency", frequency, "warp frequency")->capture_default_str();
    app->add_option("--linear", linear, "warp linear term")->capture_default_str();
    app->add_option("--noise", noise, "noise sigma for every block")->capture_default_str();
    app->add_option("--noise-shape", noise_shape, "overrides --noise for the shape blocks");
    app->add_option("--noise-loc", noise_loc, "overrides --noise for the location block");
  }

  SceneSpec spec() const {
    SceneSpec s;
    s.n_inliers = n;
    s.outlier_ratio = outliers;
    s.kind = model_kind_from_string(kind);
    s.seed = seed;
    const double shape = noise_shape.value_or(noise);
    s.noise_sigma = {shape, shape, noise_loc.value_or(noise)};
    const Vec2 t(tx, ty);
    if (s.kind == ModelKind::rigid) {
      s.truth = RigidParams{scale, rotation(theta_deg * std::numbers::pi / 180.0), t};
    } else if (s.kind == ModelKind::affine) {
      AffineParams a;
      a.b << affine[0], affine[1], affine[2], affine[3];
      a.t = t;
      s.truth = a;
    } else {
      WarpField w;
      w.offset = t;
      w.linear = linear;
      w.amplitude = amplitude;
      w.frequency = frequency;
      s.truth = w;
    }
    return s;
  }

  int run() {
    const Scene scene = generate(spec());
    io::save_frames(prefix + ".model", {"px", scene.model});
    io::save_frames(prefix + ".data", {"px", scene.data});
    io::save_truth(prefix + ".truth", scene.ground_truth);
    std::cout << "seed " << seed << "\n"
              << "frames " << scene.model.size() << " per set, " << scene.ground_truth.size()
              << " true pairs\n";
    return 0;
  }
};

struct BenchCmd {
  std::string kind = "rigid";
  int n = 200;
  std::uint64_t seed = 1;
  int trials = 30;
  std::vector<double> ratios{0.15, 0.25, 0.35, 0.45, 0.5};
  bool baseline = false;
  std::optional<double> noise_shape, noise_loc;
  std::string out_path;
  EngineFlags engine;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "scene kind; also the model unless --model is given")
        ->capture_default_str();
    app->add_option("--n", n, "inliers per scene")->capture_default_str();
    app->add_option("--seed", seed, "seed of trial 0; trial i uses seed + i")->capture_default_str();
    app->add_option("--trials", trials)->capture_default_str();
    app->add_option("--ratios", ratios, "outlier ratios")->delimiter(',')->capture_default_str();
    app->add_flag("--baseline", baseline, "also run the location-only baseline");
    app->add_option("--noise-shape", noise_shape, "shape-block noise sigma");
    app->add_option("--noise-loc", noise_loc, "location-block noise sigma");
    app->add_option("--out", out_path, "CSV path (default stdout)");
    engine.attach(app);
  }

  int run(const CLI::App& app) {
    if (trials < 1) throw InvalidArgument("--trials must be at least 1");
    const ModelKind scene_kind = model_kind_from_string(kind);
    if (app.count("--model") == 0) engine.model = kind;
    const EngineConfig cfg = engine.resolve();

    std::vector<io::BenchRow> rows;
    for (int pass = 0; pass < (baseline ? 2 : 1); ++pass) {
      EngineConfig c = cfg;
      c.location_only = cfg.location_only || pass == 1;
      for (double ratio : ratios) {
        if (!(ratio >= 0.0 && ratio < 1.0)) throw InvalidArgument("ratios must lie in [0, 1)");
        SceneSpec spec = benchmark_scene(scene_kind, ratio, seed);
        spec.n_inliers = n;
        if (noise_shape) spec.noise_sigma[0] = spec.noise_sigma[1] = *noise_shape;
        if (noise_loc) spec.noise_sigma[2] = *noise_loc;
        rows.push_back({ratio, run_batch(spec, c, trials)});
      }
    }
    if (out_path.empty()) {
      io::write_bench_csv(std::cout, rows);
    } else {
      std::ofstream os(out_path, std::ios::binary);
      io::write_bench_csv(os, rows);
      if (!os) throw Error("cannot write " + out_path);
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-frame registration with Gaussian-mixture EM"};
  app.require_subcommand(1);

  MatchCmd match;
  auto* match_app = app.add_subcommand("match", "register MODEL onto DATA");
  match_app->add_option("data-file", match.data_path, "data frame set")->required();
  match_app->add_option("model-file", match.model_path, "model frame set")->required();
  match_app->add_option("--out", match.out_path, "result JSON path (default stdout)");
  match.engine.attach(match_app);

  SynthCmd synth;
  auto* synth_app = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
  synth.attach(synth_app);

  BenchCmd bench;
  auto* bench_app = app.add_subcommand("bench-outliers", "F1 versus outlier ratio sweep");
  bench.attach(bench_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*match_app) return match.run();
    if (*synth_app) return synth.run();
    return bench.run(*bench_app);
  } catch (const std::exception& e) {
    std::cerr << "cfm: " << e.what() << "\n";
    return kExitInput;
  }
}
