#include "cfm/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "cfm/error.hpp"
#include "cfm/svd2.hpp"

namespace cfm {

Vec2 WarpField::displacement(const Vec2& z) const {
  return offset + linear * z +
         amplitude * Vec2(std::sin(frequency * z.y()), std::sin(frequency * z.x()));
}

Mat2 WarpField::jacobian(const Vec2& z) const {
  Mat2 j = (1.0 + linear) * Mat2::Identity();
  j(0, 1) += amplitude * frequency * std::cos(frequency * z.y());
  j(1, 0) += amplitude * frequency * std::cos(frequency * z.x());
  return j;
}

void SceneSpec::validate() const {
  if (n_inliers < 3) throw InvalidSpec("n_inliers must be at least 3");
  if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0))
    throw InvalidSpec("outlier_ratio must lie in [0, 1)");
  for (double s : noise_sigma)
    if (!(s >= 0.0)) throw InvalidSpec("noise sigmas must be non-negative");
  if (!(extent_lo < extent_hi)) throw InvalidSpec("extent_lo must be below extent_hi");
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) throw InvalidSpec("need 0 < scale_lo <= scale_hi");
  if (!(shear_max >= 0.0)) throw InvalidSpec("shear_max must be non-negative");
  if (static_cast<int>(truth.index()) != static_cast<int>(kind))
    throw InvalidSpec("ground-truth transform does not match the scene kind");
  if (const auto* r = std::get_if<RigidParams>(&truth)) {
    if (!(r->s > 0.0)) throw InvalidSpec("rigid scale must be positive");
  } else if (const auto* a = std::get_if<AffineParams>(&truth)) {
    if (!(std::abs(a->b.determinant()) > kDetFloor)) throw InvalidSpec("affine map is singular");
  } else {
    const auto& w = std::get<WarpField>(truth);
    // det(J) >= (1 + linear)^2 - (amplitude * frequency)^2 must stay positive.
    if (!(std::abs(w.amplitude * w.frequency) < std::abs(1.0 + w.linear)))
      throw InvalidSpec("warp field folds: need |amplitude * frequency| < |1 + linear|");
  }
}

SceneSpec benchmark_scene(ModelKind kind, double outlier_ratio, std::uint64_t seed) {
  SceneSpec spec;
  spec.kind = kind;
  spec.outlier_ratio = outlier_ratio;
  spec.seed = seed;
  spec.noise_sigma = kBenchNoise;
  if (kind == ModelKind::rigid) {
    spec.truth = RigidParams{1.2, rotation(20.0 * std::numbers::pi / 180.0), Vec2(0.3, -0.2)};
  } else if (kind == ModelKind::affine) {
    AffineParams a;
    a.b << 1.1, 0.3, -0.1, 0.9;
    a.t << 0.2, 0.1;
    spec.truth = a;
  } else {
    WarpField w;
    w.amplitude = 0.2;
    spec.truth = w;
  }
  return spec;
}

Eigen::Index outlier_count(int n_inliers, double ratio) {
  const double exact = double(n_inliers) * ratio / (1.0 - ratio);
  return static_cast<Eigen::Index>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

FrameVec6 apply_truth(const TrueTransform& t, const FrameVec6& v) {
  if (const auto* r = std::get_if<RigidParams>(&t)) return apply_transform(r->as_transform(), v);
  if (const auto* a = std::get_if<AffineParams>(&t)) return apply_transform(a->as_transform(), v);
  const auto& field = std::get<WarpField>(t);
  const Mat2 j = field.jacobian(v.tdot);
  return {j * v.dot, j * v.ddot, v.tdot + field.displacement(v.tdot)};
}

FrameSet apply_nonrigid_truth(const FrameSet& model, const WarpField& field) {
  FrameSet out = model;
  for (Eigen::Index i = 0; i < model.size(); ++i) out.set(i, apply_truth(field, model[i]));
  return out;
}

namespace {

class FrameSampler {
 public:
  FrameSampler(const SceneSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

  FrameVec6 frame() {
    std::uniform_real_distribution<double> loc(spec_.extent_lo, spec_.extent_hi);
    std::uniform_real_distribution<double> scale(spec_.scale_lo, spec_.scale_hi);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> shear(-spec_.shear_max, spec_.shear_max);
    FeatureFrame f;
    f.x.x() = loc(rng_);
    f.x.y() = loc(rng_);
    const double s = scale(rng_);
    const double theta = angle(rng_);
    Mat2 k = Mat2::Identity();
    k(0, 1) = shear(rng_);
    f.a = s * rotation(theta) * k;
    return to_vec6(f);
  }

  FrameVec6 noisy(FrameVec6 v) {
    for (Block b : kBlocks) {
      const double sigma = spec_.noise_sigma[static_cast<std::size_t>(index(b))];
      if (sigma == 0.0) continue;
      std::normal_distribution<double> noise(0.0, sigma);
      v[b].x() += noise(rng_);
      v[b].y() += noise(rng_);
    }
    return v;
  }

 private:
  const SceneSpec& spec_;
  std::mt19937_64& rng_;
};

}  // namespace

Scene generate(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  FrameSampler sample(spec, rng);

  const Eigen::Index n_in = spec.n_inliers;
  const Eigen::Index n_out = outlier_count(spec.n_inliers, spec.outlier_ratio);
  Matrix6X model(6, n_in + n_out), data(6, n_in + n_out);
  FrameSet model_set(std::move(model)), data_set(std::move(data));

  Scene scene;
  for (Eigen::Index i = 0; i < n_in; ++i) {
    const FrameVec6 y = sample.frame();
    model_set.set(i, y);
    data_set.set(i, sample.noisy(apply_truth(spec.truth, y)));
    scene.ground_truth.emplace_back(i, i);
  }
  for (Eigen::Index i = n_in; i < n_in + n_out; ++i) model_set.set(i, sample.frame());
  for (Eigen::Index i = n_in; i < n_in + n_out; ++i)
    data_set.set(i, sample.noisy(apply_truth(spec.truth, sample.frame())));

  scene.model = std::move(model_set);
  scene.data = std::move(data_set);
  scene.true_transform = spec.truth;
  return scene;
}

}  // namespace cfm
