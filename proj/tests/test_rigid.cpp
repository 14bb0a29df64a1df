#include <doctest.h>

#include <numbers>

#include "cfm/error.hpp"
#include "cfm/rigid.hpp"
#include "cfm/svd2.hpp"
#include "support.hpp"

using namespace cfm;

namespace {

FrameSet moved(const FrameSet& model, const RigidParams& p) {
  return apply_transform(p.as_transform(), model);
}

/// Weighted objective of a rigid map for fixed responsibilities and variances.
double objective(const FrameSet& x, const FrameSet& y, const PosteriorMatrix& post,
                 const BlockCovariance& cov, const RigidParams& p,
                 BlockMask mask = BlockMask::all()) {
  return test::naive_weighted_residual(x, moved(y, p), post, cov, mask);
}

/// For a fixed rotation the objective is quadratic in (s, tx, ty); solve its
/// 3x3 normal equations assembled pair by pair.
RigidParams best_for_angle(const FrameSet& x, const FrameSet& y, const PosteriorMatrix& post,
                           const BlockCovariance& cov, double theta) {
  const Mat2 r = rotation(theta);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (Eigen::Index m = 0; m < y.size(); ++m)
    for (Eigen::Index n = 0; n < x.size(); ++n)
      for (Block b : kBlocks) {
        const double w = post.p(m, n) / cov[b];
        const Vec2 ry = r * y[m][b];
        Eigen::Matrix<double, 2, 3> j = Eigen::Matrix<double, 2, 3>::Zero();
        j.col(0) = ry;
        if (b == Block::tdot) j.rightCols<2>() = Mat2::Identity();
        h += w * j.transpose() * j;
        g += w * j.transpose() * x[n][b];
      }
  const Eigen::Vector3d sol = h.ldlt().solve(g);
  return {sol(0), r, sol.tail<2>()};
}

/// Brute-force rigid fit: coarse angle grid, then a fine grid around the
/// best coarse cell.
RigidParams grid_oracle(const FrameSet& x, const FrameSet& y, const PosteriorMatrix& post,
                        const BlockCovariance& cov) {
  auto cost = [&](double th) {
    const RigidParams p = best_for_angle(x, y, post, cov, th);
    return p.s > 0 ? objective(x, y, post, cov, p) : 1e300;
  };
  double best = 0.0, best_cost = 1e300;
  for (double th = -std::numbers::pi; th < std::numbers::pi; th += 1e-2)
    if (const double c = cost(th); c < best_cost) best_cost = c, best = th;
  const double centre = best;
  for (double th = centre - 1e-2; th <= centre + 1e-2; th += 1e-5)
    if (const double c = cost(th); c < best_cost) best_cost = c, best = th;
  return best_for_angle(x, y, post, cov, best);
}

double angle_of(const Mat2& r) { return std::atan2(r(1, 0), r(0, 0)); }

}  // namespace

TEST_CASE("already aligned sets") {
  test::Rng rng(51);
  const FrameSet y = test::random_frames(rng, 10);
  const RigidStep step = rigid_m_step(y, y, test::identity_posterior(10), BlockCovariance{});
  CHECK((step.params.r - Mat2::Identity()).norm() < 1e-12);
  CHECK(step.params.s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(step.params.t.norm() < 1e-12);
  for (double v : step.cov.var) CHECK(v == kVarFloor);
}

TEST_CASE("rotation by 30 degrees about the origin") {
  test::Rng rng(52);
  const FrameSet y = test::random_frames(rng, 12);
  const RigidParams truth{1.0, rotation(std::numbers::pi / 6.0), Vec2::Zero()};
  const RigidStep step = rigid_m_step(moved(y, truth), y, test::identity_posterior(12), BlockCovariance{});
  CHECK((step.params.r - truth.r).norm() < 1e-9);
  CHECK(step.params.s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(step.params.t.norm() < 1e-9);
}

TEST_CASE("translation only moves the location block") {
  test::Rng rng(53);
  const FrameSet y = test::random_frames(rng, 8);
  Matrix6X x = y.matrix();
  x.bottomRows<2>().colwise() += Vec2(5, -2);
  const RigidStep step = rigid_m_step(FrameSet(x), y, test::identity_posterior(8), BlockCovariance{});
  CHECK((step.params.r - Mat2::Identity()).norm() < 1e-12);
  CHECK(step.params.s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((step.params.t - Vec2(5, -2)).norm() < 1e-12);
}

TEST_CASE("noiseless scenes are recovered exactly") {
  test::Rng rng(54);
  for (int trial = 0; trial < 100; ++trial) {
    const FrameSet y = test::random_frames(rng, 3 + trial % 20);
    const RigidParams truth{test::uniform(rng, 0.2, 5.0), rotation(test::uniform(rng, -3.1, 3.1)),
                            test::random_vec(rng, -10, 10)};
    const RigidStep step = rigid_m_step(moved(y, truth), y, test::identity_posterior(y.size()),
                                        test::random_covariance(rng));
    CHECK((step.params.r - truth.r).norm() < 1e-7);
    CHECK(std::abs(step.params.s - truth.s) < 1e-7);
    CHECK((step.params.t - truth.t).norm() < 1e-7);
  }
}

TEST_CASE("rigid_m_step matches a brute-force grid fit on soft posteriors") {
  test::Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const FrameSet x = test::random_frames(rng, 5), y = test::random_frames(rng, 4);
    const PosteriorMatrix post = test::random_posterior(rng, 4, 5);
    const BlockCovariance cov = test::random_covariance(rng);
    const RigidParams got = rigid_m_step(x, y, post, cov).params;
    const RigidParams ref = grid_oracle(x, y, post, cov);
    const double got_cost = objective(x, y, post, cov, got);
    const double ref_cost = objective(x, y, post, cov, ref);
    CHECK(got_cost <= ref_cost + 1e-10);
    CHECK(std::abs(got_cost - ref_cost) <= 1e-6 * std::max(1.0, ref_cost));
    if (got.s > 1e-3) {
      const double d = std::remainder(angle_of(got.r) - angle_of(ref.r), 2.0 * std::numbers::pi);
      CHECK(std::abs(d) < 1e-3);
    }
  }
}

TEST_CASE("the objective gradient vanishes at the returned parameters") {
  test::Rng rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const FrameSet x = test::random_frames(rng, 6), y = test::random_frames(rng, 5);
    const PosteriorMatrix post = test::random_posterior(rng, 5, 6);
    const BlockCovariance cov = test::random_covariance(rng);
    const RigidParams p = rigid_m_step(x, y, post, cov).params;
    if (p.s <= kMinScale) continue;  // the clamp is active; not an interior optimum
    auto f = [&](const Eigen::Vector4d& v) {
      return objective(x, y, post, cov, {v(0), rotation(v(1)), v.tail<2>()});
    };
    const Eigen::Vector4d at(p.s, angle_of(p.r), p.t(0), p.t(1));
    for (int i = 0; i < 4; ++i) CHECK(std::abs(test::central_difference(f, at, i, 1e-6)) <= 1e-5);
  }
}

TEST_CASE("an M-step never increases Q for fixed responsibilities") {
  test::Rng rng(57);
  for (int trial = 0; trial < 100; ++trial) {
    const FrameSet x = test::random_frames(rng, 7), y = test::random_frames(rng, 6);
    const PosteriorMatrix post = test::random_posterior(rng, 6, 7);
    const BlockCovariance cov = test::random_covariance(rng);
    const RigidParams start{test::uniform(rng, 0.5, 2.0), rotation(test::uniform(rng, -3, 3)),
                            test::random_vec(rng)};
    MixtureConfig cfg;
    const double before = q_value(x, moved(y, start), post, cov, cfg);
    const RigidStep step = rigid_m_step(x, y, post, cov);
    const double after = q_value(x, moved(y, step.params), post, step.cov, cfg);
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("variances are the weighted residuals at the new parameters") {
  test::Rng rng(58);
  const FrameSet x = test::random_frames(rng, 6), y = test::random_frames(rng, 4);
  const PosteriorMatrix post = test::random_posterior(rng, 4, 6);
  const RigidStep step = rigid_m_step(x, y, post, test::random_covariance(rng));
  const FrameSet t = moved(y, step.params);
  for (int k = 0; k < 3; ++k) {
    double r = 0.0;
    for (Eigen::Index m = 0; m < 4; ++m)
      for (Eigen::Index n = 0; n < 6; ++n) r += post.p(m, n) * test::block_dist2(x, n, t, m, k);
    CHECK(step.cov.var[static_cast<std::size_t>(k)] ==
          doctest::Approx(r / (2.0 * post.p.sum())).epsilon(1e-12));
  }
}

TEST_CASE("reflected data still yields a proper rotation") {
  test::Rng rng(59);
  const FrameSet y = test::random_frames(rng, 10);
  Matrix6X x = y.matrix();
  for (int row : {1, 3, 5}) x.row(row) *= -1.0;  // mirror every block in y
  const RigidStep step = rigid_m_step(FrameSet(x), y, test::identity_posterior(10), BlockCovariance{});
  CHECK((step.params.r.transpose() * step.params.r - Mat2::Identity()).norm() < 1e-9);
  CHECK(step.params.r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a vanishing cross moment falls back to the identity rotation") {
  // Every model frame is the zero frame, so A = 0 and the Gram trace is 0:
  // the scale has no effect on the objective and stays at 1.
  Matrix6X y = Matrix6X::Zero(6, 3);
  test::Rng rng(60);
  const FrameSet x = test::random_frames(rng, 3);
  const RigidStep step = rigid_m_step(x, FrameSet(y), test::identity_posterior(3), BlockCovariance{});
  CHECK(step.params.r == Mat2::Identity());
  CHECK(step.params.s == 1.0);
  CHECK(step.params.t.allFinite());
}

TEST_CASE("a zero fitted scale is clamped to the floor") {
  // Uniform responsibilities over a symmetric pair: the cross moment
  // vanishes while the Gram matrix does not.
  Matrix6X y = Matrix6X::Zero(6, 2), x = Matrix6X::Zero(6, 2);
  y(4, 0) = 1.0;
  y(4, 1) = -1.0;
  x(4, 0) = 1.0;
  x(4, 1) = -1.0;
  PosteriorMatrix post;
  post.p.resize(2, 2);
  post.p << 0.5, 0.5, 0.5, 0.5;
  post.outlier_mass = Eigen::VectorXd::Zero(2);
  const RigidStep step = rigid_m_step(FrameSet(x), FrameSet(y), post, BlockCovariance{},
                                      BlockMask::location_only());
  CHECK(step.params.s == kMinScale);
}

TEST_CASE("total outlier collapse raises DegenerateResponsibility") {
  test::Rng rng(61);
  const FrameSet x = test::random_frames(rng, 4), y = test::random_frames(rng, 4);
  PosteriorMatrix post;
  post.p = Eigen::MatrixXd::Constant(4, 4, 1e-12);
  post.outlier_mass = Eigen::VectorXd::Ones(4);
  try {
    rigid_m_step(x, y, post, BlockCovariance{});
    FAIL("expected DegenerateResponsibility");
  } catch (const DegenerateResponsibility& e) {
    CHECK(e.inlier_mass() == doctest::Approx(16e-12));
  }
}

TEST_CASE("location-only mode ignores the shape blocks") {
  test::Rng rng(62);
  const FrameSet x = test::random_frames(rng, 8), y = test::random_frames(rng, 8);
  Matrix6X xs = x.matrix(), ys = y.matrix();
  xs.topRows<4>() = test::random_frames(rng, 8).matrix().topRows<4>();
  ys.topRows<4>() = test::random_frames(rng, 8).matrix().topRows<4>();
  const PosteriorMatrix post = test::random_posterior(rng, 8, 8);
  const auto mask = BlockMask::location_only();
  const RigidStep a = rigid_m_step(x, y, post, BlockCovariance{}, mask);
  const RigidStep b = rigid_m_step(FrameSet(xs), FrameSet(ys), post, BlockCovariance{{7, 9, 1}}, mask);
  CHECK(a.params == b.params);
  CHECK(a.cov[Block::tdot] == b.cov[Block::tdot]);
}
