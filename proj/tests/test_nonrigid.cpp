#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "cfm/error.hpp"
#include "cfm/nonrigid.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cfm;

TEST_CASE("kernel diagonal, symmetry and positive semi-definiteness") {
  test::Rng rng(81);
  const FrameSet y = test::random_frames(rng, 25);
  for (KernelMode mode : {KernelMode::per_block, KernelMode::spatial_shared}) {
    const auto g = build_kernels(y, 2.0, mode);
    for (const auto& gk : g) {
      REQUIRE(gk.rows() == 25);
      CHECK(gk.diagonal().isOnes(0.0));
      CHECK(gk == gk.transpose());
      CHECK(gk.minCoeff() > 0.0);
      CHECK(gk.maxCoeff() <= 1.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gk);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("kernel value at squared distance 2 beta is 1/e") {
  Matrix6X m = Matrix6X::Zero(6, 2);
  m(0, 0) = m(3, 0) = m(0, 1) = m(3, 1) = 1.0;
  m(4, 1) = 1.0;
  m(5, 1) = 1.0;  // tdot distance^2 = 2 = 2 beta with beta = 1
  const auto g = build_kernels(FrameSet(m), 1.0);
  CHECK(g[2](0, 1) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(g[0](0, 1) == 1.0);  // identical shape blocks
}

TEST_CASE("kernel limits in beta") {
  test::Rng rng(82);
  const FrameSet y = test::random_frames(rng, 6);
  const auto wide = build_kernels(y, 1e12);
  CHECK((wide[2] - Eigen::MatrixXd::Ones(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
  const auto narrow = build_kernels(y, 1e-6);
  CHECK((narrow[2] - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(build_kernels(y, 0.0), InvalidArgument);
}

TEST_CASE("kernel modes differ only in which coordinates feed the kernel") {
  test::Rng rng(83);
  const FrameSet y = test::random_frames(rng, 7);
  const auto per = build_kernels(y, 2.0, KernelMode::per_block);
  const auto shared = build_kernels(y, 2.0, KernelMode::spatial_shared);
  CHECK(per[2] == shared[2]);
  CHECK(shared[0] == shared[2]);
  CHECK(shared[1] == shared[2]);
  CHECK_FALSE(per[0] == per[2]);
  CHECK(to_string(KernelMode::spatial_shared) == "spatial_shared");
  CHECK(kernel_mode_from_string("per_block") == KernelMode::per_block);
  CHECK_THROWS_AS(kernel_mode_from_string("shared"), InvalidArgument);
}

TEST_CASE("inactive blocks get no kernel") {
  test::Rng rng(84);
  const FrameSet y = test::random_frames(rng, 4);
  const auto g = build_kernels(y, 2.0, KernelMode::per_block, BlockMask::location_only());
  CHECK(g[0].size() == 0);
  CHECK(g[1].size() == 0);
  CHECK(g[2].rows() == 4);
}

TEST_CASE("self-alignment needs no displacement") {
  test::Rng rng(85);
  const FrameSet y = test::random_frames(rng, 8);
  const auto params = NonRigidParams::initial(y, 2.0, 3.0);
  const NonRigidStep step = nonrigid_m_step(y, y, test::identity_posterior(8), BlockCovariance{}, params);
  for (const auto& w : step.params.w) CHECK(w.norm() < 1e-14);
  CHECK(nonrigid_transformed(y, step.params) == y);
}

TEST_CASE("very strong regularization suppresses the displacement") {
  test::Rng rng(86);
  const FrameSet x = test::random_frames(rng, 6), y = test::random_frames(rng, 6);
  const auto params = NonRigidParams::initial(y, 2.0, 1e12);
  const NonRigidStep step = nonrigid_m_step(x, y, test::random_posterior(rng, 6, 6), BlockCovariance{}, params);
  for (const auto& w : step.params.w) CHECK(w.norm() < 1e-10);
  CHECK((nonrigid_transformed(y, step.params).matrix() - y.matrix()).norm() < 1e-10);
}

TEST_CASE("W matches a naive dense solve") {
  test::Rng rng(87);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + trial % 8, m = 1 + (trial / 8) % 8;
    const FrameSet x = test::random_frames(rng, n), y = test::random_frames(rng, m);
    const PosteriorMatrix post = test::random_posterior(rng, m, n);
    const BlockCovariance cov = test::random_covariance(rng);
    const KernelMode mode = trial % 2 ? KernelMode::per_block : KernelMode::spatial_shared;
    const auto params = NonRigidParams::initial(y, 2.0, 3.0, mode);
    const NonRigidStep step = nonrigid_m_step(x, y, post, cov, params);
    for (int k = 0; k < 3; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Matrix2X want = test::nonrigid_dense_oracle(x, y, post, params.g[ks], 3.0, cov.var[ks], k);
      CHECK((step.params.w[ks] - want).norm() <= 1e-8 * std::max(1.0, want.norm()));
    }
  }
}

TEST_CASE("W zeroes the gradient of the regularized energy") {
  test::Rng rng(88);
  for (int trial = 0; trial < 10; ++trial) {
    const FrameSet x = test::random_frames(rng, 5), y = test::random_frames(rng, 4);
    const PosteriorMatrix post = test::random_posterior(rng, 4, 5);
    const BlockCovariance cov = test::random_covariance(rng);
    const auto params = NonRigidParams::initial(y, 2.0, 3.0);
    const NonRigidStep step = nonrigid_m_step(x, y, post, cov, params);
    for (int k = 0; k < 3; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      auto f = [&](const Matrix2X& w) {
        return test::nonrigid_block_energy(x, y, post, params.g[ks], w, 3.0, cov.var[ks], k);
      };
      for (int i = 0; i < 8; ++i) {
        Matrix2X w = step.params.w[ks];
        const double h = 1e-6;
        w(i) += h;
        const double up = f(w);
        w(i) -= 2 * h;
        const double down = f(w);
        CHECK(std::abs((up - down) / (2 * h)) <= 1e-5);
      }
    }
  }
}

TEST_CASE("the displacement at model point m is column m of W G") {
  test::Rng rng(89);
  const FrameSet x = test::random_frames(rng, 6), y = test::random_frames(rng, 5);
  const auto params = NonRigidParams::initial(y, 2.0, 3.0);
  const NonRigidStep step = nonrigid_m_step(x, y, test::random_posterior(rng, 5, 6), BlockCovariance{}, params);
  const FrameSet t = nonrigid_transformed(y, step.params);
  for (int k = 0; k < 3; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    for (Eigen::Index m = 0; m < 5; ++m) {
      Vec2 v = Vec2::Zero();
      for (Eigen::Index l = 0; l < 5; ++l) v += step.params.w[ks].col(l) * step.params.g[ks](l, m);
      CHECK((t.matrix().col(m).segment<2>(2 * k) - y.matrix().col(m).segment<2>(2 * k) - v).norm() < 1e-13);
    }
  }
}

TEST_CASE("larger lambda never increases the regularizer") {
  test::Rng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    const FrameSet x = test::random_frames(rng, 7), y = test::random_frames(rng, 6);
    const PosteriorMatrix post = test::random_posterior(rng, 6, 7);
    const BlockCovariance cov = test::random_covariance(rng);
    double previous = 1e300;
    for (double lambda : {0.01, 0.1, 1.0, 3.0, 10.0, 100.0}) {
      const auto params = NonRigidParams::initial(y, 2.0, lambda);
      const double reg = nonrigid_m_step(x, y, post, cov, params).params.regularization();
      CHECK(reg <= previous * (1.0 + 1e-12));
      previous = reg;
    }
  }
}

TEST_CASE("duplicate model points keep the system solvable") {
  test::Rng rng(91);
  Matrix6X y = test::random_frames(rng, 5).matrix();
  y.col(3) = y.col(1);
  y.col(4) = y.col(1);
  const FrameSet x = test::random_frames(rng, 5);
  const auto params = NonRigidParams::initial(FrameSet(y), 2.0, 3.0);
  const NonRigidStep step =
      nonrigid_m_step(x, FrameSet(y), test::random_posterior(rng, 5, 5), BlockCovariance{}, params);
  for (const auto& w : step.params.w) CHECK(w.allFinite());
  CHECK(step.cov.var[2] > 0.0);
}

TEST_CASE("variances are the weighted residuals at the new displacement") {
  test::Rng rng(92);
  const FrameSet x = test::random_frames(rng, 6), y = test::random_frames(rng, 4);
  const PosteriorMatrix post = test::random_posterior(rng, 4, 6);
  const NonRigidStep step =
      nonrigid_m_step(x, y, post, test::random_covariance(rng), NonRigidParams::initial(y, 2.0, 3.0));
  const FrameSet t = nonrigid_transformed(y, step.params);
  for (int k = 0; k < 3; ++k) {
    double r = 0.0;
    for (Eigen::Index m = 0; m < 4; ++m)
      for (Eigen::Index n = 0; n < 6; ++n) r += post.p(m, n) * test::block_dist2(x, n, t, m, k);
    CHECK(step.cov.var[static_cast<std::size_t>(k)] == doctest::Approx(r / (2.0 * post.p.sum())).epsilon(1e-12));
  }
}

TEST_CASE("an M-step never increases the regularized objective") {
  test::Rng rng(93);
  for (int trial = 0; trial < 50; ++trial) {
    const FrameSet x = test::random_frames(rng, 6), y = test::random_frames(rng, 5);
    const PosteriorMatrix post = test::random_posterior(rng, 5, 6);
    const BlockCovariance cov = test::random_covariance(rng);
    NonRigidParams start = NonRigidParams::initial(y, 2.0, 3.0);
    for (auto& w : start.w) w = 0.3 * Matrix2X::Random(2, 5);
    const MixtureConfig cfg;
    const double before = q_value(x, nonrigid_transformed(y, start), post, cov, cfg) +
                          0.5 * 3.0 * start.regularization();
    const NonRigidStep step = nonrigid_m_step(x, y, post, cov, start);
    const double after = q_value(x, nonrigid_transformed(y, step.params), post, step.cov, cfg) +
                         0.5 * 3.0 * step.params.regularization();
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("restore_kernels rebuilds the kernels dropped from a result") {
  test::Rng rng(94);
  const FrameSet y = test::random_frames(rng, 5);
  NonRigidParams p = NonRigidParams::initial(y, 1.5, 3.0, KernelMode::per_block, BlockMask::location_only());
  const auto g = p.g;
  for (auto& k : p.g) k.resize(0, 0);
  restore_kernels(p, y);
  CHECK(p.g[2] == g[2]);
  CHECK(p.g[0].size() == 0);

  // With a change of units the kernels are built in unit coordinates.
  const FrameSet x = test::random_frames(rng, 5);
  p.norm = Normalization::fit(x, y);
  restore_kernels(p, y);
  CHECK(p.g[2] == build_kernels(p.norm.model_to_unit(y), 1.5, KernelMode::per_block,
                                BlockMask::location_only())[2]);
}

TEST_CASE("a stored change of units maps the field back to input units") {
  test::Rng rng(95);
  const FrameSet x = test::random_frames(rng, 6, 40.0), y = test::random_frames(rng, 6, 40.0);
  const Normalization norm = Normalization::fit(x, y);
  const FrameSet yu = norm.model_to_unit(y);
  NonRigidParams p = NonRigidParams::initial(yu, 2.0, 3.0);
  for (auto& w : p.w) w = Matrix2X::Random(2, 6);
  const FrameSet unit_result = nonrigid_transformed(yu, p);
  p.norm = norm;
  const FrameSet mapped = nonrigid_transformed(y, p);
  CHECK((mapped.matrix() - norm.unit_to_data(unit_result).matrix()).norm() < 1e-10);
}

TEST_CASE("invalid parameters are rejected") {
  test::Rng rng(96);
  const FrameSet y = test::random_frames(rng, 3);
  CHECK_THROWS_AS(NonRigidParams::initial(y, 2.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(NonRigidParams::initial(y, -1.0, 3.0), InvalidArgument);
  PosteriorMatrix post;
  post.p = Eigen::MatrixXd::Zero(3, 3);
  post.outlier_mass = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(nonrigid_m_step(y, y, post, BlockCovariance{}, NonRigidParams::initial(y, 2, 3)),
                  DegenerateResponsibility);
}
