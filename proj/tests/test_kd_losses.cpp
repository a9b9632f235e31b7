#include <doctest.h>

#include <cmath>
#include <random>

#include "mfkd/kd_losses.hpp"

using namespace mfkd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vecn(std::initializer_list<double> vals) {
  VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

MatrixXd random_map(std::mt19937_64& rng, int channels, int positions) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd f(channels, positions);
  for (int i = 0; i < channels; ++i) {
    for (int j = 0; j < positions; ++j) f(i, j) = normal(rng);
  }
  return f;
}

}  // namespace

TEST_CASE("softmax_temp") {
  CHECK(softmax_temp(vecn({0.0, 0.0}), 3.0)[0] == doctest::Approx(0.5).epsilon(1e-14));

  const VectorXd q = softmax_temp(vecn({std::log(4.0), 0.0}), 1.0);
  CHECK(q[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-12));

  const VectorXd flat = softmax_temp(vecn({10.0, 0.0}), 1e6);
  CHECK(flat[0] == doctest::Approx(0.5).epsilon(1e-5));

  CHECK_THROWS_AS(softmax_temp(vecn({1.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax_temp(vecn({1.0}), -2.0), std::invalid_argument);

  SUBCASE("shift invariance") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
      VectorXd z(5);
      for (int i = 0; i < 5; ++i) z[i] = normal(rng);
      const VectorXd a = softmax_temp(z, 2.0);
      const VectorXd b = softmax_temp((z.array() + 7.5).matrix(), 2.0);
      CHECK((a - b).lpNorm<Eigen::Infinity>() < 1e-12);
      CHECK(std::abs(a.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("cross_entropy") {
  const double eps = 1e-12;
  CHECK(cross_entropy(vecn({1.0, 0.0}), vecn({1.0 - eps, eps})) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cross_entropy(vecn({1.0, 0.0}), vecn({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cross_entropy(vecn({0.5, 0.5}), vecn({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(cross_entropy(vecn({1.0, 0.0}), vecn({0.0, 1.0})),
                  std::invalid_argument);
}

TEST_CASE("kd_loss") {
  SUBCASE("lambda = 0 is the plain summed logistic loss") {
    MatrixXd zs(2, 3), zt(2, 3);
    zs << 1.0, 0.0, -1.0, 0.5, 0.5, 2.0;
    zt.setConstant(99.0);  // ignored
    const std::vector<int> labels{0, 2};
    KdConfig cfg;
    cfg.lambda = 0.0;
    cfg.tau = 3.0;
    double expect = 0.0;
    for (int i = 0; i < 2; ++i) {
      expect += -std::log(softmax_temp(zs.row(i).transpose(), 1.0)[labels[i]]);
    }
    CHECK(kd_loss(zs, zt, labels, cfg) == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("lambda = 1, tau = 1, teacher = student gives summed entropy") {
    MatrixXd z(2, 4);
    z << 0.2, -0.3, 1.0, 0.0, 2.0, 2.0, 2.0, 2.0;
    KdConfig cfg;
    cfg.lambda = 1.0;
    cfg.tau = 1.0;
    double entropy = 0.0;
    for (int i = 0; i < 2; ++i) {
      const VectorXd p = softmax_temp(z.row(i).transpose(), 1.0);
      entropy += cross_entropy(p, p);
    }
    CHECK(kd_loss(z, z, {0, 0}, cfg) == doctest::Approx(entropy).epsilon(1e-12));
  }

  SUBCASE("hand-evaluated one-sample two-class case") {
    MatrixXd zs(1, 2), zt(1, 2);
    zs << 0.0, 0.0;
    zt << std::log(4.0), 0.0;
    KdConfig cfg;
    cfg.lambda = 0.5;
    cfg.tau = 1.0;
    // 0.5*ln2 + 0.5*(0.8*ln2 + 0.2*ln2) = ln2
    CHECK(kd_loss(zs, zt, {0}, cfg) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(kd_loss(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 4), {0, 0}, KdConfig{}),
                    std::invalid_argument);
  }

  SUBCASE("linear-combination identity in lambda") {
    std::mt19937_64 rng(9);
    MatrixXd zs = random_map(rng, 4, 6);
    MatrixXd zt = random_map(rng, 4, 6);
    const std::vector<int> labels{1, 0, 5, 3};
    const double tau = 2.5;
    // A and B computed independently as the two pure components.
    double a = 0.0, b = 0.0;
    for (int i = 0; i < 4; ++i) {
      a += -std::log(softmax_temp(zs.row(i).transpose(), 1.0)[labels[static_cast<std::size_t>(i)]]);
      b += cross_entropy(softmax_temp(zt.row(i).transpose(), tau),
                         softmax_temp(zs.row(i).transpose(), tau));
    }
    for (double lambda : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      KdConfig cfg;
      cfg.lambda = lambda;
      cfg.tau = tau;
      const double expect = (1.0 - lambda) * a + lambda * tau * tau * b;
      CHECK(std::abs(kd_loss(zs, zt, labels, cfg) - expect) < 1e-12);
    }
  }
}

TEST_CASE("mmd2") {
  const MmdKernelSpec poly{0.0, 2};

  SUBCASE("identical maps cancel") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXd f = random_map(rng, 5, 7);
      CHECK(std::abs(mmd2(f, f, poly)) < 1e-10);
    }
  }

  SUBCASE("orthogonal unit rows give exactly 2") {
    MatrixXd ft(1, 2), fs(1, 2);
    ft << 1.0, 0.0;
    fs << 0.0, 1.0;
    CHECK(mmd2(ft, fs, poly) == doctest::Approx(2.0).epsilon(1e-15));
  }

  SUBCASE("row normalization makes scale irrelevant") {
    MatrixXd ft(1, 2), fs(1, 2);
    ft << 3.0, 0.0;
    fs << 0.0, 4.0;
    CHECK(mmd2(ft, fs, poly) == doctest::Approx(2.0).epsilon(1e-15));
  }

  SUBCASE("symmetry") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXd f = random_map(rng, 4, 5);
      const MatrixXd g = random_map(rng, 3, 5);
      CHECK(std::abs(mmd2(f, g, poly) - mmd2(g, f, poly)) < 1e-12);
    }
  }

  SUBCASE("row-scale invariance") {
    std::mt19937_64 rng(4);
    const MatrixXd f = random_map(rng, 4, 5);
    const MatrixXd g = random_map(rng, 3, 5);
    const double base = mmd2(f, g, poly);
    MatrixXd f2 = f;
    f2.row(2) *= 37.5;
    MatrixXd g2 = g;
    g2.row(0) *= 0.004;
    CHECK(std::abs(mmd2(f2, g, poly) - base) < 1e-10);
    CHECK(std::abs(mmd2(f, g2, poly) - base) < 1e-10);
  }

  SUBCASE("nonnegative for PSD polynomial kernels") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const MatrixXd f = random_map(rng, 3, 6);
      const MatrixXd g = random_map(rng, 5, 6);
      CHECK(mmd2(f, g, poly) >= -1e-9);
    }
  }

  SUBCASE("positions mismatch and all-zero rows fail") {
    CHECK_THROWS_AS(mmd2(MatrixXd::Ones(2, 3), MatrixXd::Ones(2, 4), poly),
                    std::invalid_argument);
    MatrixXd zero_row = MatrixXd::Ones(2, 3);
    zero_row.row(1).setZero();
    CHECK_THROWS_AS(mmd2(zero_row, MatrixXd::Ones(2, 3), poly), std::invalid_argument);
  }
}

TEST_CASE("mmd2_subset") {
  const MmdKernelSpec poly{0.0, 2};
  std::mt19937_64 rng(6);

  SUBCASE("full subsets reduce to mmd2 exactly") {
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXd f = random_map(rng, 5, 4);
      const MatrixXd g = random_map(rng, 6, 4);
      std::vector<int> full_t{0, 1, 2, 3, 4};
      std::vector<int> full_s{0, 1, 2, 3, 4, 5};
      CHECK(std::abs(mmd2_subset(f, g, full_t, full_s, poly) - mmd2(f, g, poly)) < 1e-12);
    }
  }

  SUBCASE("singleton subsets have a three-term closed form") {
    const MatrixXd f = random_map(rng, 4, 3);
    const MatrixXd g = random_map(rng, 4, 3);
    const VectorXd t = f.row(2).transpose().normalized();
    const VectorXd s = g.row(1).transpose().normalized();
    auto k = [&](const VectorXd& a, const VectorXd& b) {
      return std::pow(a.dot(b), 2);
    };
    const double expect = k(t, t) + k(s, s) - 2.0 * k(t, s);
    CHECK(mmd2_subset(f, g, {2}, {1}, poly) == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("empty or invalid subsets fail") {
    const MatrixXd f = MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(mmd2_subset(f, f, {}, {0}, MmdKernelSpec{}), std::invalid_argument);
    CHECK_THROWS_AS(mmd2_subset(f, f, {0}, {5}, MmdKernelSpec{}), std::out_of_range);
  }
}

TEST_CASE("nst_loss") {
  const MmdKernelSpec poly{0.0, 2};
  MatrixXd zs(1, 2);
  zs << 0.0, 0.0;
  const std::vector<int> labels{0};

  SUBCASE("nst_beta = 0 leaves only the logistic term") {
    std::mt19937_64 rng(7);
    KdConfig cfg;
    cfg.nst_beta = 0.0;
    const std::vector<MatrixXd> ft{random_map(rng, 3, 4)};
    const std::vector<MatrixXd> fs{random_map(rng, 3, 4)};
    CHECK(nst_loss(zs, labels, ft, fs, cfg, poly) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("identical maps leave only the logistic term") {
    std::mt19937_64 rng(8);
    KdConfig cfg;
    cfg.nst_beta = 12.5;
    const MatrixXd f = random_map(rng, 3, 4);
    CHECK(nst_loss(zs, labels, {f}, {f}, cfg, poly) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  SUBCASE("composes the hand oracles with beta = 12.5") {
    MatrixXd ft(1, 2), fs(1, 2);
    ft << 1.0, 0.0;
    fs << 0.0, 1.0;
    KdConfig cfg;
    cfg.nst_beta = 12.5;
    CHECK(nst_loss(zs, labels, {ft}, {fs}, cfg, poly) ==
          doctest::Approx(std::log(2.0) + 12.5 * 2.0).epsilon(1e-12));
  }

  SUBCASE("list length mismatch") {
    KdConfig cfg;
    CHECK_THROWS_AS(
        nst_loss(zs, labels, {MatrixXd::Ones(1, 2)}, {}, cfg, poly),
        std::invalid_argument);
  }
}
