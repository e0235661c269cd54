#include <doctest.h>

#include <Eigen/Dense>

#include "cpscan/detectors.hpp"
#include "helpers.hpp"

using namespace cpscan;
using testutil::close_rel;
using testutil::toy;

namespace {

SquareMatrix toeplitz(Index p, double g) {
  SquareMatrix s(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) s(i, j) = std::pow(g, std::abs(i - j));
  return s;
}

}  // namespace

TEST_SUITE("detectors") {
  TEST_CASE("tilde_y coefficients") {
    Vector y = Vector::Ones(4);
    const Vector t = tilde_y(y, 2);
    CHECK(t(0) == doctest::Approx(-0.5));
    CHECK(t(1) == doctest::Approx(-0.5));
    CHECK(t(2) == doctest::Approx(0.5));
    CHECK(t(3) == doctest::Approx(0.5));
    CHECK(tilde_y(Vector::Zero(6), 3).isZero(0.0));
    CHECK_THROWS_AS(tilde_y(y, 0), std::out_of_range);
    CHECK_THROWS_AS(tilde_y(y, 4), std::out_of_range);
  }

  TEST_CASE("toy statistics by hand") {
    const Dataset ds = toy();
    const PrefixSummaries ps = precompute(ds);
    CHECK(mcscan_stat(ps, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(qcscan_stat(ps, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(direct_mcscan(ds, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(direct_qcscan(ds, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mcscan_stat(ps, 4) == 0.0);
    CHECK(qcscan_stat(ps, 4) == 0.0);
    CHECK(detector_stat(DetectorKind::Max, ps, 2) == mcscan_stat(ps, 2));
    CHECK(detector_stat(DetectorKind::Quad, ps, 2) == qcscan_stat(ps, 2));
    CHECK_THROWS_AS(mcscan_stat(ps, 0), std::out_of_range);
    CHECK_THROWS_AS(qcscan_stat(ps, 5), std::out_of_range);
  }

  TEST_CASE("zero response gives zero statistics") {
    const Dataset base = testutil::random_dataset(12, 3, 3);
    const Dataset ds(base.x(), Vector::Zero(12));
    const PrefixSummaries ps = precompute(ds);
    for (Index k = 1; k < 12; ++k) {
      CHECK(mcscan_stat(ps, k) == 0.0);
      CHECK(qcscan_stat(ps, k) == 0.0);
      CHECK(direct_mcscan(ds, k) == 0.0);
      CHECK(direct_qcscan(ds, k) == doctest::Approx(0.0));
    }
  }

  TEST_CASE("prefix form agrees with the definition") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Dataset ds = testutil::random_dataset(20, 5, seed);
      const PrefixSummaries ps = precompute(ds);
      for (Index k = 1; k < 20; ++k) {
        CHECK(close_rel(mcscan_stat(ps, k), direct_mcscan(ds, k), 1e-10));
        CHECK(close_rel(qcscan_stat(ps, k), direct_qcscan(ds, k), 1e-10));
      }
    }
  }

  TEST_CASE("scaling of the response") {
    const Dataset ds = testutil::random_dataset(25, 4, 5);
    const double c = -3.5;
    const PrefixSummaries ps = precompute(ds);
    const PrefixSummaries scaled = precompute(Dataset(ds.x(), c * ds.y()));
    for (Index k = 1; k < 25; ++k) {
      CHECK(mcscan_stat(scaled, k) == doctest::Approx(std::abs(c) * mcscan_stat(ps, k)).epsilon(1e-10));
      CHECK(std::abs(qcscan_stat(scaled, k) - c * c * qcscan_stat(ps, k)) <=
            1e-10 * (1 + std::abs(c * c * qcscan_stat(ps, k))));
    }
  }

  TEST_CASE("time reversal symmetry") {
    const Dataset ds = testutil::random_dataset(25, 4, 6);
    const PrefixSummaries ps = precompute(ds);
    const PrefixSummaries rev = precompute(ds.reversed());
    for (Index k = 1; k < 25; ++k) {
      CHECK(close_rel(mcscan_stat(rev, k), mcscan_stat(ps, 25 - k), 1e-10));
      CHECK(close_rel(qcscan_stat(rev, k), qcscan_stat(ps, 25 - k), 1e-10));
    }
  }

  TEST_CASE("rotation invariance of the quadratic form") {
    const Dataset ds = testutil::random_dataset(30, 6, 7);
    Rng rng(70);
    SquareMatrix g(6, 6);
    for (Index i = 0; i < 36; ++i) g.data()[i] = rng.normal();
    const SquareMatrix q = Eigen::HouseholderQR<SquareMatrix>(g).householderQ();
    const Matrix xr = ds.x() * q;
    const PrefixSummaries ps = precompute(ds);
    const PrefixSummaries rot = precompute(Dataset(xr, ds.y()));

    // column permutation with sign flips
    Matrix xp(30, 6);
    const int perm[] = {3, 0, 5, 1, 4, 2};
    for (Index j = 0; j < 6; ++j) xp.col(j) = (j % 2 ? -1.0 : 1.0) * ds.x().col(perm[j]);
    const PrefixSummaries pm = precompute(Dataset(xp, ds.y()));
    for (Index k = 1; k < 30; ++k) {
      CHECK(close_rel(qcscan_stat(rot, k), qcscan_stat(ps, k), 1e-8));
      CHECK(close_rel(mcscan_stat(pm, k), mcscan_stat(ps, k), 1e-12));
    }
  }

  TEST_CASE("quadratic statistic can be negative, max statistic cannot") {
    Vector y(4);
    y << 1, -1, 1, -1;
    const PrefixSummaries ps = precompute(Dataset(Matrix::Ones(4, 1), y));
    CHECK(qcscan_stat(ps, 2) == doctest::Approx(-1.0));
    const Dataset ds = testutil::random_dataset(40, 3, 8);
    const PrefixSummaries rp = precompute(ds);
    for (Index k = 1; k < 40; ++k) CHECK(mcscan_stat(rp, k) >= 0.0);
  }

  TEST_CASE("population model checks") {
    const SquareMatrix sigma = toeplitz(4, 0.5);
    Vector b0(4), b1(4);
    b0 << 1, 0, -1, 2;
    b1 << 0, 1, 1, 0;
    const PopulationModel m(sigma, b0, b1, 0.7, 10, 40);
    CHECK(m.psi() == doctest::Approx(m.recompute_psi()).epsilon(1e-10));
    const double psi0 = std::sqrt(b0.dot(sigma * b0));
    const double psi1 = std::sqrt(b1.dot(sigma * b1));
    CHECK(m.psi() == doctest::Approx(std::max({psi0, psi1, 0.7})).epsilon(1e-12));
    CHECK(m.min_segment() == 10);
    CHECK_NOTHROW(m.check_psd());
    SquareMatrix asym = sigma;
    asym(0, 1) += 1e-6;
    CHECK_THROWS_AS(PopulationModel(asym, b0, b1, 1.0, 10, 40), ConfigError);
    SquareMatrix indefinite = SquareMatrix::Identity(4, 4);
    indefinite(3, 3) = -0.1;
    CHECK_THROWS_AS(PopulationModel(indefinite, b0, b1, 1.0, 10, 40).check_psd(), ConfigError);
  }

  TEST_CASE("mean_fk closed forms") {
    const SquareMatrix sigma = toeplitz(5, 0.6);
    Vector beta(5);
    beta << 0.3, -1, 0.5, 0, 2;
    const PopulationModel flat(sigma, beta, beta, 1.0, 50, 50);
    const double expected = (sigma * beta).squaredNorm();
    for (Index k : {1, 7, 25, 49}) CHECK(mean_fk(flat, 50, k) == doctest::Approx(expected).epsilon(1e-12));

    // beta0 = 0, k = theta
    const Index n = 40, th = 12;
    const PopulationModel m(sigma, Vector::Zero(5), beta, 1.0, th, n);
    const double d2 = (sigma * beta).squaredNorm();
    const double fk = double(th * (n - th)) / n * (d2 + d2 / (n - th));
    CHECK(mean_fk(m, n, th) == doctest::Approx(fk).epsilon(1e-12));
  }

  TEST_CASE("mean_fk equals |fbar|^2 plus the weighted second moments") {
    // Independent oracle: sum over t of the squared tilde-y weights times beta(t)' Sigma^2 beta(t).
    const SquareMatrix sigma = toeplitz(5, -0.4);
    Vector b0(5), b1(5);
    b0 << 1, 2, 0, -1, 0.5;
    b1 << -0.5, 0, 1, 1, 0;
    const Index n = 30, th = 11;
    const PopulationModel m(sigma, b0, b1, 1.0, th, n);
    for (Index k = 1; k < n; ++k) {
      double second = 0.0;
      for (Index t = 1; t <= n; ++t) {
        const double w2 = t <= k ? double(n - k) / (n * k) : double(k) / (n * (n - k));
        const Vector& b = t <= th ? b0 : b1;
        second += w2 * (sigma * b).squaredNorm();
      }
      const double oracle = mean_fbar(m, n, k).squaredNorm() + second;
      CHECK(mean_fk(m, n, k) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }

  TEST_CASE("mean_fbar special cases") {
    const SquareMatrix sigma = toeplitz(3, 0.2);
    Vector b0(3), b1(3);
    b0 << 0, 1, 0;
    b1 << 1, 0, 0;
    const PopulationModel m(sigma, b0, b1, 1.0, 8, 20);
    const Vector at_theta = mean_fbar(m, 20, 8);
    const Vector expected = std::sqrt(8.0 * 12.0 / 20.0) * (sigma * (b1 - b0));
    CHECK((at_theta - expected).norm() <= 1e-12);
    const PopulationModel none(sigma, b0, b0, 1.0, 20, 20);
    for (Index k = 1; k < 20; ++k) CHECK(mean_fbar(none, 20, k).isZero(0.0));
  }

  TEST_CASE("Monte-Carlo means match the population formulas") {
    // Sigma = Toeplitz(0.5), p = 4, n = 40, theta = 10; 2000 draws.
    const Index n = 40, p = 4, th = 10;
    const SquareMatrix sigma = toeplitz(p, 0.5);
    const SquareMatrix root = Eigen::LLT<SquareMatrix>(sigma).matrixL();
    Vector b0(p), b1(p);
    b0 << 1, 0, 0, 0;
    b1 << -1, 0, 0, 0;
    const PopulationModel model(sigma, b0, b1, 1.0, th, n);
    const int reps = 2000;
    const Index ks[] = {5, 10, 25};
    Eigen::Matrix<double, 3, 1> sum_t = Eigen::Matrix<double, 3, 1>::Zero(), sum_t2 = sum_t;
    Eigen::MatrixXd sum_v = Eigen::MatrixXd::Zero(p, 3), sum_v2 = sum_v;
    Rng rng(2024);
    for (int r = 0; r < reps; ++r) {
      Matrix x(n, p);
      Vector y(n);
      for (Index t = 0; t < n; ++t) {
        Vector z(p);
        for (Index j = 0; j < p; ++j) z(j) = rng.normal();
        x.row(t) = (root * z).transpose();
        y(t) = x.row(t).dot(t < th ? b0 : b1) + rng.normal();
      }
      const Dataset ds(x, y);
      const PrefixSummaries ps = precompute(ds);
      for (int i = 0; i < 3; ++i) {
        const double tk = qcscan_stat(ps, ks[i]);
        sum_t(i) += tk;
        sum_t2(i) += tk * tk;
        const Vector v = x.transpose() * tilde_y(y, ks[i]);
        sum_v.col(i) += v;
        sum_v2.col(i) += v.cwiseProduct(v);
      }
    }
    for (int i = 0; i < 3; ++i) {
      const double mean = sum_t(i) / reps;
      const double se = std::sqrt((sum_t2(i) / reps - mean * mean) / reps);
      CHECK(std::abs(mean - mean_fk(model, n, ks[i])) <= 3 * se);
      const Vector fbar = mean_fbar(model, n, ks[i]);
      for (Index j = 0; j < p; ++j) {
        const double mv = sum_v(j, i) / reps;
        const double sv = std::sqrt((sum_v2(j, i) / reps - mv * mv) / reps);
        CHECK(std::abs(mv - fbar(j)) <= 3 * sv);
      }
    }
  }
}
