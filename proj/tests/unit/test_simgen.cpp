#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "cpscan/linalg.hpp"
#include "cpscan/simgen.hpp"
#include "helpers.hpp"

using namespace cpscan;

namespace {

SquareMatrix sample_cov(const Matrix& x) {
  const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
  return centred.transpose() * centred / double(x.rows() - 1);
}

Index count_nonzero(const Vector& v, double tol) {
  Index c = 0;
  for (Index i = 0; i < v.size(); ++i) c += std::abs(v(i)) > tol;
  return c;
}

}  // namespace

TEST_SUITE("simgen") {
  TEST_CASE("Toeplitz covariance entries") {
    const auto cov = CovarianceBuilder::toeplitz(4, 0.6);
    const SquareMatrix s = cov.sigma();
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 3) == doctest::Approx(0.216));
    CHECK(asymmetry(s) == 0.0);
    CHECK(CovarianceBuilder::toeplitz(3, 0.0).sigma() == SquareMatrix::Identity(3, 3));
    CHECK_THROWS_AS(CovarianceBuilder::toeplitz(3, 1.0), ConfigError);
    CHECK_THROWS_AS(CovarianceBuilder::toeplitz(3, -1.2), ConfigError);
    Vector v(4);
    v << 1, -2, 0.5, 3;
    CHECK(cov.quad_form(v) == doctest::Approx(v.dot(s * v)));
  }

  TEST_CASE("AR(1) rows have the Toeplitz covariance") {
    Rng rng(1);
    const Matrix x2 = sample_design(CovarianceBuilder::toeplitz(2, 0.6), 20000, rng);
    const SquareMatrix c2 = sample_cov(x2);
    CHECK(c2(0, 1) / std::sqrt(c2(0, 0) * c2(1, 1)) == doctest::Approx(0.6).epsilon(0.02 / 0.6));

    const auto cov = CovarianceBuilder::toeplitz(3, 0.6);
    const SquareMatrix c3 = sample_cov(sample_design(cov, 100000, rng));
    CHECK((c3 - cov.sigma()).cwiseAbs().maxCoeff() <= 0.02);
  }

  TEST_CASE("gamma = 0 follows the identity path") {
    Rng a(2), b(2);
    const Matrix xi = sample_design(CovarianceBuilder::identity(5), 50, a);
    const Matrix xt = sample_design(CovarianceBuilder::toeplitz(5, 0.0), 50, b);
    CHECK(xi == xt);
  }

  TEST_CASE("random orthonormal bases") {
    Rng rng(3);
    const Matrix u1 = random_orthonormal(7, 1, rng);
    CHECK(u1.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix u = random_orthonormal(10, 4, rng);
    CHECK((u.transpose() * u - SquareMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    const auto cov = CovarianceBuilder::low_rank(u);
    const Vector ev = Eigen::SelfAdjointEigenSolver<SquareMatrix>(cov.sigma()).eigenvalues();
    for (Index i = 0; i < 6; ++i) CHECK(std::abs(ev(i)) <= 1e-8);
    for (Index i = 6; i < 10; ++i) CHECK(std::abs(ev(i) - 1.0) <= 1e-8);

    const Matrix full = random_orthonormal(6, 6, rng);
    const Vector evf = jacobi_eigen(full * full.transpose()).values;
    for (Index i = 0; i < 6; ++i) CHECK(std::abs(evf(i) - 1.0) <= 1e-8);
    CHECK_THROWS_AS(random_orthonormal(3, 4, rng), ConfigError);

    Vector v = Vector::LinSpaced(10, -1, 1);
    CHECK(cov.quad_form(v) == doctest::Approx(v.dot(cov.sigma() * v)));
  }

  TEST_CASE("full-rank low-rank design is isotropic") {
    Rng rng(4);
    const auto cov = CovarianceBuilder::low_rank(random_orthonormal(4, 4, rng));
    const SquareMatrix c = sample_cov(sample_design(cov, 40000, rng));
    CHECK((c - SquareMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 0.03);
  }

  TEST_CASE("Jacobi eigensolver against a dense solver") {
    Rng rng(5);
    SquareMatrix a(12, 12);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    a = (a + a.transpose()).eval();
    const EigenDecomposition e = jacobi_eigen(a);
    const Vector ref = Eigen::SelfAdjointEigenSolver<SquareMatrix>(a).eigenvalues();
    CHECK((e.values - ref).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((e.vectors.transpose() * e.vectors - SquareMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("symmetric square root") {
    CHECK(symmetric_sqrt(SquareMatrix::Identity(3, 3)).isApprox(SquareMatrix::Identity(3, 3), 1e-14));
    SquareMatrix d = SquareMatrix::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    const SquareMatrix rd = symmetric_sqrt(d);
    CHECK(rd(0, 0) == doctest::Approx(2.0));
    CHECK(rd(1, 1) == doctest::Approx(3.0));
    CHECK(rd(0, 1) == 0.0);

    const SquareMatrix t = CovarianceBuilder::toeplitz(50, 0.6).sigma();
    const SquareMatrix root = symmetric_sqrt(t);
    CHECK((root * root - t).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(asymmetry(root) <= 1e-12);

    SquareMatrix bad = t;
    bad(0, 1) += 1e-6;
    CHECK_THROWS_AS(symmetric_sqrt(bad), ConfigError);
    SquareMatrix neg = SquareMatrix::Identity(2, 2);
    neg(1, 1) = -1;
    CHECK_THROWS_AS(symmetric_sqrt(neg), ConfigError);
  }

  TEST_CASE("pseudo-inverse solve of the square root") {
    Rng rng(6);
    const Matrix u = random_orthonormal(5, 2, rng);
    const SquareMatrix sigma = u * u.transpose();
    const EigenDecomposition e = jacobi_eigen(sigma);
    const SquareMatrix root = symmetric_sqrt(sigma);
    const Vector inside = u * Vector::Ones(2);
    CHECK((root * sqrt_pseudo_solve(e, inside) - inside).norm() <= 1e-10);
    Vector outside = Vector::Zero(5);
    outside(0) = 1.0;
    CHECK((root * sqrt_pseudo_solve(e, outside) - outside).norm() > 1e-3);
  }

  TEST_CASE("M1 coefficients") {
    const ScenarioSpec spec = ScenarioSpec::m1(300, 40, 40, 2.5, 7);
    Rng rng(7);
    const auto cov = make_covariance(spec, rng);
    const auto [b0, b1] = build_betas(spec, cov, rng);
    CHECK(b0.norm() == doctest::Approx(2.5).epsilon(1e-12));
    CHECK((b0 + b1).isZero(0.0));

    const ScenarioSpec sparse = ScenarioSpec::m1(300, 40, 3, 1.0, 8);
    const auto [s0, s1] = build_betas(sparse, CovarianceBuilder::identity(40), rng);
    CHECK(count_nonzero(s0, 0.0) == 3);
    CHECK(s0.norm() == doctest::Approx(1.0));
  }

  TEST_CASE("M2 under identity covariance: both sparsity modes coincide") {
    ScenarioSpec standard = ScenarioSpec::m2(20, 4, 2.0, 0.0, 0.5, SparsityMode::Standard, 9);
    ScenarioSpec inherent = standard;
    inherent.sparsity_mode = SparsityMode::Inherent;
    Rng ra(9), rb(9);
    const auto [a0, a1] = build_betas(standard, make_covariance(standard, ra), ra);
    const auto [c0, c1] = build_betas(inherent, make_covariance(inherent, rb), rb);
    CHECK(a0 == c0);
    CHECK(a1 == c1);
    CHECK(generate(standard).data.y() == generate(inherent).data.y());
  }

  TEST_CASE("M2 inherent sparsity") {
    const Index s = 5;
    const double rho = 3.0;
    const ScenarioSpec spec = ScenarioSpec::m2(30, s, rho, 0.6, 1.0, SparsityMode::Inherent, 10);
    Rng rng(10);
    const auto cov = make_covariance(spec, rng);
    const auto [b0, b1] = build_betas(spec, cov, rng);
    const Vector delta = b1 - b0;
    const Vector rd = symmetric_sqrt(cov.sigma()) * delta;
    CHECK(rd.norm() == doctest::Approx(rho).epsilon(1e-8));
    CHECK(count_nonzero(rd, 1e-8) == s);
    for (Index i = 0; i < rd.size(); ++i) {
      if (std::abs(rd(i)) > 1e-8) CHECK(std::abs(rd(i)) == doctest::Approx(rho / std::sqrt(double(s))).epsilon(1e-8));
    }
    const Vector mu = (b0 + b1) / 2;
    CHECK(std::sqrt(cov.quad_form(mu)) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("M2 standard sparsity") {
    const ScenarioSpec spec = ScenarioSpec::m2(30, 6, 2.0, -0.6, 0.0, SparsityMode::Standard, 11);
    Rng rng(11);
    const auto cov = make_covariance(spec, rng);
    const auto [b0, b1] = build_betas(spec, cov, rng);
    const Vector delta = b1 - b0;
    CHECK(count_nonzero(delta, 0.0) == 6);
    CHECK(std::sqrt(cov.quad_form(delta)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((b0 + b1).isZero(0.0));
  }

  TEST_CASE("scenario defaults and validation") {
    const ScenarioSpec m1 = ScenarioSpec::m1(400, 10, 1, 1.0);
    CHECK(m1.theta == 100);
    const ScenarioSpec m2 = ScenarioSpec::m2(10, 1, 1.0, 0.6, 0.0, SparsityMode::Standard);
    CHECK(m2.n == 300);
    CHECK(m2.theta == 75);
    ScenarioSpec bad = m1;
    bad.s = 11;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m1;
    bad.theta = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m1;
    bad.r = 11;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m2;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(parse_scenario("M1_RANK_DEFICIENT") == ScenarioKind::M1RankDeficient);
    CHECK_THROWS_AS(parse_sparsity("sparse"), ConfigError);
  }

  TEST_CASE("noiseless no-change sample") {
    ScenarioSpec spec = ScenarioSpec::m2(8, 2, 0.0, 0.6, 1.0, SparsityMode::Standard, 12);
    spec.sigma = 0.0;
    const GeneratedSample g = generate(spec);
    CHECK(g.truth.theta() == 300);
    CHECK(g.truth.beta0() == g.truth.beta1());
    const Vector fitted = g.data.x() * g.truth.beta0();
    CHECK((g.data.y() - fitted).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("seed determinism") {
    const ScenarioSpec spec = ScenarioSpec::m1_rank_deficient(100, 20, 5, 2, 1.5, 13);
    const GeneratedSample a = generate(spec);
    const GeneratedSample b = generate(spec);
    CHECK(a.data.x() == b.data.x());
    CHECK(a.data.y() == b.data.y());
    ScenarioSpec other = spec;
    other.seed = 14;
    CHECK(generate(other).data.y() != a.data.y());
  }

  TEST_CASE("rank-deficient design lives in an r-dimensional subspace") {
    const GeneratedSample g = generate(ScenarioSpec::m1_rank_deficient(200, 12, 3, 1, 1.0, 15));
    const Vector sv = Eigen::SelfAdjointEigenSolver<SquareMatrix>(
                          SquareMatrix(g.data.x().transpose() * g.data.x()))
                          .eigenvalues();
    for (Index i = 0; i < 9; ++i) CHECK(std::abs(sv(i)) <= 1e-8 * sv(11));
    CHECK(sv(9) > 1.0);
  }

  TEST_CASE("Psi matches the Monte-Carlo response spread") {
    const ScenarioSpec spec = ScenarioSpec::m2(6, 3, 2.0, 0.6, 1.0, SparsityMode::Standard, 16);
    const GeneratedSample g = generate(spec);
    Rng rng(17);
    const auto cov = CovarianceBuilder::toeplitz(6, 0.6);
    const Matrix x = sample_design(cov, 100000, rng);
    const Vector f0 = x * g.truth.beta0();
    const Vector f1 = x * g.truth.beta1();
    auto sd = [](const Vector& v) { return std::sqrt((v.array() - v.mean()).square().sum() / double(v.size() - 1)); };
    const double mc = std::max({sd(f0), sd(f1), 1.0});
    CHECK(std::abs(g.truth.psi() - mc) <= 0.03 * g.truth.psi());
  }
}
