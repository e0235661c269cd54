#include "cpscan/simgen.hpp"

#include <cmath>
#include <sstream>

namespace cpscan {

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::M1:
      return "M1";
    case ScenarioKind::M2:
      return "M2";
    case ScenarioKind::M1RankDeficient:
      break;
  }
  return "M1_RANK_DEFICIENT";
}

std::string_view to_string(SparsityMode m) {
  return m == SparsityMode::Standard ? "STANDARD" : "INHERENT";
}

ScenarioKind parse_scenario(std::string_view s) {
  if (s == "M1" || s == "m1") return ScenarioKind::M1;
  if (s == "M2" || s == "m2") return ScenarioKind::M2;
  if (s == "M1_RANK_DEFICIENT" || s == "m1_rank_deficient") return ScenarioKind::M1RankDeficient;
  throw ConfigError("unknown scenario '" + std::string(s) + "'");
}

SparsityMode parse_sparsity(std::string_view s) {
  if (s == "STANDARD" || s == "standard") return SparsityMode::Standard;
  if (s == "INHERENT" || s == "inherent") return SparsityMode::Inherent;
  throw ConfigError("unknown sparsity mode '" + std::string(s) + "'");
}

ScenarioSpec ScenarioSpec::m1(Index n, Index p, Index s, double rho, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = ScenarioKind::M1;
  spec.n = n;
  spec.p = p;
  spec.theta = n / 4;
  spec.s = s;
  spec.rho = rho;
  spec.seed = seed;
  return spec;
}

ScenarioSpec ScenarioSpec::m2(Index p, Index s, double rho, double gamma, double nu, SparsityMode mode,
                              std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = ScenarioKind::M2;
  spec.n = 300;
  spec.theta = 75;
  spec.p = p;
  spec.s = s;
  spec.rho = rho;
  spec.gamma = gamma;
  spec.nu = nu;
  spec.sparsity_mode = mode;
  spec.seed = seed;
  return spec;
}

ScenarioSpec ScenarioSpec::m1_rank_deficient(Index n, Index p, Index r, Index s, double rho, std::uint64_t seed) {
  ScenarioSpec spec = m1(n, p, s, rho, seed);
  spec.scenario = ScenarioKind::M1RankDeficient;
  spec.r = r;
  return spec;
}

void ScenarioSpec::validate() const {
  std::ostringstream msg;
  if (n < 4) msg << "n must be >= 4; ";
  if (p < 1) msg << "p must be >= 1; ";
  if (theta < 1 || theta > n) msg << "theta must lie in [1, n]; ";
  if (s < 1 || s > p) msg << "s must lie in [1, p]; ";
  if (r < 0 || r > p) msg << "r must lie in [1, p] (0 = p); ";
  if (!(std::abs(gamma) < 1.0)) msg << "|gamma| must be < 1; ";
  if (!(rho >= 0.0) || !std::isfinite(rho)) msg << "rho must be finite and >= 0; ";
  if (!(nu >= 0.0) || !std::isfinite(nu)) msg << "nu must be finite and >= 0; ";
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) msg << "sigma must be finite and >= 0; ";
  const std::string problems = msg.str();
  if (!problems.empty()) throw ConfigError("invalid scenario: " + problems.substr(0, problems.size() - 2));
}

CovarianceBuilder::CovarianceBuilder(Kind kind, Index p, double gamma, Matrix u)
    : kind_(kind), p_(p), gamma_(gamma), u_(std::move(u)) {}

CovarianceBuilder CovarianceBuilder::identity(Index p) {
  return CovarianceBuilder(Kind::Identity, p, 0.0, Matrix());
}

CovarianceBuilder CovarianceBuilder::toeplitz(Index p, double gamma) {
  if (!(std::abs(gamma) < 1.0)) throw ConfigError("Toeplitz covariance needs |gamma| < 1");
  return CovarianceBuilder(Kind::Toeplitz, p, gamma, Matrix());
}

CovarianceBuilder CovarianceBuilder::low_rank(Matrix u) {
  const Index p = u.rows();
  return CovarianceBuilder(Kind::LowRank, p, 0.0, std::move(u));
}

SquareMatrix CovarianceBuilder::sigma() const {
  switch (kind_) {
    case Kind::Identity:
      return SquareMatrix::Identity(p_, p_);
    case Kind::Toeplitz: {
      SquareMatrix s(p_, p_);
      for (Index i = 0; i < p_; ++i) {
        for (Index j = 0; j < p_; ++j) s(i, j) = std::pow(gamma_, static_cast<double>(std::abs(i - j)));
      }
      return s;
    }
    case Kind::LowRank:
      break;
  }
  return u_ * u_.transpose();
}

const EigenDecomposition& CovarianceBuilder::eigen() const {
  if (!eigen_) {
    if (kind_ == Kind::Identity) {
      EigenDecomposition e;
      e.values = Vector::Ones(p_);
      e.vectors = SquareMatrix::Identity(p_, p_);
      eigen_ = std::make_shared<const EigenDecomposition>(std::move(e));
    } else {
      eigen_ = std::make_shared<const EigenDecomposition>(jacobi_eigen(sigma()));
    }
  }
  return *eigen_;
}

const SquareMatrix& CovarianceBuilder::sqrt() const {
  if (!sqrt_) {
    const EigenDecomposition& e = eigen();
    const Vector roots = e.values.cwiseMax(0.0).cwiseSqrt();
    sqrt_ = std::make_shared<const SquareMatrix>(e.vectors * roots.asDiagonal() * e.vectors.transpose());
  }
  return *sqrt_;
}

double CovarianceBuilder::quad_form(const Vector& v) const {
  switch (kind_) {
    case Kind::Identity:
      return v.squaredNorm();
    case Kind::Toeplitz:
      return v.dot(sigma() * v);
    case Kind::LowRank:
      break;
  }
  return (u_.transpose() * v).squaredNorm();
}

Matrix sample_design(const CovarianceBuilder& builder, Index n, Rng& rng) {
  const Index p = builder.p();
  Matrix x(n, p);
  switch (builder.kind()) {
    case CovarianceBuilder::Kind::Identity:
      for (Index t = 0; t < n; ++t) {
        for (Index j = 0; j < p; ++j) x(t, j) = rng.normal();
      }
      break;
    case CovarianceBuilder::Kind::Toeplitz: {
      const double g = builder.gamma();
      const double innov = std::sqrt(1.0 - g * g);
      for (Index t = 0; t < n; ++t) {
        double prev = rng.normal();
        x(t, 0) = prev;
        for (Index j = 1; j < p; ++j) {
          prev = g * prev + innov * rng.normal();
          x(t, j) = prev;
        }
      }
      break;
    }
    case CovarianceBuilder::Kind::LowRank: {
      const Matrix& u = builder.basis();
      Vector latent(u.cols());
      for (Index t = 0; t < n; ++t) {
        for (Index i = 0; i < latent.size(); ++i) latent(i) = rng.normal();
        x.row(t) = (u * latent).transpose();
      }
      break;
    }
  }
  return x;
}

Matrix random_orthonormal(Index p, Index r, Rng& rng) {
  if (r < 1 || r > p) throw ConfigError("random_orthonormal needs 1 <= r <= p");
  Eigen::MatrixXd q(p, r);
  for (Index c = 0; c < r; ++c) {
    while (true) {
      Vector v(p);
      for (Index i = 0; i < p; ++i) v(i) = rng.normal();
      const double start = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (Index prev = 0; prev < c; ++prev) v -= q.col(prev).dot(v) * q.col(prev);
      }
      const double norm = v.norm();
      if (norm > 1e-10 * start) {
        q.col(c) = v / norm;
        break;
      }
      // numerically dependent draw: redraw this column
    }
  }
  return q;
}

CovarianceBuilder make_covariance(const ScenarioSpec& spec, Rng& rng) {
  switch (spec.scenario) {
    case ScenarioKind::M1:
      return CovarianceBuilder::identity(spec.p);
    case ScenarioKind::M2:
      return CovarianceBuilder::toeplitz(spec.p, spec.gamma);
    case ScenarioKind::M1RankDeficient:
      break;
  }
  return CovarianceBuilder::low_rank(random_orthonormal(spec.p, spec.rank(), rng));
}

std::pair<Vector, Vector> build_betas(const ScenarioSpec& spec, const CovarianceBuilder& cov, Rng& rng) {
  const Index p = spec.p;
  if (spec.scenario != ScenarioKind::M2) {
    const auto support = rng.sample_without_replacement(p, spec.s);
    Vector values(spec.s);
    for (Index i = 0; i < spec.s; ++i) values(i) = rng.normal();
    values /= values.norm();
    Vector direction = Vector::Zero(p);
    for (Index i = 0; i < spec.s; ++i) direction(support[i]) = values(i);
    return {spec.rho * direction, -spec.rho * direction};
  }

  Vector mu0(p);
  for (Index j = 0; j < p; ++j) mu0(j) = rng.normal();
  Vector mu = Vector::Zero(p);
  if (spec.nu > 0.0) mu = spec.nu * mu0 / std::sqrt(cov.quad_form(mu0));

  const auto support = rng.sample_without_replacement(p, spec.s);
  Vector target = Vector::Zero(p);
  for (Index i = 0; i < spec.s; ++i) target(support[i]) = rng.below(2) == 0 ? 1.0 : -1.0;

  Vector delta0 = target;
  if (spec.sparsity_mode == SparsityMode::Inherent) {
    delta0 = sqrt_pseudo_solve(cov.eigen(), target);
    const double residual = (cov.sqrt() * delta0 - target).norm();
    if (residual > 1e-8 * target.norm()) {
      std::ostringstream msg;
      msg << "inherent sparsity target is outside the column space of Sigma^{1/2} (residual " << residual << ")";
      throw ConfigError(msg.str());
    }
  }
  Vector delta = Vector::Zero(p);
  if (spec.rho > 0.0) delta = spec.rho * delta0 / std::sqrt(cov.quad_form(delta0));
  return {mu - delta / 2.0, mu + delta / 2.0};
}

GeneratedSample generate(const ScenarioSpec& spec) {
  spec.validate();
  Rng param_rng(derive_seed(spec.seed, {0}));
  Rng design_rng(derive_seed(spec.seed, {1}));
  Rng noise_rng(derive_seed(spec.seed, {2}));

  const CovarianceBuilder cov = make_covariance(spec, param_rng);
  auto [beta0, beta1] = build_betas(spec, cov, param_rng);
  Matrix x = sample_design(cov, spec.n, design_rng);

  const Index theta = spec.has_change() ? spec.theta : spec.n;
  Vector y(spec.n);
  for (Index t = 0; t < spec.n; ++t) {
    const Vector& beta = t < theta ? beta0 : beta1;
    y(t) = x.row(t).dot(beta) + spec.sigma * noise_rng.normal();
  }
  PopulationModel truth(cov.sigma(), std::move(beta0), std::move(beta1), spec.sigma, theta, spec.n);
  return {Dataset(std::move(x), std::move(y)), std::move(truth)};
}

}  // namespace cpscan
