#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>

#include "cpscan/dataset.hpp"
#include "cpscan/detectors.hpp"
#include "cpscan/linalg.hpp"
#include "cpscan/rng.hpp"

namespace cpscan {

enum class ScenarioKind { M1, M2, M1RankDeficient };
enum class SparsityMode { Standard, Inherent };

std::string_view to_string(ScenarioKind k);
std::string_view to_string(SparsityMode m);
ScenarioKind parse_scenario(std::string_view s);
SparsityMode parse_sparsity(std::string_view s);

/// Generative parameters of one synthetic scenario.
///
/// M1: Sigma = I, beta0 = -beta1 = rho * delta with delta uniform on the unit
///     sphere of a uniformly drawn support of size s.
/// M1RankDeficient: as M1 with x_t = U_r xtilde_t, U_r random orthonormal p x r.
/// M2: Sigma = Toeplitz(gamma), beta0 = mu - delta/2, beta1 = mu + delta/2,
///     mu = nu mu0 / |Sigma^{1/2} mu0|, delta = rho delta0 / |Sigma^{1/2} delta0|.
/// rho = 0 gives a no-change sample, recorded with theta = n.
struct ScenarioSpec {
  ScenarioKind scenario = ScenarioKind::M1;
  Index n = 300;
  Index p = 900;
  Index theta = 75;
  double sigma = 1.0;
  double rho = 2.0;
  double gamma = 0.0;
  double nu = 0.0;
  SparsityMode sparsity_mode = SparsityMode::Standard;
  Index s = 1;
  Index r = 0;  // rank for M1RankDeficient; 0 means p
  std::uint64_t seed = 0;

  /// M1 with theta = n / 4.
  static ScenarioSpec m1(Index n, Index p, Index s, double rho, std::uint64_t seed = 0);
  /// M2 with n = 300 and theta = 75.
  static ScenarioSpec m2(Index p, Index s, double rho, double gamma, double nu, SparsityMode mode,
                         std::uint64_t seed = 0);
  static ScenarioSpec m1_rank_deficient(Index n, Index p, Index r, Index s, double rho, std::uint64_t seed = 0);

  Index rank() const { return r == 0 ? p : r; }
  bool has_change() const { return rho != 0.0; }

  void validate() const;
};

/// Covariance of the regressors: identity, Toeplitz gamma^{|i-j|} (0^0 = 1),
/// or U U^T for an orthonormal p x r matrix U.
class CovarianceBuilder {
 public:
  enum class Kind { Identity, Toeplitz, LowRank };

  static CovarianceBuilder identity(Index p);
  /// Rejects |gamma| >= 1.
  static CovarianceBuilder toeplitz(Index p, double gamma);
  static CovarianceBuilder low_rank(Matrix u);

  Kind kind() const { return kind_; }
  Index p() const { return p_; }
  double gamma() const { return gamma_; }
  const Matrix& basis() const { return u_; }

  SquareMatrix sigma() const;
  /// Eigendecomposition of Sigma, computed once and cached.
  const EigenDecomposition& eigen() const;
  /// Symmetric square root of Sigma, computed once and cached.
  const SquareMatrix& sqrt() const;
  /// v^T Sigma v without forming Sigma.
  double quad_form(const Vector& v) const;

 private:
  CovarianceBuilder(Kind kind, Index p, double gamma, Matrix u);

  Kind kind_;
  Index p_;
  double gamma_;
  Matrix u_;
  mutable std::shared_ptr<const EigenDecomposition> eigen_;
  mutable std::shared_ptr<const SquareMatrix> sqrt_;
};

/// n draws of x_t ~ N(0, Sigma). Toeplitz rows follow the AR(1) recursion
/// x_1 = z_1, x_i = gamma x_{i-1} + sqrt(1 - gamma^2) z_i.
Matrix sample_design(const CovarianceBuilder& builder, Index n, Rng& rng);

/// p x r matrix with orthonormal columns from a Gaussian draw (modified
/// Gram-Schmidt with one reorthogonalisation pass).
Matrix random_orthonormal(Index p, Index r, Rng& rng);

/// (beta0, beta1) for the scenario.
std::pair<Vector, Vector> build_betas(const ScenarioSpec& spec, const CovarianceBuilder& cov, Rng& rng);

CovarianceBuilder make_covariance(const ScenarioSpec& spec, Rng& rng);

struct GeneratedSample {
  Dataset data;
  PopulationModel truth;
};

/// Y_t = x_t^T beta0 + eps_t for t <= theta and x_t^T beta1 + eps_t after,
/// eps ~ N(0, sigma^2). Deterministic in spec (including seed).
GeneratedSample generate(const ScenarioSpec& spec);

}  // namespace cpscan
