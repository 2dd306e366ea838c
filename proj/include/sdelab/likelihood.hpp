#pragma once

#include <Eigen/Dense>

#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"
#include "sdelab/rng.hpp"

namespace sdelab {

/// Per-subject sufficient statistics plus the design that produced them.
/// Inference depends on the data only through the (U_i, V_i) pairs.
struct Dataset {
  std::vector<SuffStats> stats;
  Design design;

  int n() const { return static_cast<int>(stats.size()); }
  void validate() const;  // throws on V_i < 0 or length mismatch
};

/// Marginal log likelihood of one subject, in the numerically stable
/// expanded form
///   log f = -1/2 log(1 + w V) + (-mu^2 V + 2 mu U + w U^2) / (2 (1 + w V)),
/// with w = omega2.  Algebraically equal to the product-form density
/// wherever the latter (which contains U/V) is defined, and continuous at
/// V = 0.
double log_lik_single(const Theta& theta, const SuffStats& s);

/// Sum of log_lik_single over subjects; 0 for an empty dataset.
double log_lik_total(const Theta& theta, const Dataset& data);

/// Analytic gradient of log_lik_total in (mu, omega2).  With
/// D_i = 1 + omega2 V_i and r_i = U_i - mu V_i:
///   d/dmu     = sum r_i / D_i
///   d/domega2 = sum [ -V_i / (2 D_i) + r_i^2 / (2 D_i^2) ]
Eigen::Vector2d score(const Theta& theta, const Dataset& data);

/// Analytic Hessian of log_lik_total:
///   d2/dmu2          = sum -V_i / D_i
///   d2/dmu domega2   = sum -r_i V_i / D_i^2
///   d2/domega2^2     = sum [ V_i^2 / (2 D_i^2) - r_i^2 V_i / D_i^3 ]
Eigen::Matrix2d hessian(const Theta& theta, const Dataset& data);

struct MleOptions {
  int max_iterations = 500;
  // Converged when the projected-gradient infinity norm drops below
  // grad_tol * (1 + |loglik|); the relative form keeps the criterion
  // attainable at any data scale.
  double grad_tol = 1e-8;
};

struct MleResult {
  Theta theta;
  double loglik = 0.0;
  double grad_norm = 0.0;  // projected-gradient infinity norm at theta
  int iterations = 0;
  bool converged = false;
};

/// Box-constrained maximum likelihood via multi-start damped-Newton ascent
/// (5 deterministic starts: init, box center, and four spread points on
/// (mu, log omega2)).  Guarantees loglik(result) >= loglik(clamped init).
MleResult mle(const Dataset& data, const ParamSpace& space, const Theta& init,
              const MleOptions& opts = {});

/// Closed-form maximizer over mu alone with omega2 held fixed:
/// mu_hat = sum(U_i / (1 + omega2 V_i)) / sum(V_i / (1 + omega2 V_i)).
/// Returns 0 for datasets with no information (all V_i = 0).
double mle_profile_mu(const Dataset& data, double omega2);

/// Observed information -hessian(theta_hat) with a guarded fallback: when
/// any eigenvalue of -hessian is <= 1e-10 (or non-finite), the matrix is
/// replaced by the 2x2 identity and fallback_used is set.
struct FisherInfo {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  bool fallback_used = false;
};

FisherInfo observed_fisher(const Dataset& data, const Theta& theta_hat);

/// Likelihood ratio statistic Z^2 = 2 [l(theta_hat) - l(theta0)], clamped
/// at 0 (the optimizer can land a hair below the supremum).
struct LrtResult {
  double z2 = 0.0;
  Theta theta_hat;
  bool converged = false;
};

LrtResult lrt_stat(const Dataset& data, const Theta& theta0,
                   const ParamSpace& space);

/// Monte Carlo Kullback-Leibler divergence K(theta0, theta) for a single
/// subject: average of log f(U,V | theta0) - log f(U,V | theta) over nsim
/// fresh draws of (U, V) under theta0.  The unit model samples (U, V)
/// exactly (U = phi T + W_T with W_T ~ N(0, T), V = T); other models
/// simulate an Euler path with m_disc steps.
struct KlEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

KlEstimate kl_mc(const Theta& theta0, const Theta& theta,
                 const ModelSpec& model, double x0, double T, long nsim,
                 Rng& rng, long m_disc = 1000);

}  // namespace sdelab
