#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sdelab/likelihood.hpp"
#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"
#include "sdelab/rng.hpp"

namespace sdelab {

/// Normal posterior summary.  dim = 1 means a posterior over mu alone
/// (omega2 known); the mu block lives in mean(0) / cov(0,0).  dim = 2 is a
/// joint posterior over (mu, omega2).
enum class PosteriorKind { ConjugateMu, DependentMu, Laplace };

struct GaussianPosterior {
  PosteriorKind kind = PosteriorKind::ConjugateMu;
  int dim = 1;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  bool fallback_used = false;

  double mu_mean() const { return mean(0); }
  double mu_var() const { return cov(0, 0); }
  double mu_sd() const;
};

/// Random-walk Metropolis output.  `draws` holds the full chain (one state
/// per step); the first `burn_in` entries are the warm-up prefix.
struct McmcSample {
  std::vector<Theta> draws;
  long burn_in = 0;
  long accepted = 0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;

  std::span<const Theta> post_burn() const;
  /// Post-burn-in draws of one coordinate (0 = mu, 1 = omega2).
  std::vector<double> post_burn_component(int component) const;
};

/// Exact conjugate posterior of mu for iid effects with omega2 known and
/// prior mu ~ N(A, B2):
///   mean = [sum U_i/(1+w V_i) + A/B2] / [sum V_i/(1+w V_i) + 1/B2]
///   var  = 1 / [sum V_i/(1+w V_i) + 1/B2]
/// With no informative subjects (all V_i = 0) this is the prior itself.
GaussianPosterior conjugate_posterior_mu(const Dataset& data, double A,
                                         double B2, double omega2);

/// Posterior of mu when the effects are jointly normal with correlation
/// structure `cov`: derived from the exact marginal U | mu ~ N(mu v, M),
/// v = (V_i), M = diag(V) + omega2 diag(V) R diag(V), and normal-normal
/// conjugacy.  Subjects with V_i = 0 carry no information and are dropped
/// before the solve; if none remain the prior is returned.
GaussianPosterior dependent_posterior_mu(const Dataset& data,
                                         const EffectsCovariance& cov,
                                         double omega2, double A, double B2);

/// Alternative evaluation following a published closed form (with its inner
/// matrix inverse made explicit); kept for regression comparison.  Agrees
/// with dependent_posterior_mu exactly when omega2 = 1 and differs
/// otherwise (the closed form hard-wires a unit effects variance in the
/// prior-precision term).
GaussianPosterior dependent_posterior_mu_reference_form(
    const Dataset& data, const EffectsCovariance& cov, double omega2,
    double A, double B2);

/// Laplace (normal) approximation centered at the MLE.  A NormalMu prior
/// selects the mu sub-model (omega2 pinned at prior.fixed_omega2): the
/// result is 1-dimensional with variance 1 / sum(V_i/(1+w V_i)) and mean at
/// the closed-form profile MLE; the prior's (A, B2) do not enter.  Other
/// priors yield the 2-D approximation N(theta_hat, inverse observed
/// information), with the identity fallback propagated.
GaussianPosterior laplace_approx(const Dataset& data, const Prior& prior,
                                 const ParamSpace& space);

/// Random-walk Metropolis targeting likelihood x prior over the box.
/// Proposals are independent Gaussians per coordinate; omega2 moves on the
/// log scale (step_scale[1] is the sd of the log-omega2 increment) with the
/// Jacobian folded into the acceptance ratio.  A NormalMu prior freezes
/// omega2 at its pinned value and the chain walks mu alone.  The chain
/// starts at the MLE of the targeted (sub-)model.
McmcSample rw_metropolis(const Dataset& data, const Prior& prior,
                         const ParamSpace& space, long steps,
                         const std::array<double, 2>& step_scale, Rng& rng);

/// Default proposal scales: 2.4 x the Laplace posterior sd per coordinate,
/// with the omega2 component mapped to the log scale (sd/omega2_hat).
std::array<double, 2> default_step_scale(const Dataset& data,
                                         const Prior& prior,
                                         const ParamSpace& space);

/// Credible / confidence intervals.
enum class IntervalKind { Hpd, ClassicalCi };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
  IntervalKind kind = IntervalKind::Hpd;
  bool fallback = false;  // set when the interval rests on a Fisher fallback

  double length() const { return hi - lo; }
  bool covers(double x) const { return lo <= x && x <= hi; }
};

/// Highest-density interval of one coordinate.  For a normal posterior this
/// is the symmetric interval mean +- z_(1+level)/2 * sd (the equal-tailed
/// interval is shortest for symmetric unimodal densities); for MCMC samples
/// it is the shortest window containing ceil(level * N) sorted post-burn-in
/// draws (N >= 10 required).
Interval hpd_interval(const GaussianPosterior& post, double level,
                      int component = 0);
Interval hpd_interval(const McmcSample& sample, double level,
                      int component = 0);

/// Wald interval theta_hat[component] +- z * sqrt((info^-1)[c,c]).
Interval classical_ci(const Theta& theta_hat, const FisherInfo& info,
                      double level, int component);

/// Posterior mass of the ball {theta : ||theta - theta0|| < delta}.  A
/// 1-dimensional posterior measures |mu - mu0| < delta by normal CDF
/// arithmetic; the 2-D Gaussian case integrates exactly in one coordinate
/// and by Gauss-Legendre quadrature in the other; samples use the
/// empirical fraction of post-burn-in draws.
double posterior_prob_ball(const GaussianPosterior& post, const Theta& theta0,
                           double delta);
double posterior_prob_ball(const McmcSample& sample, const Theta& theta0,
                           double delta);

/// Chain export with columns iter,mu,omega2 (9 significant digits).
std::string mcmc_to_csv(const McmcSample& sample);

}  // namespace sdelab
