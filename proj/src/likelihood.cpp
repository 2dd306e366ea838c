#include "sdelab/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdelab/stats.hpp"

namespace sdelab {

void Dataset::validate() const {
  if (!design.T.empty() &&
      design.T.size() != stats.size()) {
    throw std::invalid_argument("Dataset: design/stats length mismatch");
  }
  for (const SuffStats& s : stats) {
    if (!(s.V >= 0.0) || !std::isfinite(s.V) || !std::isfinite(s.U)) {
      throw std::invalid_argument(
          "Dataset: statistics must be finite with V >= 0");
    }
  }
}

double log_lik_single(const Theta& theta, const SuffStats& s) {
  const double d = 1.0 + theta.omega2 * s.V;
  const double num =
      (-theta.mu * theta.mu * s.V + 2.0 * theta.mu * s.U +
       theta.omega2 * s.U * s.U);
  return -0.5 * std::log(d) + num / (2.0 * d);
}

double log_lik_total(const Theta& theta, const Dataset& data) {
  double ll = 0.0;
  for (const SuffStats& s : data.stats) ll += log_lik_single(theta, s);
  return ll;
}

Eigen::Vector2d score(const Theta& theta, const Dataset& data) {
  double gm = 0.0;
  double gw = 0.0;
  for (const SuffStats& s : data.stats) {
    const double d = 1.0 + theta.omega2 * s.V;
    const double r = s.U - theta.mu * s.V;
    gm += r / d;
    gw += -s.V / (2.0 * d) + r * r / (2.0 * d * d);
  }
  return Eigen::Vector2d(gm, gw);
}

Eigen::Matrix2d hessian(const Theta& theta, const Dataset& data) {
  double hmm = 0.0;
  double hmw = 0.0;
  double hww = 0.0;
  for (const SuffStats& s : data.stats) {
    const double d = 1.0 + theta.omega2 * s.V;
    const double r = s.U - theta.mu * s.V;
    hmm -= s.V / d;
    hmw -= r * s.V / (d * d);
    hww += s.V * s.V / (2.0 * d * d) - r * r * s.V / (d * d * d);
  }
  Eigen::Matrix2d h;
  h << hmm, hmw, hmw, hww;
  return h;
}

namespace {

Eigen::Vector2d as_vec(const Theta& t) {
  return Eigen::Vector2d(t.mu, t.omega2);
}

Theta as_theta(const Eigen::Vector2d& v) { return Theta{v(0), v(1)}; }

// Gradient with components pointing out of the box zeroed on active faces;
// its norm is the box-constrained stationarity measure.
Eigen::Vector2d project_gradient(const Eigen::Vector2d& g, const Theta& th,
                                 const ParamSpace& space) {
  Eigen::Vector2d pg = g;
  if ((th.mu <= space.mu_lo && g(0) < 0.0) ||
      (th.mu >= space.mu_hi && g(0) > 0.0)) {
    pg(0) = 0.0;
  }
  if ((th.omega2 <= space.omega2_lo && g(1) < 0.0) ||
      (th.omega2 >= space.omega2_hi && g(1) > 0.0)) {
    pg(1) = 0.0;
  }
  return pg;
}

// Single damped-Newton ascent from one start.
MleResult ascend(const Dataset& data, const ParamSpace& space,
                 const Theta& start, const MleOptions& opts) {
  MleResult res;
  Theta th = space.clamp(start);
  double ll = log_lik_total(th, data);
  double lambda = 0.0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::Vector2d g = score(th, data);
    const Eigen::Vector2d pg = project_gradient(g, th, space);
    res.grad_norm = pg.lpNorm<Eigen::Infinity>();
    // Scale-aware stationarity: with |loglik| of order 10^3, absolute
    // gradient norms below ~1e-7 are already at the resolution where Armijo
    // gains round to zero in double precision.
    if (res.grad_norm <= opts.grad_tol * (1.0 + std::abs(ll))) {
      res.converged = true;
      break;
    }
    const Eigen::Matrix2d h = hessian(th, data);

    // Levenberg-damped Newton direction: solve (-H + lambda I) d = g with
    // lambda raised until the matrix is positive definite and d ascends.
    const double hscale =
        std::max(1.0, h.cwiseAbs().maxCoeff());
    Eigen::Vector2d dir = pg;  // steepest-ascent fallback
    double lam = lambda;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::Matrix2d m = -h + lam * Eigen::Matrix2d::Identity();
      const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      if (m(0, 0) > 0.0 && det > 0.0) {
        Eigen::Vector2d d;
        d(0) = (m(1, 1) * g(0) - m(0, 1) * g(1)) / det;
        d(1) = (m(0, 0) * g(1) - m(1, 0) * g(0)) / det;
        if (d.dot(g) > 0.0 && d.allFinite()) {
          dir = d;
          lambda = lam;
          break;
        }
      }
      lam = (lam == 0.0) ? 1e-6 * hscale : 4.0 * lam;
    }

    // Backtracking Armijo search along the projected path.
    bool moved = false;
    for (int pass = 0; pass < 2 && !moved; ++pass) {
      const Eigen::Vector2d d = (pass == 0) ? dir : pg;
      double t = 1.0;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const Theta cand = space.clamp(as_theta(as_vec(th) + t * d));
        const Eigen::Vector2d step = as_vec(cand) - as_vec(th);
        if (step.isZero(0.0)) continue;
        const double slope = g.dot(step);
        if (slope <= 0.0) continue;
        const double cll = log_lik_total(cand, data);
        if (cll >= ll + 1e-4 * slope) {
          th = cand;
          ll = cll;
          lambda *= 0.25;
          moved = true;
          break;
        }
      }
    }
    if (!moved) break;  // no representable ascent step remains
  }
  res.theta = th;
  res.loglik = ll;
  res.iterations = iter;
  return res;
}

}  // namespace

MleResult mle(const Dataset& data, const ParamSpace& space, const Theta& init,
              const MleOptions& opts) {
  if (data.stats.empty()) throw std::invalid_argument("mle: empty dataset");
  data.validate();

  // Deterministic starts: caller init, box center, and four spread points
  // on a (mu, log omega2) lattice (one per row and column).
  const double mw = space.mu_hi - space.mu_lo;
  const double lw_lo = std::log(space.omega2_lo);
  const double lw_hi = std::log(space.omega2_hi);
  auto lattice = [&](double fm, double fw) {
    return Theta{space.mu_lo + fm * mw,
                 std::exp(lw_lo + fw * (lw_hi - lw_lo))};
  };
  const Theta starts[6] = {
      space.clamp(init),        space.center(),
      lattice(0.125, 0.625),    lattice(0.375, 0.125),
      lattice(0.625, 0.875),    lattice(0.875, 0.375),
  };

  MleResult best;
  bool have = false;
  for (const Theta& s : starts) {
    MleResult r = ascend(data, space, s, opts);
    if (!have || r.loglik > best.loglik) {
      best = r;
      have = true;
    }
  }
  return best;
}

double mle_profile_mu(const Dataset& data, double omega2) {
  if (!(omega2 > 0.0)) {
    throw std::invalid_argument("mle_profile_mu: omega2 must be > 0");
  }
  double num = 0.0;
  double den = 0.0;
  for (const SuffStats& s : data.stats) {
    const double d = 1.0 + omega2 * s.V;
    num += s.U / d;
    den += s.V / d;
  }
  return den > 0.0 ? num / den : 0.0;
}

FisherInfo observed_fisher(const Dataset& data, const Theta& theta_hat) {
  FisherInfo info;
  const Eigen::Matrix2d m = -hessian(theta_hat, data);
  // Closed-form eigenvalues of the symmetric 2x2.
  const double tr2 = 0.5 * (m(0, 0) + m(1, 1));
  const double gap = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
  const double lam_min = tr2 - gap;
  if (!m.allFinite() || !(lam_min > 1e-10)) {
    info.matrix = Eigen::Matrix2d::Identity();
    info.fallback_used = true;
  } else {
    info.matrix = m;
    info.fallback_used = false;
  }
  return info;
}

LrtResult lrt_stat(const Dataset& data, const Theta& theta0,
                   const ParamSpace& space) {
  if (data.stats.empty()) {
    throw std::invalid_argument("lrt_stat: empty dataset");
  }
  const MleResult fit = mle(data, space, theta0);
  LrtResult r;
  r.theta_hat = fit.theta;
  r.converged = fit.converged;
  r.z2 = std::max(0.0, 2.0 * (fit.loglik - log_lik_total(theta0, data)));
  return r;
}

KlEstimate kl_mc(const Theta& theta0, const Theta& theta,
                 const ModelSpec& model, double x0, double T, long nsim,
                 Rng& rng, long m_disc) {
  if (nsim < 2) throw std::invalid_argument("kl_mc: nsim must be >= 2");
  if (!(T > 0.0)) throw std::invalid_argument("kl_mc: T must be > 0");
  if (!(theta0.omega2 > 0.0) || !(theta.omega2 > 0.0)) {
    throw std::invalid_argument("kl_mc: omega2 must be > 0");
  }
  const bool unit = (model.label == "unit");
  const double omega0 = std::sqrt(theta0.omega2);
  std::vector<double> diffs(static_cast<std::size_t>(nsim));
  for (long j = 0; j < nsim; ++j) {
    const double phi = theta0.mu + omega0 * rng.normal();
    SuffStats s;
    if (unit) {
      s = suff_stats_exact_unit(phi, T, std::sqrt(T) * rng.normal());
    } else {
      const std::vector<double> dw = brownian_increments(T, m_disc, rng);
      s = em_suff_stats(model, phi, x0, T, dw);
    }
    diffs[static_cast<std::size_t>(j)] =
        log_lik_single(theta0, s) - log_lik_single(theta, s);
  }
  KlEstimate est;
  est.estimate = mean(diffs);
  est.std_error =
      std::sqrt(variance(diffs) / static_cast<double>(nsim));
  return est;
}

}  // namespace sdelab
