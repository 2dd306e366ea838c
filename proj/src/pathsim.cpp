#include "sdelab/pathsim.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace sdelab {

EffectsCovariance EffectsCovariance::iid() { return EffectsCovariance{}; }

EffectsCovariance EffectsCovariance::tridiagonal(double rho) {
  if (!(std::abs(rho) < 0.5)) {
    throw std::invalid_argument(
        "tridiagonal covariance requires |rho| < 1/2 (positive definite "
        "for every n)");
  }
  return EffectsCovariance{CovKind::Tridiagonal, rho};
}

EffectsCovariance EffectsCovariance::compound_symmetry(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument(
        "compound symmetry covariance requires 0 <= rho < 1");
  }
  return EffectsCovariance{CovKind::CompoundSymmetry, rho};
}

Eigen::MatrixXd EffectsCovariance::matrix(int n) const {
  if (n < 1) throw std::invalid_argument("covariance matrix: n must be >= 1");
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  switch (kind) {
    case CovKind::IID:
      break;
    case CovKind::Tridiagonal:
      for (int i = 0; i + 1 < n; ++i) {
        r(i, i + 1) = rho;
        r(i + 1, i) = rho;
      }
      break;
    case CovKind::CompoundSymmetry:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j) r(i, j) = rho;
        }
      }
      break;
  }
  return r;
}

std::vector<double> sample_effects_iid(int n, const Theta& theta, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_effects_iid: n must be >= 1");
  if (!(theta.omega2 > 0.0)) {
    throw std::invalid_argument("sample_effects_iid: omega2 must be > 0");
  }
  const double omega = std::sqrt(theta.omega2);
  std::vector<double> phi(static_cast<std::size_t>(n));
  for (auto& p : phi) p = theta.mu + omega * rng.normal();
  return phi;
}

std::vector<double> sample_effects_dependent(int n, const Theta& theta,
                                             const EffectsCovariance& cov,
                                             Rng& rng) {
  if (n < 1) {
    throw std::invalid_argument("sample_effects_dependent: n must be >= 1");
  }
  if (!(theta.omega2 > 0.0)) {
    throw std::invalid_argument("sample_effects_dependent: omega2 must be > 0");
  }
  const Eigen::MatrixXd r = cov.matrix(n);
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "sample_effects_dependent: correlation matrix is not positive "
        "definite");
  }
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  const Eigen::VectorXd y = llt.matrixL() * z;
  const double omega = std::sqrt(theta.omega2);
  std::vector<double> phi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    phi[static_cast<std::size_t>(i)] = theta.mu + omega * y(i);
  }
  return phi;
}

std::vector<double> brownian_increments(double T, long m, Rng& rng) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("brownian_increments: T must be > 0");
  }
  if (m < 1) throw std::invalid_argument("brownian_increments: m must be >= 1");
  const double s = std::sqrt(T / static_cast<double>(m));
  std::vector<double> dw(static_cast<std::size_t>(m));
  for (auto& d : dw) d = s * rng.normal();
  return dw;
}

std::vector<double> coarsen_increments(std::span<const double> fine,
                                       std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) {
    throw std::invalid_argument(
        "coarsen_increments: size must be a positive multiple of factor");
  }
  std::vector<double> coarse(fine.size() / factor);
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = j * factor; i < (j + 1) * factor; ++i) s += fine[i];
    coarse[j] = s;
  }
  return coarse;
}

namespace {

// Neumaier-compensated accumulator (branch-free TwoSum): the rounding error
// of `sum` is carried in `comp`, so long sums stay accurate to O(eps)
// independent of length.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;

  void add(double term) {
    const double s = sum + term;
    const double b = s - sum;
    comp += (sum - (s - b)) + (term - b);
    sum = s;
  }
  double value() const { return sum + comp; }
};

// Renormalizing variant for the Euler state: `hi` itself stays within one
// ulp of the exact running sum, so reading the state mid-stream (for
// coefficients and recorded paths) keeps the compensation benefit.
struct CompState {
  double hi = 0.0;
  double lo = 0.0;

  void add(double term) {
    const double s = hi + term;
    const double b = s - hi;
    lo += (hi - (s - b)) + (term - b);
    hi = s + lo;
    lo -= (hi - s);
  }
};

// Shared Euler-Maruyama stepping; `step` receives (k, x_k, b(x_k), sigma(x_k))
// at every grid point k < m and finally (m, x_m, 0, 0).  The state update is
// compensated so that path-end roundoff stays O(eps * |x|) regardless of the
// step count; statistics computed at different grid resolutions of one
// Brownian path then agree to near machine precision.
template <typename StepFn>
void euler_walk(const ModelSpec& model, double phi, double x0, double T,
                std::span<const double> dw, StepFn&& step) {
  if (!(T > 0.0)) throw std::invalid_argument("simulate: T must be > 0");
  if (dw.empty()) {
    throw std::invalid_argument("simulate: need at least one increment");
  }
  if (!std::isfinite(x0) || !std::isfinite(phi)) {
    throw std::invalid_argument("simulate: phi and x0 must be finite");
  }
  const long m = static_cast<long>(dw.size());
  const double h = T / static_cast<double>(m);
  CompState x;
  x.hi = x0;
  for (long k = 0; k < m; ++k) {
    const double bx = model.b(x.hi);
    const double sx = model.sigma(x.hi);
    if (!(sx > 0.0) || !std::isfinite(sx) || !std::isfinite(bx)) {
      throw SimulationError(
          "diffusion coefficient invalid at step " + std::to_string(k) +
              " of model '" + model.label + "'",
          k);
    }
    step(k, x.hi, bx, sx);
    x.add(phi * bx * h + sx * dw[static_cast<std::size_t>(k)]);
    if (!std::isfinite(x.hi)) {
      throw SimulationError(
          "path diverged at step " + std::to_string(k + 1) + " of model '" +
              model.label + "'",
          k + 1);
    }
  }
  step(m, x.hi, 0.0, 0.0);
}

}  // namespace

Trajectory simulate_path_dw(const ModelSpec& model, double phi, double x0,
                            double T, std::span<const double> dw) {
  Trajectory traj;
  traj.phi = phi;
  const long m = static_cast<long>(dw.size());
  traj.times.reserve(static_cast<std::size_t>(m) + 1);
  traj.values.reserve(static_cast<std::size_t>(m) + 1);
  euler_walk(model, phi, x0, T, dw,
             [&](long k, double x, double, double) {
               traj.times.push_back(T * static_cast<double>(k) /
                                    static_cast<double>(m));
               traj.values.push_back(x);
             });
  return traj;
}

Trajectory simulate_path(const ModelSpec& model, double phi, double x0,
                         double T, long m, Rng& rng) {
  const std::vector<double> dw = brownian_increments(T, m, rng);
  return simulate_path_dw(model, phi, x0, T, dw);
}

SuffStats suff_stats_exact_unit(double phi, double T, double w_T) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("suff_stats_exact_unit: T must be > 0");
  }
  SuffStats s;
  s.U = phi * T + w_T;
  s.V = T;
  s.T = T;
  s.x0 = 0.0;
  s.mode = StatMode::Exact;
  s.m = 0;
  return s;
}

SuffStats suff_stats_discretized(const Trajectory& traj,
                                 const ModelSpec& model) {
  if (traj.values.size() < 2 || traj.values.size() != traj.times.size()) {
    throw std::invalid_argument(
        "suff_stats_discretized: trajectory needs >= 2 grid points");
  }
  const std::size_t m = traj.values.size() - 1;
  const double T = traj.times.back();
  const double h = T / static_cast<double>(m);
  SuffStats s;
  s.T = T;
  s.x0 = traj.values.front();
  s.mode = StatMode::Discretized;
  s.m = static_cast<long>(m);
  // U is a compensated sum; V is accumulated in the factored form
  // h * sum(b^2/sigma^2) so that constant-coefficient models recover V = T
  // without length-dependent rounding.
  Kahan u;
  Kahan vsum;
  for (std::size_t k = 0; k < m; ++k) {
    const double x = traj.values[k];
    const double bx = model.b(x);
    const double sx = model.sigma(x);
    if (!(sx > 0.0)) {
      throw SimulationError("diffusion coefficient invalid at grid point " +
                                std::to_string(k),
                            static_cast<long>(k));
    }
    const double w = bx / (sx * sx);
    u.add(w * (traj.values[k + 1] - x));
    vsum.add(w * bx);
  }
  s.U = u.value();
  s.V = vsum.value() * h;
  return s;
}

SuffStats em_suff_stats(const ModelSpec& model, double phi, double x0,
                        double T, std::span<const double> dw) {
  const long m = static_cast<long>(dw.size());
  const double h = T / static_cast<double>(m);
  SuffStats s;
  s.T = T;
  s.x0 = x0;
  s.mode = StatMode::Discretized;
  s.m = m;
  // The callback fires at every grid point with left-endpoint coefficients;
  // the U increment for step k closes at the following point.  Accumulation
  // mirrors suff_stats_discretized exactly (compensated U, factored V).
  Kahan u;
  Kahan vsum;
  double pending_w = 0.0;
  double pending_x = 0.0;
  bool pending = false;
  euler_walk(model, phi, x0, T, dw,
             [&](long k, double x, double bx, double sx) {
               if (pending) u.add(pending_w * (x - pending_x));
               if (k < m) {
                 const double w = bx / (sx * sx);
                 vsum.add(w * bx);
                 pending_w = w;
                 pending_x = x;
                 pending = true;
               }
             });
  s.U = u.value();
  s.V = vsum.value() * h;
  return s;
}

}  // namespace sdelab
