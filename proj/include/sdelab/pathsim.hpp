#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdelab/model.hpp"
#include "sdelab/rng.hpp"

namespace sdelab {

/// Thrown when an Euler-Maruyama path leaves the representable range or the
/// diffusion coefficient becomes non-positive along it.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Discrete-time record of one subject's path on a uniform grid over [0, T].
struct Trajectory {
  double phi = 0.0;
  std::vector<double> times;   // m + 1 points, times[0] = 0, times[m] = T
  std::vector<double> values;  // matching states, values[0] = x0
};

/// Per-subject sufficient statistics (U, V) of the effects likelihood,
/// tagged with how they were obtained.
enum class StatMode { Exact, Discretized };

struct SuffStats {
  double U = 0.0;
  double V = 0.0;
  double T = 0.0;
  double x0 = 0.0;
  StatMode mode = StatMode::Exact;
  long m = 0;  // grid steps when mode == Discretized, else 0
};

/// Joint distribution of the random effects across subjects.  IID is the
/// baseline; the two structured families share variance omega2 and couple
/// subjects through a correlation matrix R:
///  - Tridiagonal(rho):       R_ii = 1, R_{i,i+1} = rho, |rho| < 1/2
///  - CompoundSymmetry(rho):  R_ii = 1, R_ij = rho (i != j), 0 <= rho < 1
/// Both are positive definite on their stated rho ranges for every n, and
/// both reduce to IID at rho = 0.
enum class CovKind { IID, Tridiagonal, CompoundSymmetry };

struct EffectsCovariance {
  CovKind kind = CovKind::IID;
  double rho = 0.0;

  static EffectsCovariance iid();
  static EffectsCovariance tridiagonal(double rho);
  static EffectsCovariance compound_symmetry(double rho);

  /// Correlation matrix R (n x n); identity for IID.
  Eigen::MatrixXd matrix(int n) const;
};

/// n independent draws phi_i ~ N(mu, omega2).
std::vector<double> sample_effects_iid(int n, const Theta& theta, Rng& rng);

/// Joint draw phi ~ N(mu * 1, omega2 * R) via the Cholesky factor of R.
/// With R = I this reproduces sample_effects_iid bit for bit from the same
/// generator state (the factor is the identity).
std::vector<double> sample_effects_dependent(int n, const Theta& theta,
                                             const EffectsCovariance& cov,
                                             Rng& rng);

/// Brownian increments over [0, T] on an m-step uniform grid:
/// dW_k = sqrt(T/m) * Z_k with Z_k iid standard normal.
std::vector<double> brownian_increments(double T, long m, Rng& rng);

/// Sum consecutive groups of `factor` fine increments into coarse ones.
/// fine.size() must be a multiple of factor.  Coarsening Brownian
/// increments this way yields the increments of the same Brownian path on
/// the coarser grid, so statistics computed at different resolutions refer
/// to one realisation.
std::vector<double> coarsen_increments(std::span<const double> fine,
                                       std::size_t factor);

/// Euler-Maruyama path for dX = phi b(X) dt + sigma(X) dW from the given
/// Brownian increments; m = dw.size() steps.  Throws SimulationError if the
/// state leaves the finite range or sigma(X) <= 0 at any grid point.
Trajectory simulate_path_dw(const ModelSpec& model, double phi, double x0,
                            double T, std::span<const double> dw);

/// Convenience overload drawing the increments from `rng`.
Trajectory simulate_path(const ModelSpec& model, double phi, double x0,
                         double T, long m, Rng& rng);

/// Exact sufficient statistics for the unit model (b = sigma = 1), where
/// U = X(T) - X(0) = phi T + W(T) and V = T hold exactly.  w_T is the
/// terminal Brownian value W(T).
SuffStats suff_stats_exact_unit(double phi, double T, double w_T);

/// Ito-sum statistics from a stored trajectory:
/// U = sum b(X_k)/sigma^2(X_k) (X_{k+1} - X_k),  V = sum b^2/sigma^2 * h,
/// both with left-endpoint evaluation.
SuffStats suff_stats_discretized(const Trajectory& traj,
                                 const ModelSpec& model);

/// Single-pass Euler-Maruyama that accumulates the Ito-sum statistics
/// without materialising the path; equivalent to simulate_path_dw followed
/// by suff_stats_discretized.
SuffStats em_suff_stats(const ModelSpec& model, double phi, double x0,
                        double T, std::span<const double> dw);

}  // namespace sdelab
