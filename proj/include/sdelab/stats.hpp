#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace sdelab {

/// Standard normal CDF / quantile.
double normal_cdf(double x);
double normal_quantile(double p);

/// Chi-squared CDF / quantile with `df` degrees of freedom.
double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased, needs n >= 2

/// One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)| against a
/// continuous reference CDF.  `xs` need not be sorted.
double ks_statistic(std::vector<double> xs,
                    const std::function<double(double)>& cdf);

/// Monte Carlo standard error of the mean of a (possibly autocorrelated)
/// sequence via non-overlapping batch means with ~sqrt(n) batches.
double batch_means_se(std::span<const double> xs);

/// Shortest interval containing ceil(level * n) of the sorted sample; the
/// sample-based highest-density interval for unimodal draws.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
};
Window shortest_window(std::vector<double> xs, double level);

/// Symmetric positive semi-definite square root of a symmetric 2x2 matrix
/// via its spectral decomposition.  Negative eigenvalues (roundoff) clamp
/// to zero.
Eigen::Matrix2d sqrt_psd_2x2(const Eigen::Matrix2d& m);

}  // namespace sdelab
