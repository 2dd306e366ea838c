#include "sdelab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace sdelab {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double normal_cdf(double x) { return boost::math::cdf(kStdNormal, x); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  }
  return boost::math::quantile(kStdNormal, p);
}

double chi2_cdf(double x, double df) {
  const boost::math::chi_squared_distribution<double> dist(df);
  return x <= 0.0 ? 0.0 : boost::math::cdf(dist, x);
}

double chi2_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("chi2_quantile: p must be in (0,1)");
  }
  const boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance: need n >= 2");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double ks_statistic(std::vector<double> xs,
                    const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return d;
}

double batch_means_se(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) throw std::invalid_argument("batch_means_se: need n >= 4");
  const std::size_t b = static_cast<std::size_t>(std::floor(std::sqrt(
      static_cast<double>(n))));               // batch length
  const std::size_t k = n / b;                 // number of batches
  std::vector<double> bm(k);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = j * b; i < (j + 1) * b; ++i) s += xs[i];
    bm[j] = s / static_cast<double>(b);
  }
  const double v = variance(bm);
  return std::sqrt(v / static_cast<double>(k));
}

Window shortest_window(std::vector<double> xs, double level) {
  if (xs.empty()) throw std::invalid_argument("shortest_window: empty sample");
  if (!(level > 0.0 && level <= 1.0)) {
    throw std::invalid_argument("shortest_window: level must be in (0,1]");
  }
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::size_t k = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  Window best{xs.front(), xs[k - 1]};
  for (std::size_t i = 0; i + k <= n; ++i) {
    if (xs[i + k - 1] - xs[i] < best.hi - best.lo) {
      best = {xs[i], xs[i + k - 1]};
    }
  }
  return best;
}

Eigen::Matrix2d sqrt_psd_2x2(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sqrt_psd_2x2: eigendecomposition failed");
  }
  Eigen::Vector2d lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace sdelab
