#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdelab {

/// Scalar coefficient function of the state, e.g. a drift or diffusion
/// factor.  Plain function pointers keep per-step evaluation cheap inside
/// simulation loops.
using ScalarFn = double (*)(double);

/// One-dimensional SDE family dX = phi * b(X) dt + sigma(X) dW, with a
/// subject-specific scalar effect phi.  Instances are looked up by label
/// from a fixed registry ("unit": b = sigma = 1; "linear": b(x) = x,
/// sigma = 1).
struct ModelSpec {
  std::string label;
  ScalarFn b = nullptr;
  ScalarFn sigma = nullptr;

  static const ModelSpec& by_label(const std::string& label);
  static std::vector<std::string> labels();
};

/// Population parameters of the effects distribution phi ~ N(mu, omega2).
struct Theta {
  double mu = 0.0;
  double omega2 = 1.0;
};

/// Closed box of admissible (mu, omega2) values.  omega2_lo > 0 keeps the
/// effects variance strictly positive everywhere in the box.
struct ParamSpace {
  double mu_lo = -10.0;
  double mu_hi = 10.0;
  double omega2_lo = 1e-3;
  double omega2_hi = 100.0;

  static ParamSpace defaults() { return ParamSpace{}; }
  bool contains(const Theta& theta) const;
  Theta clamp(const Theta& theta) const;
  Theta center() const;
};

/// True when theta has finite entries and lies in the closed box.
bool validate_theta(const Theta& theta, const ParamSpace& space);

/// Prior over theta.
///
///  - NormalMu: mu ~ N(A, B2) with omega2 pinned at a known value; this is
///    the sub-model with conjugate Gaussian posterior for mu.
///  - UniformBox: flat over the parameter box.
///  - TruncatedNormalProduct: independent N(A, B2) on mu and N(a_w, b_w) on
///    omega2, both truncated to the box.
enum class PriorKind { NormalMu, UniformBox, TruncatedNormalProduct };

struct Prior {
  PriorKind kind = PriorKind::UniformBox;
  double A = 0.0;             // mean of the mu prior
  double B2 = 1.0;            // variance of the mu prior
  double fixed_omega2 = 1.0;  // NormalMu only: the pinned omega2
  double a_w = 1.0;           // TruncatedNormalProduct: mean of omega2 prior
  double b_w = 1.0;           // TruncatedNormalProduct: variance of it

  static Prior normal_mu(double A, double B2, double fixed_omega2);
  static Prior uniform_box();
  static Prior truncated_normal_product(double A, double B2, double a_w,
                                        double b_w);
};

/// Log prior density at theta (up to the truncation constant for
/// TruncatedNormalProduct); -inf outside the box, and for NormalMu also
/// -inf when omega2 differs from the pinned value.
double prior_log_density(const Prior& prior, const Theta& theta,
                         const ParamSpace& space);

/// Observation-window sequences T_1..T_n used by the experiments:
///  - ConstantT(c):      T_i = c
///  - HarmonicRatio(c):  T_1 = c, T_i = 1/(i-1)      => T_i/(1+T_i) = 1/i
///  - SquareRatio(c):    T_1 = c, T_i = 1/(i^2 - 1)  => T_i/(1+T_i) = 1/i^2
enum class DesignKind { ConstantT, HarmonicRatio, SquareRatio };

struct Design {
  std::vector<double> x0;  // starting points, one per subject
  std::vector<double> T;   // window lengths, one per subject
  int n() const { return static_cast<int>(T.size()); }
};

Design design_sequence(DesignKind kind, double param, int n, double x0);

DesignKind design_kind_from_string(const std::string& name);
std::string to_string(DesignKind kind);
PriorKind prior_kind_from_string(const std::string& name);
std::string to_string(PriorKind kind);

}  // namespace sdelab
