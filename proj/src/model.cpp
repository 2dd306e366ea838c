#include "sdelab/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdelab {

namespace {

double one_fn(double) { return 1.0; }
double identity_fn(double x) { return x; }

const ModelSpec kUnit{"unit", &one_fn, &one_fn};
const ModelSpec kLinear{"linear", &identity_fn, &one_fn};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

const ModelSpec& ModelSpec::by_label(const std::string& label) {
  if (label == "unit") return kUnit;
  if (label == "linear") return kLinear;
  throw std::invalid_argument("unknown model label '" + label +
                              "' (known: unit, linear)");
}

std::vector<std::string> ModelSpec::labels() { return {"unit", "linear"}; }

bool ParamSpace::contains(const Theta& theta) const {
  return std::isfinite(theta.mu) && std::isfinite(theta.omega2) &&
         theta.mu >= mu_lo && theta.mu <= mu_hi && theta.omega2 >= omega2_lo &&
         theta.omega2 <= omega2_hi;
}

Theta ParamSpace::clamp(const Theta& theta) const {
  Theta t = theta;
  t.mu = std::min(std::max(t.mu, mu_lo), mu_hi);
  t.omega2 = std::min(std::max(t.omega2, omega2_lo), omega2_hi);
  return t;
}

Theta ParamSpace::center() const {
  // Geometric midpoint for the variance coordinate: it lives on a
  // multiplicative scale.
  return Theta{0.5 * (mu_lo + mu_hi), std::sqrt(omega2_lo * omega2_hi)};
}

bool validate_theta(const Theta& theta, const ParamSpace& space) {
  return space.contains(theta);
}

Prior Prior::normal_mu(double A, double B2, double fixed_omega2) {
  if (!(B2 > 0.0)) throw std::invalid_argument("normal_mu: B2 must be > 0");
  if (!(fixed_omega2 > 0.0)) {
    throw std::invalid_argument("normal_mu: fixed_omega2 must be > 0");
  }
  Prior p;
  p.kind = PriorKind::NormalMu;
  p.A = A;
  p.B2 = B2;
  p.fixed_omega2 = fixed_omega2;
  return p;
}

Prior Prior::uniform_box() {
  Prior p;
  p.kind = PriorKind::UniformBox;
  return p;
}

Prior Prior::truncated_normal_product(double A, double B2, double a_w,
                                      double b_w) {
  if (!(B2 > 0.0) || !(b_w > 0.0)) {
    throw std::invalid_argument(
        "truncated_normal_product: variances must be > 0");
  }
  Prior p;
  p.kind = PriorKind::TruncatedNormalProduct;
  p.A = A;
  p.B2 = B2;
  p.a_w = a_w;
  p.b_w = b_w;
  return p;
}

double prior_log_density(const Prior& prior, const Theta& theta,
                         const ParamSpace& space) {
  switch (prior.kind) {
    case PriorKind::NormalMu: {
      if (theta.mu < space.mu_lo || theta.mu > space.mu_hi) return kNegInf;
      if (theta.omega2 != prior.fixed_omega2) return kNegInf;
      const double d = theta.mu - prior.A;
      return -0.5 * std::log(2.0 * M_PI * prior.B2) -
             d * d / (2.0 * prior.B2);
    }
    case PriorKind::UniformBox: {
      if (!space.contains(theta)) return kNegInf;
      const double area =
          (space.mu_hi - space.mu_lo) * (space.omega2_hi - space.omega2_lo);
      return -std::log(area);
    }
    case PriorKind::TruncatedNormalProduct: {
      if (!space.contains(theta)) return kNegInf;
      const double dm = theta.mu - prior.A;
      const double dw = theta.omega2 - prior.a_w;
      return -0.5 * std::log(2.0 * M_PI * prior.B2) -
             dm * dm / (2.0 * prior.B2) -
             0.5 * std::log(2.0 * M_PI * prior.b_w) -
             dw * dw / (2.0 * prior.b_w);
    }
  }
  throw std::logic_error("prior_log_density: unreachable");
}

Design design_sequence(DesignKind kind, double param, int n, double x0) {
  if (n < 1) throw std::invalid_argument("design_sequence: n must be >= 1");
  if (!(param > 0.0) || !std::isfinite(param)) {
    throw std::invalid_argument("design_sequence: param must be > 0");
  }
  Design d;
  d.x0.assign(static_cast<std::size_t>(n), x0);
  d.T.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    double t;
    switch (kind) {
      case DesignKind::ConstantT:
        t = param;
        break;
      case DesignKind::HarmonicRatio:
        t = (i == 1) ? param : 1.0 / static_cast<double>(i - 1);
        break;
      case DesignKind::SquareRatio:
        t = (i == 1) ? param
                     : 1.0 / (static_cast<double>(i) * i - 1.0);
        break;
      default:
        throw std::logic_error("design_sequence: unreachable");
    }
    d.T[static_cast<std::size_t>(i - 1)] = t;
  }
  return d;
}

DesignKind design_kind_from_string(const std::string& name) {
  if (name == "constant") return DesignKind::ConstantT;
  if (name == "harmonic") return DesignKind::HarmonicRatio;
  if (name == "square") return DesignKind::SquareRatio;
  throw std::invalid_argument("unknown design '" + name +
                              "' (known: constant, harmonic, square)");
}

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::ConstantT:
      return "constant";
    case DesignKind::HarmonicRatio:
      return "harmonic";
    case DesignKind::SquareRatio:
      return "square";
  }
  throw std::logic_error("to_string(DesignKind): unreachable");
}

PriorKind prior_kind_from_string(const std::string& name) {
  if (name == "normal_mu") return PriorKind::NormalMu;
  if (name == "uniform_box") return PriorKind::UniformBox;
  if (name == "truncated_normal_product") {
    return PriorKind::TruncatedNormalProduct;
  }
  throw std::invalid_argument(
      "unknown prior '" + name +
      "' (known: normal_mu, uniform_box, truncated_normal_product)");
}

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::NormalMu:
      return "normal_mu";
    case PriorKind::UniformBox:
      return "uniform_box";
    case PriorKind::TruncatedNormalProduct:
      return "truncated_normal_product";
  }
  throw std::logic_error("to_string(PriorKind): unreachable");
}

}  // namespace sdelab
