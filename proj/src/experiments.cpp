#include "sdelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "sdelab/io.hpp"
#include "sdelab/parallel.hpp"
#include "sdelab/stats.hpp"
#include "sdelab/version.hpp"

namespace sdelab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

using MetricList = std::vector<std::pair<std::string, double>>;

struct CellResult {
  MetricList metrics;
  bool error = false;
};

// One replicate's results, keyed by grid value (n or m).
using RepCells = std::map<long, CellResult>;

const std::vector<std::string>& metric_names(ExperimentKind kind) {
  static const std::vector<std::string> consistency{"sigma2_hat", "abs_mu_err",
                                                    "prob_ball"};
  static const std::vector<std::string> normality{"ks_mu", "ks_omega2",
                                                  "ks_max", "grid_sup"};
  static const std::vector<std::string> dependence{
      "mu_hat_tridiagonal", "sigma2_hat_tridiagonal", "mu_hat_compound",
      "sigma2_hat_compound"};
  static const std::vector<std::string> intervals{
      "ci_lo",  "ci_hi",  "ci_len",  "ci_cover",
      "hpd_lo", "hpd_hi", "hpd_len", "hpd_cover"};
  static const std::vector<std::string> discretization{"u_rms", "v_rms",
                                                       "tv_posterior"};
  static const std::vector<std::string> lrt{"z2", "converged"};
  switch (kind) {
    case ExperimentKind::Consistency:
      return consistency;
    case ExperimentKind::Normality:
      return normality;
    case ExperimentKind::Dependence:
      return dependence;
    case ExperimentKind::Intervals:
      return intervals;
    case ExperimentKind::Discretization:
      return discretization;
    case ExperimentKind::Lrt:
      return lrt;
  }
  throw std::logic_error("metric_names: unreachable");
}

CellResult error_cell(ExperimentKind kind) {
  CellResult c;
  c.error = true;
  for (const auto& name : metric_names(kind)) c.metrics.emplace_back(name, kNan);
  return c;
}

Dataset prefix_dataset(const Dataset& full, long n) {
  Dataset d;
  const auto k = static_cast<std::ptrdiff_t>(n);
  d.stats.assign(full.stats.begin(), full.stats.begin() + k);
  d.design.x0.assign(full.design.x0.begin(), full.design.x0.begin() + k);
  d.design.T.assign(full.design.T.begin(), full.design.T.begin() + k);
  return d;
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// Total-variation distance between two normal densities, approximated as a
// midpoint sum of |p - q| / 2 on a 50-bin grid covering both 5-sd ranges.
double tv_normal_grid(double m1, double s1, double m2, double s2) {
  const double lo = std::min(m1 - 5.0 * s1, m2 - 5.0 * s2);
  const double hi = std::max(m1 + 5.0 * s1, m2 + 5.0 * s2);
  constexpr int kBins = 50;
  const double w = (hi - lo) / kBins;
  double acc = 0.0;
  for (int b = 0; b < kBins; ++b) {
    const double c = lo + (b + 0.5) * w;
    acc += std::abs(normal_pdf(c, m1, s1) - normal_pdf(c, m2, s2));
  }
  return 0.5 * acc * w;
}

// Sup over a 50x50 grid on [-3,3]^2 of |empirical cell density - standard
// normal density at the cell center|.
double grid_density_sup(const std::vector<double>& x,
                        const std::vector<double>& y) {
  constexpr int kCells = 50;
  constexpr double kLo = -3.0;
  constexpr double kHi = 3.0;
  const double w = (kHi - kLo) / kCells;
  std::vector<long> counts(static_cast<std::size_t>(kCells) * kCells, 0);
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < kLo || x[i] >= kHi || y[i] < kLo || y[i] >= kHi) continue;
    const auto ix = static_cast<long>((x[i] - kLo) / w);
    const auto iy = static_cast<long>((y[i] - kLo) / w);
    const long cx = std::min(ix, static_cast<long>(kCells - 1));
    const long cy = std::min(iy, static_cast<long>(kCells - 1));
    ++counts[static_cast<std::size_t>(cx * kCells + cy)];
  }
  double sup = 0.0;
  const double denom = static_cast<double>(n) * w * w;
  for (int ix = 0; ix < kCells; ++ix) {
    const double cx = kLo + (ix + 0.5) * w;
    for (int iy = 0; iy < kCells; ++iy) {
      const double cy = kLo + (iy + 0.5) * w;
      const double dens =
          static_cast<double>(counts[static_cast<std::size_t>(ix * kCells + iy)]) /
          denom;
      const double ref = std::exp(-0.5 * (cx * cx + cy * cy)) / (2.0 * M_PI);
      sup = std::max(sup, std::abs(dens - ref));
    }
  }
  return sup;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNan;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid),
                   xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  double lo = *std::max_element(
      xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

DensityCurve make_normal_curve(const std::string& label, double mean,
                               double sd, double lo, double hi, int points) {
  DensityCurve c;
  c.label = label;
  c.grid.reserve(static_cast<std::size_t>(points));
  c.density.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double g = lo + (hi - lo) * i / (points - 1);
    c.grid.push_back(g);
    c.density.push_back(normal_pdf(g, mean, sd));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Per-replicate workers.  Worker/child stream layout (children of the
// replicate stream master.child(rep)):
//   child(0)      joint effects draw
//   child(1, i)   subject i path / endpoint noise
//   child(2, n)   posterior-sampling chain at grid value n
// Datasets are simulated once at the largest n and prefix-sliced, so the
// per-n datasets are nested exactly as a sequentially grown study would be.
// ---------------------------------------------------------------------------

RepCells consistency_rep(const ExperimentConfig& cfg, const Rng& master,
                         std::size_t rep) {
  RepCells cells;
  const ModelSpec& model = ModelSpec::by_label(cfg.model_label);
  const Rng rep_rng = master.child(rep);
  Dataset full;
  try {
    const Design design = design_sequence(
        cfg.design, cfg.design_param, static_cast<int>(cfg.n_grid.back()),
        cfg.x0);
    full = simulate_dataset(model, design, cfg.theta0,
                            EffectsCovariance::iid(), cfg.stat_mode,
                            cfg.m_data, rep_rng);
  } catch (const std::exception&) {
    for (long n : cfg.n_grid) cells[n] = error_cell(cfg.kind);
    return cells;
  }
  for (long n : cfg.n_grid) {
    try {
      const Dataset d = prefix_dataset(full, n);
      const GaussianPosterior post =
          cfg.prior.kind == PriorKind::NormalMu
              ? conjugate_posterior_mu(d, cfg.prior.A, cfg.prior.B2,
                                       cfg.prior.fixed_omega2)
              : laplace_approx(d, cfg.prior, cfg.space);
      CellResult c;
      c.metrics.emplace_back("sigma2_hat", post.mu_var());
      c.metrics.emplace_back("abs_mu_err",
                             std::abs(post.mu_mean() - cfg.theta0.mu));
      c.metrics.emplace_back("prob_ball",
                             posterior_prob_ball(post, cfg.theta0, cfg.delta));
      cells[n] = std::move(c);
    } catch (const std::exception&) {
      cells[n] = error_cell(cfg.kind);
    }
  }
  return cells;
}

RepCells normality_rep(const ExperimentConfig& cfg, const Rng& master,
                       std::size_t rep) {
  RepCells cells;
  const ModelSpec& model = ModelSpec::by_label(cfg.model_label);
  const Rng rep_rng = master.child(rep);
  Dataset full;
  try {
    const Design design = design_sequence(
        cfg.design, cfg.design_param, static_cast<int>(cfg.n_grid.back()),
        cfg.x0);
    full = simulate_dataset(model, design, cfg.theta0,
                            EffectsCovariance::iid(), cfg.stat_mode,
                            cfg.m_data, rep_rng);
  } catch (const std::exception&) {
    for (long n : cfg.n_grid) cells[n] = error_cell(cfg.kind);
    return cells;
  }
  for (long n : cfg.n_grid) {
    try {
      const Dataset d = prefix_dataset(full, n);
      const MleResult fit = mle(d, cfg.space, cfg.theta0);
      const FisherInfo info = observed_fisher(d, fit.theta);
      const Eigen::Matrix2d s = sqrt_psd_2x2(info.matrix);
      std::vector<double> psi0;
      std::vector<double> psi1;
      const long steps = cfg.mcmc.steps;
      const long burn = steps / 5;
      if (cfg.sampler == "exact") {
        // Direct draws from the Laplace posterior, standardized by the same
        // information root the MCMC route uses.
        const Eigen::Matrix2d l = sqrt_psd_2x2(info.matrix.inverse());
        const Eigen::Matrix2d a = s * l;
        Rng draw_rng = rep_rng.child(2, static_cast<std::uint64_t>(n));
        psi0.reserve(static_cast<std::size_t>(steps - burn));
        psi1.reserve(static_cast<std::size_t>(steps - burn));
        for (long j = 0; j < steps - burn; ++j) {
          const double z0 = draw_rng.normal();
          const double z1 = draw_rng.normal();
          psi0.push_back(a(0, 0) * z0 + a(0, 1) * z1);
          psi1.push_back(a(1, 0) * z0 + a(1, 1) * z1);
        }
      } else {
        std::array<double, 2> scale = cfg.mcmc.step_scale;
        if (scale[0] <= 0.0 || scale[1] <= 0.0) {
          scale = default_step_scale(d, cfg.prior, cfg.space);
        }
        Rng chain_rng = rep_rng.child(2, static_cast<std::uint64_t>(n));
        const McmcSample chain =
            rw_metropolis(d, cfg.prior, cfg.space, steps, scale, chain_rng);
        const auto post = chain.post_burn();
        psi0.reserve(post.size());
        psi1.reserve(post.size());
        for (const Theta& t : post) {
          const double dmu = t.mu - fit.theta.mu;
          const double dw = t.omega2 - fit.theta.omega2;
          psi0.push_back(s(0, 0) * dmu + s(0, 1) * dw);
          psi1.push_back(s(1, 0) * dmu + s(1, 1) * dw);
        }
      }
      const double ks0 = ks_statistic(psi0, normal_cdf);
      const double ks1 = ks_statistic(psi1, normal_cdf);
      CellResult c;
      c.metrics.emplace_back("ks_mu", ks0);
      c.metrics.emplace_back("ks_omega2", ks1);
      c.metrics.emplace_back("ks_max", std::max(ks0, ks1));
      c.metrics.emplace_back("grid_sup", grid_density_sup(psi0, psi1));
      cells[n] = std::move(c);
    } catch (const std::exception&) {
      cells[n] = error_cell(cfg.kind);
    }
  }
  return cells;
}

RepCells dependence_rep(const ExperimentConfig& cfg, const Rng& master,
                        std::size_t rep, std::vector<DensityCurve>* curves) {
  RepCells cells;
  const ModelSpec& model = ModelSpec::by_label(cfg.model_label);
  const Rng rep_rng = master.child(rep);
  const EffectsCovariance weak = EffectsCovariance::tridiagonal(cfg.rho_weak);
  const EffectsCovariance strong =
      EffectsCovariance::compound_symmetry(cfg.rho_strong);
  Dataset d_weak;
  Dataset d_strong;
  try {
    const Design design = design_sequence(
        cfg.design, cfg.design_param, static_cast<int>(cfg.n_grid.back()),
        cfg.x0);
    // Same replicate stream for both structures: the underlying standard
    // normals and path noise coincide, so the structures are compared on
    // common random numbers.
    d_weak = simulate_dataset(model, design, cfg.theta0, weak, cfg.stat_mode,
                              cfg.m_data, rep_rng);
    d_strong = simulate_dataset(model, design, cfg.theta0, strong,
                                cfg.stat_mode, cfg.m_data, rep_rng);
  } catch (const std::exception&) {
    for (long n : cfg.n_grid) cells[n] = error_cell(cfg.kind);
    return cells;
  }
  const double w = cfg.prior.fixed_omega2;
  for (long n : cfg.n_grid) {
    try {
      const GaussianPosterior pw = dependent_posterior_mu(
          prefix_dataset(d_weak, n), weak, w, cfg.prior.A, cfg.prior.B2);
      const GaussianPosterior ps = dependent_posterior_mu(
          prefix_dataset(d_strong, n), strong, w, cfg.prior.A, cfg.prior.B2);
      CellResult c;
      c.metrics.emplace_back("mu_hat_tridiagonal", pw.mu_mean());
      c.metrics.emplace_back("sigma2_hat_tridiagonal", pw.mu_var());
      c.metrics.emplace_back("mu_hat_compound", ps.mu_mean());
      c.metrics.emplace_back("sigma2_hat_compound", ps.mu_var());
      cells[n] = std::move(c);
      if (curves != nullptr) {
        const double lo = cfg.theta0.mu - 3.0;
        const double hi = cfg.theta0.mu + 3.0;
        curves->push_back(make_normal_curve(
            "tridiagonal_n" + std::to_string(n), pw.mu_mean(), pw.mu_sd(), lo,
            hi, 301));
        curves->push_back(make_normal_curve(
            "compound_n" + std::to_string(n), ps.mu_mean(), ps.mu_sd(), lo,
            hi, 301));
      }
    } catch (const std::exception&) {
      cells[n] = error_cell(cfg.kind);
    }
  }
  return cells;
}

RepCells intervals_rep(const ExperimentConfig& cfg, const Rng& master,
                       std::size_t rep) {
  RepCells cells;
  const ModelSpec& model = ModelSpec::by_label(cfg.model_label);
  const Rng rep_rng = master.child(rep);
  Dataset full;
  try {
    const Design design = design_sequence(
        cfg.design, cfg.design_param, static_cast<int>(cfg.n_grid.back()),
        cfg.x0);
    full = simulate_dataset(model, design, cfg.theta0,
                            EffectsCovariance::iid(), cfg.stat_mode,
                            cfg.m_data, rep_rng);
  } catch (const std::exception&) {
    for (long n : cfg.n_grid) cells[n] = error_cell(cfg.kind);
    return cells;
  }
  const double w = cfg.prior.fixed_omega2;
  for (long n : cfg.n_grid) {
    try {
      const Dataset d = prefix_dataset(full, n);
      const GaussianPosterior post =
          conjugate_posterior_mu(d, cfg.prior.A, cfg.prior.B2, w);
      const Interval hpd = hpd_interval(post, cfg.interval_level);
      double den = 0.0;
      for (const SuffStats& s : d.stats) den += s.V / (1.0 + w * s.V);
      FisherInfo fi;
      if (den > 0.0) {
        fi.matrix << den, 0.0, 0.0, 1.0;
      } else {
        fi.fallback_used = true;  // identity already in place
      }
      const Theta th{mle_profile_mu(d, w), w};
      const Interval ci = classical_ci(th, fi, cfg.interval_level, 0);
      CellResult c;
      c.metrics.emplace_back("ci_lo", ci.lo);
      c.metrics.emplace_back("ci_hi", ci.hi);
      c.metrics.emplace_back("ci_len", ci.length());
      c.metrics.emplace_back("ci_cover", ci.covers(cfg.theta0.mu) ? 1.0 : 0.0);
      c.metrics.emplace_back("hpd_lo", hpd.lo);
      c.metrics.emplace_back("hpd_hi", hpd.hi);
      c.metrics.emplace_back("hpd_len", hpd.length());
      c.metrics.emplace_back("hpd_cover",
                             hpd.covers(cfg.theta0.mu) ? 1.0 : 0.0);
      cells[n] = std::move(c);
    } catch (const std::exception&) {
      cells[n] = error_cell(cfg.kind);
    }
  }
  return cells;
}

RepCells discretization_rep(const ExperimentConfig& cfg, const Rng& master,
                            std::size_t rep) {
  RepCells cells;
  const ModelSpec& model = ModelSpec::by_label(cfg.model_label);
  const Rng rep_rng = master.child(rep);
  const long n = cfg.n_grid.back();
  const double T = cfg.design_param;
  try {
    Rng eff_rng = rep_rng.child(0);
    const std::vector<double> phi = sample_effects_dependent(
        static_cast<int>(n), cfg.theta0, EffectsCovariance::iid(), eff_rng);
    Dataset ref;
    std::map<long, Dataset> coarse;
    std::map<long, double> ssq_u;
    std::map<long, double> ssq_v;
    for (long m : cfg.m_grid) {
      ssq_u[m] = 0.0;
      ssq_v[m] = 0.0;
    }
    for (long i = 0; i < n; ++i) {
      Rng path_rng = rep_rng.child(1, static_cast<std::uint64_t>(i));
      const std::vector<double> dw =
          brownian_increments(T, cfg.m_ref, path_rng);
      SuffStats sref = em_suff_stats(model, phi[i], cfg.x0, T, dw);
      ref.stats.push_back(sref);
      ref.design.x0.push_back(cfg.x0);
      ref.design.T.push_back(T);
      for (long m : cfg.m_grid) {
        const std::vector<double> dwm = coarsen_increments(
            dw, static_cast<std::size_t>(cfg.m_ref / m));
        SuffStats sm = em_suff_stats(model, phi[i], cfg.x0, T, dwm);
        const double du = sm.U - sref.U;
        const double dv = sm.V - sref.V;
        ssq_u[m] += du * du;
        ssq_v[m] += dv * dv;
        coarse[m].stats.push_back(sm);
        coarse[m].design.x0.push_back(cfg.x0);
        coarse[m].design.T.push_back(T);
      }
    }
    const GaussianPosterior pref = conjugate_posterior_mu(
        ref, cfg.prior.A, cfg.prior.B2, cfg.prior.fixed_omega2);
    for (long m : cfg.m_grid) {
      const GaussianPosterior pm = conjugate_posterior_mu(
          coarse[m], cfg.prior.A, cfg.prior.B2, cfg.prior.fixed_omega2);
      CellResult c;
      c.metrics.emplace_back("u_rms",
                             std::sqrt(ssq_u[m] / static_cast<double>(n)));
      c.metrics.emplace_back("v_rms",
                             std::sqrt(ssq_v[m] / static_cast<double>(n)));
      c.metrics.emplace_back(
          "tv_posterior", tv_normal_grid(pm.mu_mean(), pm.mu_sd(),
                                         pref.mu_mean(), pref.mu_sd()));
      cells[m] = std::move(c);
    }
  } catch (const std::exception&) {
    for (long m : cfg.m_grid) cells[m] = error_cell(cfg.kind);
  }
  return cells;
}

RepCells lrt_rep(const ExperimentConfig& cfg, const Rng& master,
                 std::size_t rep) {
  RepCells cells;
  const ModelSpec& model = ModelSpec::by_label(cfg.model_label);
  const Rng rep_rng = master.child(rep);
  Dataset full;
  try {
    const Design design = design_sequence(
        cfg.design, cfg.design_param, static_cast<int>(cfg.n_grid.back()),
        cfg.x0);
    full = simulate_dataset(model, design, cfg.theta0,
                            EffectsCovariance::iid(), cfg.stat_mode,
                            cfg.m_data, rep_rng);
  } catch (const std::exception&) {
    for (long n : cfg.n_grid) cells[n] = error_cell(cfg.kind);
    return cells;
  }
  for (long n : cfg.n_grid) {
    try {
      const Dataset d = prefix_dataset(full, n);
      const LrtResult r = lrt_stat(d, cfg.theta0, cfg.space);
      CellResult c;
      c.metrics.emplace_back("z2", r.z2);
      c.metrics.emplace_back("converged", r.converged ? 1.0 : 0.0);
      cells[n] = std::move(c);
    } catch (const std::exception&) {
      cells[n] = error_cell(cfg.kind);
    }
  }
  return cells;
}

std::vector<SummaryEntry> build_summary(const ExperimentConfig& cfg,
                                        const std::vector<long>& grid,
                                        const std::vector<RepCells>& cells) {
  std::vector<SummaryEntry> out;
  const auto& names = metric_names(cfg.kind);
  for (long nm : grid) {
    SummaryEntry e;
    e.n_or_m = nm;
    long errors = 0;
    std::map<std::string, std::vector<double>> values;
    for (const RepCells& rc : cells) {
      const CellResult& c = rc.at(nm);
      if (c.error) {
        ++errors;
        continue;
      }
      for (const auto& [name, val] : c.metrics) values[name].push_back(val);
    }
    for (const auto& name : names) {
      const auto it = values.find(name);
      if (it == values.end() || it->second.empty()) {
        e.metrics["mean_" + name] = kNan;
        e.metrics["median_" + name] = kNan;
      } else {
        e.metrics["mean_" + name] = mean(it->second);
        e.metrics["median_" + name] = median(it->second);
      }
    }
    if (cfg.kind == ExperimentKind::Lrt) {
      const auto it = values.find("z2");
      if (it != values.end() && !it->second.empty()) {
        e.metrics["ks_chi2_df1"] = ks_statistic(
            it->second, [](double x) { return chi2_cdf(x, 1.0); });
        e.metrics["ks_chi2_df2"] = ks_statistic(
            it->second, [](double x) { return chi2_cdf(x, 2.0); });
      } else {
        e.metrics["ks_chi2_df1"] = kNan;
        e.metrics["ks_chi2_df2"] = kNan;
      }
    }
    e.metrics["errors"] = static_cast<double>(errors);
    out.push_back(std::move(e));
  }
  return out;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument("config field '" + field + "': " + what);
  }
}

bool strictly_increasing(const std::vector<long>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] <= xs[i - 1]) return false;
  }
  return true;
}

std::string join_longs(const std::vector<long>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

}  // namespace

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "consistency") return ExperimentKind::Consistency;
  if (name == "normality") return ExperimentKind::Normality;
  if (name == "dependence") return ExperimentKind::Dependence;
  if (name == "intervals") return ExperimentKind::Intervals;
  if (name == "discretization") return ExperimentKind::Discretization;
  if (name == "lrt") return ExperimentKind::Lrt;
  throw std::invalid_argument(
      "unknown experiment '" + name +
      "' (known: consistency, normality, dependence, intervals, "
      "discretization, lrt)");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Consistency:
      return "consistency";
    case ExperimentKind::Normality:
      return "normality";
    case ExperimentKind::Dependence:
      return "dependence";
    case ExperimentKind::Intervals:
      return "intervals";
    case ExperimentKind::Discretization:
      return "discretization";
    case ExperimentKind::Lrt:
      return "lrt";
  }
  throw std::logic_error("to_string(ExperimentKind): unreachable");
}

void ExperimentConfig::validate() const {
  ModelSpec::by_label(model_label);  // throws for unknown labels
  require(std::isfinite(theta0.mu), "theta0.mu", "must be finite");
  require(std::isfinite(theta0.omega2) && theta0.omega2 > 0.0, "theta0.omega2",
          "must be > 0");
  require(space.contains(theta0), "theta0",
          "must lie inside the parameter box");
  require(std::isfinite(design_param) && design_param > 0.0, "design_param",
          "must be > 0");
  require(std::isfinite(x0), "x0", "must be finite");
  require(!n_grid.empty() && n_grid.front() >= 1 &&
              strictly_increasing(n_grid),
          "n_grid", "must be nonempty, positive, strictly increasing");
  require(replicates >= 1, "replicates", "must be >= 1");
  require(std::isfinite(delta) && delta > 0.0, "delta", "must be > 0");
  require(interval_level > 0.0 && interval_level < 1.0, "interval_level",
          "must lie in (0, 1)");
  require(mcmc.steps >= 50, "mcmc.steps", "must be >= 50");
  require(mcmc.step_scale[0] >= 0.0 && std::isfinite(mcmc.step_scale[0]),
          "mcmc.step_mu", "must be >= 0 (0 selects the auto scale)");
  require(mcmc.step_scale[1] >= 0.0 && std::isfinite(mcmc.step_scale[1]),
          "mcmc.step_omega2", "must be >= 0 (0 selects the auto scale)");
  if (stat_mode == StatMode::Exact) {
    require(model_label == "unit", "sim.mode",
            "exact statistics exist only for the unit model");
  } else {
    require(m_data >= 1, "m_data", "must be >= 1");
  }
  switch (kind) {
    case ExperimentKind::Normality:
      require(prior.kind != PriorKind::NormalMu, "prior.kind",
              "normality needs a joint prior over (mu, omega2)");
      require(sampler == "mcmc" || sampler == "exact", "sampler",
              "must be 'mcmc' or 'exact'");
      break;
    case ExperimentKind::Dependence:
      require(prior.kind == PriorKind::NormalMu, "prior.kind",
              "dependence uses the conjugate mu sub-model");
      require(design == DesignKind::ConstantT, "design",
              "dependence uses a constant design");
      require(std::abs(rho_weak) < 0.5, "rho_weak",
              "tridiagonal correlation needs |rho| < 1/2");
      require(rho_strong >= 0.0 && rho_strong < 1.0, "rho_strong",
              "compound symmetry needs rho in [0, 1)");
      break;
    case ExperimentKind::Intervals:
      require(prior.kind == PriorKind::NormalMu, "prior.kind",
              "intervals compare against the conjugate mu sub-model");
      break;
    case ExperimentKind::Discretization: {
      require(prior.kind == PriorKind::NormalMu, "prior.kind",
              "discretization compares conjugate mu posteriors");
      require(design == DesignKind::ConstantT, "design",
              "discretization uses a constant design");
      require(!m_grid.empty() && m_grid.front() >= 1 &&
                  strictly_increasing(m_grid),
              "m_grid", "must be nonempty, positive, strictly increasing");
      require(m_ref >= m_grid.back(), "m_ref",
              "must be at least the largest grid in m_grid");
      for (long m : m_grid) {
        require(m_ref % m == 0, "m_ref",
                "must be divisible by every entry of m_grid");
      }
      break;
    }
    case ExperimentKind::Consistency:
    case ExperimentKind::Lrt:
      break;
  }
}

std::string ExperimentConfig::canonical() const {
  std::vector<std::string> lines;
  lines.push_back("delta=" + format_double(delta));
  lines.push_back("design=" + sdelab::to_string(design));
  lines.push_back("design_param=" + format_double(design_param));
  lines.push_back("interval_level=" + format_double(interval_level));
  lines.push_back("kind=" + sdelab::to_string(kind));
  lines.push_back("m_data=" + std::to_string(m_data));
  lines.push_back("m_grid=" + join_longs(m_grid));
  lines.push_back("m_ref=" + std::to_string(m_ref));
  lines.push_back("mcmc.step_mu=" + format_double(mcmc.step_scale[0]));
  lines.push_back("mcmc.step_omega2=" + format_double(mcmc.step_scale[1]));
  lines.push_back("mcmc.steps=" + std::to_string(mcmc.steps));
  lines.push_back("model=" + model_label);
  lines.push_back("n_grid=" + join_longs(n_grid));
  lines.push_back("prior.A=" + format_double(prior.A));
  lines.push_back("prior.B2=" + format_double(prior.B2));
  lines.push_back("prior.a_w=" + format_double(prior.a_w));
  lines.push_back("prior.b_w=" + format_double(prior.b_w));
  lines.push_back("prior.fixed_omega2=" + format_double(prior.fixed_omega2));
  lines.push_back("prior.kind=" + sdelab::to_string(prior.kind));
  lines.push_back("replicates=" + std::to_string(replicates));
  lines.push_back("rho_strong=" + format_double(rho_strong));
  lines.push_back("rho_weak=" + format_double(rho_weak));
  lines.push_back("sampler=" + sampler);
  lines.push_back("seed=" + std::to_string(seed));
  lines.push_back("space.mu_hi=" + format_double(space.mu_hi));
  lines.push_back("space.mu_lo=" + format_double(space.mu_lo));
  lines.push_back("space.omega2_hi=" + format_double(space.omega2_hi));
  lines.push_back("space.omega2_lo=" + format_double(space.omega2_lo));
  lines.push_back(std::string("stat_mode=") +
                  (stat_mode == StatMode::Exact ? "exact" : "discretized"));
  lines.push_back("theta0.mu=" + format_double(theta0.mu));
  lines.push_back("theta0.omega2=" + format_double(theta0.omega2));
  lines.push_back("x0=" + format_double(x0));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string ExperimentResult::rows_to_csv() const {
  std::string out;
  out += "# experiment=" + experiment + "\n";
  out += "# version=" + std::string(kVersion) + "\n";
  out += "# seed=" + std::to_string(seed) + "\n";
  out += "# config_hash=" + config_hash + "\n";
  CsvWriter w({"experiment", "n_or_m", "replicate", "metric", "value",
               "error_flag"});
  for (const ResultRow& r : rows) {
    w.add_row({r.experiment, std::to_string(r.n_or_m),
               std::to_string(r.replicate), r.metric, format_double(r.value),
               r.error_flag ? "1" : "0"});
  }
  return out + w.str();
}

std::string ExperimentResult::summary_to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  nlohmann::json arr = nlohmann::json::array();
  for (const SummaryEntry& e : summary) {
    nlohmann::json entry;
    entry["n_or_m"] = e.n_or_m;
    nlohmann::json metrics;
    for (const auto& [k, v] : e.metrics) metrics[k] = v;
    entry["metrics"] = metrics;
    arr.push_back(entry);
  }
  j["summary"] = arr;
  return j.dump();
}

double ExperimentResult::summary_metric(long n_or_m,
                                        const std::string& name) const {
  for (const SummaryEntry& e : summary) {
    if (e.n_or_m != n_or_m) continue;
    const auto it = e.metrics.find(name);
    if (it == e.metrics.end()) break;
    return it->second;
  }
  throw std::out_of_range("no summary metric '" + name + "' at n_or_m = " +
                          std::to_string(n_or_m));
}

std::string curve_to_csv(const DensityCurve& curve,
                         const ExperimentResult& provenance) {
  std::string out;
  out += "# experiment=" + provenance.experiment + "\n";
  out += "# version=" + std::string(kVersion) + "\n";
  out += "# seed=" + std::to_string(provenance.seed) + "\n";
  out += "# config_hash=" + provenance.config_hash + "\n";
  out += "# curve=" + curve.label + "\n";
  CsvWriter w({"grid", "density"});
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    w.add_row({format_double(curve.grid[i]), format_double(curve.density[i])});
  }
  return out + w.str();
}

Dataset simulate_dataset(const ModelSpec& model, const Design& design,
                         const Theta& theta0, const EffectsCovariance& cov,
                         StatMode mode, long m, const Rng& rng) {
  const int n = design.n();
  if (n < 1) throw std::invalid_argument("simulate_dataset: empty design");
  if (mode == StatMode::Exact && model.label != "unit") {
    throw std::invalid_argument(
        "simulate_dataset: exact statistics exist only for the unit model");
  }
  if (mode == StatMode::Discretized && m < 1) {
    throw std::invalid_argument("simulate_dataset: m must be >= 1");
  }
  Rng eff_rng = rng.child(0);
  const std::vector<double> phi =
      sample_effects_dependent(n, theta0, cov, eff_rng);
  Dataset data;
  data.design = design;
  data.stats.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng path_rng = rng.child(1, static_cast<std::uint64_t>(i));
    const double T = design.T[static_cast<std::size_t>(i)];
    const double x0 = design.x0[static_cast<std::size_t>(i)];
    const auto pi = static_cast<std::size_t>(i);
    if (mode == StatMode::Exact) {
      const double w_T = std::sqrt(T) * path_rng.normal();
      SuffStats s = suff_stats_exact_unit(phi[pi], T, w_T);
      s.x0 = x0;
      data.stats.push_back(s);
    } else {
      const std::vector<double> dw = brownian_increments(T, m, path_rng);
      data.stats.push_back(em_suff_stats(model, phi[pi], x0, T, dw));
    }
  }
  data.validate();
  return data;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  ExperimentResult res;
  res.experiment = to_string(cfg.kind);
  res.seed = cfg.seed;
  res.config_hash = cfg.config_hash.empty() ? hex64(fnv1a64(cfg.canonical()))
                                            : cfg.config_hash;
  const std::vector<long>& grid =
      cfg.kind == ExperimentKind::Discretization ? cfg.m_grid : cfg.n_grid;
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  std::vector<RepCells> cells(reps);
  std::vector<std::vector<DensityCurve>> curve_store(reps);
  const Rng master(cfg.seed);
  parallel_for(reps, threads, [&](std::size_t rep) {
    switch (cfg.kind) {
      case ExperimentKind::Consistency:
        cells[rep] = consistency_rep(cfg, master, rep);
        break;
      case ExperimentKind::Normality:
        cells[rep] = normality_rep(cfg, master, rep);
        break;
      case ExperimentKind::Dependence:
        cells[rep] = dependence_rep(cfg, master, rep,
                                    rep == 0 ? &curve_store[0] : nullptr);
        break;
      case ExperimentKind::Intervals:
        cells[rep] = intervals_rep(cfg, master, rep);
        break;
      case ExperimentKind::Discretization:
        cells[rep] = discretization_rep(cfg, master, rep);
        break;
      case ExperimentKind::Lrt:
        cells[rep] = lrt_rep(cfg, master, rep);
        break;
    }
  });
  for (long nm : grid) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const CellResult& c = cells[rep].at(nm);
      for (const auto& [name, val] : c.metrics) {
        res.rows.push_back(ResultRow{res.experiment, nm,
                                     static_cast<int>(rep), name, val,
                                     c.error});
      }
    }
  }
  res.summary = build_summary(cfg, grid, cells);
  res.curves = std::move(curve_store[0]);
  return res;
}

}  // namespace sdelab
