// Acceptance harness: one numbered criterion per invocation (argv[1] in
// 1..11), one PASS/FAIL line on stdout, exit status 0/1.  Each criterion
// carries its own runtime budget; overruns fail the criterion.
#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sdelab/experiments.hpp"
#include "sdelab/io.hpp"
#include "sdelab/likelihood.hpp"
#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"
#include "sdelab/posterior.hpp"
#include "sdelab/rng.hpp"
#include "sdelab/stats.hpp"

using namespace sdelab;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
  bool ok = true;
  std::vector<std::string> failures;
  std::string measured;

  void require(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      failures.push_back(msg);
    }
  }
  void note(const std::string& s) {
    if (!measured.empty()) measured += "; ";
    measured += s;
  }
  std::string detail() const {
    std::string d;
    for (const std::string& f : failures) {
      if (!d.empty()) d += "; ";
      d += f;
    }
    if (!measured.empty()) {
      if (!d.empty()) d += " | ";
      d += measured;
    }
    return d;
  }
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[768];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Exact-statistics unit-model dataset: effects stream child(0), per-subject
// endpoint noise child(1, i).  Matches the layout the unit tests freeze.
Dataset make_unit_dataset(int n, double T, const Theta& theta,
                          std::uint64_t seed) {
  const Rng master(seed);
  Dataset d;
  d.design = design_sequence(DesignKind::ConstantT, T, n, 0.0);
  d.stats.reserve(static_cast<std::size_t>(n));
  Rng eff = master.child(0);
  for (int i = 0; i < n; ++i) {
    const double phi = eff.normal(theta.mu, std::sqrt(theta.omega2));
    Rng path = master.child(1, static_cast<std::uint64_t>(i));
    const double w_T = path.normal(0.0, std::sqrt(T));
    d.stats.push_back(suff_stats_exact_unit(phi, T, w_T));
  }
  return d;
}

Dataset fixed_v_dataset(int n, double V) {
  Dataset d;
  d.design = design_sequence(DesignKind::ConstantT, V, n, 0.0);
  d.stats.resize(static_cast<std::size_t>(n));
  for (auto& s : d.stats) {
    s.U = 0.0;
    s.V = V;
    s.T = V;
  }
  return d;
}

double row_value(const ExperimentResult& res, long n, int rep,
                 const std::string& metric) {
  for (const ResultRow& r : res.rows) {
    if (r.n_or_m == n && r.replicate == rep && r.metric == metric) {
      return r.value;
    }
  }
  return kNan;
}

double se_of_variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return batch_means_se(sq);
}

// --------------------------------------------------------------------------
// 1. Stable likelihood form vs literal product form.
Outcome criterion1() {
  Outcome o;
  Rng rng(20240817);
  double max_rel = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Theta th;
    th.mu = -3.0 + 6.0 * rng.uniform();
    th.omega2 = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
    const double V = std::pow(10.0, -8.0 + 9.7 * rng.uniform());
    const double phi = rng.normal(th.mu, std::sqrt(th.omega2));
    const double U = phi * V + std::sqrt(V) * rng.normal();
    SuffStats s;
    s.U = U;
    s.V = V;
    const double a = log_lik_single(th, s);
    const double D = 1.0 + th.omega2 * V;
    const double b = -0.5 * std::log(D) -
                     V * (th.mu - U / V) * (th.mu - U / V) / (2.0 * D) +
                     U * U / (2.0 * V);
    max_rel = std::max(max_rel,
                       std::fabs(a - b) /
                           std::max({1.0, std::fabs(a), std::fabs(b)}));
  }
  o.require(max_rel <= 1e-10,
            fmt("max relative gap %.3g exceeds 1e-10", max_rel));
  o.note(fmt("10000 random (theta, U, V) triples, max relative gap %.2g",
             max_rel));
  return o;
}

// --------------------------------------------------------------------------
// 2. Analytic score / hessian vs central finite differences.
Outcome criterion2() {
  Outcome o;
  auto random_instance = [](Rng& rng, Dataset& d, Theta& th) {
    const int n = 1 + static_cast<int>(rng.uniform() * 8);
    d.stats.clear();
    d.design = Design{};
    for (int i = 0; i < n; ++i) {
      SuffStats s;
      s.V = 0.05 + 5.0 * rng.uniform();
      s.U = rng.normal(0.0, 2.0);
      d.stats.push_back(s);
    }
    th = Theta{-1.0 + 2.0 * rng.uniform(), 0.2 + 2.0 * rng.uniform()};
  };

  Rng rng_s(21);
  double worst_score = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    Dataset d;
    Theta th;
    random_instance(rng_s, d, th);
    const Eigen::Vector2d g = score(th, d);
    for (int c = 0; c < 2; ++c) {
      const double h = 1e-6 * (1.0 + std::fabs(c == 0 ? th.mu : th.omega2));
      Theta lo = th, hi = th;
      (c == 0 ? hi.mu : hi.omega2) += h;
      (c == 0 ? lo.mu : lo.omega2) -= h;
      const double fd =
          (log_lik_total(hi, d) - log_lik_total(lo, d)) / (2.0 * h);
      worst_score = std::max(
          worst_score, std::fabs(g(c) - fd) / (1.0 + std::fabs(g(c))));
    }
  }
  o.require(worst_score < 1e-5,
            fmt("score FD gap %.3g exceeds 1e-5", worst_score));

  Rng rng_h(23);
  double worst_hess = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    Dataset d;
    Theta th;
    random_instance(rng_h, d, th);
    const Eigen::Matrix2d H = hessian(th, d);
    for (int c = 0; c < 2; ++c) {
      const double h = 1e-5 * (1.0 + std::fabs(c == 0 ? th.mu : th.omega2));
      Theta lo = th, hi = th;
      (c == 0 ? hi.mu : hi.omega2) += h;
      (c == 0 ? lo.mu : lo.omega2) -= h;
      const Eigen::Vector2d fd = (score(hi, d) - score(lo, d)) / (2.0 * h);
      for (int r = 0; r < 2; ++r) {
        worst_hess = std::max(
            worst_hess, std::fabs(H(r, c) - fd(r)) / (1.0 + std::fabs(H(r, c))));
      }
    }
  }
  o.require(worst_hess < 1e-4,
            fmt("hessian FD gap %.3g exceeds 1e-4", worst_hess));
  o.note(fmt("100 instances each: score gap %.2g (tol 1e-5), hessian gap %.2g "
             "(tol 1e-4)",
             worst_score, worst_hess));
  return o;
}

// --------------------------------------------------------------------------
// 3. Four posterior routes agree on the reference dataset.
Outcome criterion3() {
  Outcome o;
  const Dataset d = make_unit_dataset(50, 5.0, {1.0, 1.0}, 2024);
  const ParamSpace space = ParamSpace::defaults();
  const Prior prior = Prior::normal_mu(0.0, 2.25, 1.0);

  const GaussianPosterior conj = conjugate_posterior_mu(d, 0.0, 2.25, 1.0);
  const double mean_ref = conj.mu_mean();
  const double sd_ref = conj.mu_sd();

  const GaussianPosterior dep =
      dependent_posterior_mu(d, EffectsCovariance::iid(), 1.0, 0.0, 2.25);
  o.require(std::fabs(dep.mu_mean() - mean_ref) <= 1e-10 * std::fabs(mean_ref),
            "dependent(identity) mean disagrees with conjugate beyond 1e-10");
  o.require(std::fabs(dep.mu_sd() - sd_ref) <= 1e-10 * sd_ref,
            "dependent(identity) sd disagrees with conjugate beyond 1e-10");

  // The mu sub-model laplace route ignores (A, B2); compare against the
  // conjugate posterior with the prior diffused away.
  const GaussianPosterior lap = laplace_approx(d, prior, space);
  const GaussianPosterior diffuse = conjugate_posterior_mu(d, 0.0, 1e12, 1.0);
  o.require(
      std::fabs(lap.mu_mean() - diffuse.mu_mean()) <=
          1e-10 * std::fabs(diffuse.mu_mean()),
      "laplace mean disagrees with the diffuse conjugate beyond 1e-10");
  o.require(std::fabs(lap.mu_sd() - diffuse.mu_sd()) <= 1e-10 * diffuse.mu_sd(),
            "laplace sd disagrees with the diffuse conjugate beyond 1e-10");

  Rng chain_rng(103);
  const McmcSample chain = rw_metropolis(
      d, prior, space, 125000, default_step_scale(d, prior, space), chain_rng);
  const std::vector<double> mu = chain.post_burn_component(0);
  o.require(mu.size() == 100000,
            fmt("expected 1e5 post-burn-in draws, got %zu", mu.size()));
  const double se_mean = batch_means_se(mu);
  const double sd_hat = std::sqrt(variance(mu));
  const double se_sd = se_of_variance(mu) / (2.0 * sd_hat);
  const double dev_mean = (mean(mu) - mean_ref) / se_mean;
  const double dev_sd = (sd_hat - sd_ref) / se_sd;
  o.require(std::fabs(dev_mean) <= 3.0,
            fmt("chain mean off by %.2f MC standard errors", dev_mean));
  o.require(std::fabs(dev_sd) <= 3.0,
            fmt("chain sd off by %.2f MC standard errors", dev_sd));
  o.require(chain.acceptance_rate > 0.1 && chain.acceptance_rate < 0.6,
            fmt("acceptance rate %.3f outside (0.1, 0.6)",
                chain.acceptance_rate));
  o.note(fmt("exact routes agree to 1e-10; chain mean dev %+.2f se, sd dev "
             "%+.2f se, accept %.3f",
             dev_mean, dev_sd, chain.acceptance_rate));
  return o;
}

// --------------------------------------------------------------------------
// 4. Design-driven consistency dichotomy at n = 10^4 (deterministic).
Outcome criterion4() {
  Outcome o;
  const int n = 10000;
  auto sigma2_at = [&](DesignKind kind) {
    const Design des = design_sequence(kind, 5.0, n, 0.0);
    double den = 1.0 / 2.25;
    for (double T : des.T) den += T / (1.0 + T);
    return 1.0 / den;
  };
  const double constant = sigma2_at(DesignKind::ConstantT);
  const double harmonic = sigma2_at(DesignKind::HarmonicRatio);
  const double square = sigma2_at(DesignKind::SquareRatio);
  const double limit = 1.0 / (5.0 / 6.0 + (M_PI * M_PI / 6.0 - 1.0) + 1.0 / 2.25);

  o.require(constant < 0.01,
            fmt("case 1 (constant T) sigma2_hat=%.3g not < 0.01", constant));
  o.require(harmonic < 0.01,
            fmt("case 2 (harmonic ratio) sigma2_hat=%.4f not < 0.01 at n=1e4: "
                "sum V_i/(1+V_i) = 5/6 + (H_n - 1) grows like log n, so "
                "sigma2_hat < 0.01 needs n on the order of e^100",
                harmonic));
  o.require(std::fabs(square - 0.520100) <= 1e-3,
            fmt("case 3 (square ratio) sigma2_hat=%.6f not within 1e-3 of "
                "0.520100",
                square));
  o.note(fmt("constant %.3g, harmonic %.4f, square %.6f (series limit %.6f)",
             constant, harmonic, square, limit));
  return o;
}

// --------------------------------------------------------------------------
// 5. Effects-correlation dichotomy (deterministic posterior variances).
Outcome criterion5() {
  Outcome o;
  const auto tri = EffectsCovariance::tridiagonal(1.0 / 3.0);
  const auto cs = EffectsCovariance::compound_symmetry(1.0 / 3.0);
  auto var_at = [&](const EffectsCovariance& cov, int n) {
    return dependent_posterior_mu(fixed_v_dataset(n, 5.0), cov, 1.0, 0.0, 2.25)
        .mu_var();
  };
  const double tri_ratio = var_at(tri, 40) / var_at(tri, 1000);
  o.require(tri_ratio >= 20.0 && tri_ratio <= 30.0,
            fmt("tridiagonal variance ratio n=40/n=1000 is %.2f, outside "
                "[20, 30]",
                tri_ratio));
  const double cs500 = var_at(cs, 500);
  const double cs1000 = var_at(cs, 1000);
  const double cs_change = std::fabs(cs500 - cs1000) / cs1000;
  o.require(cs_change < 0.10,
            fmt("compound-symmetry variance changes %.1f%% from n=500 to "
                "n=1000",
                100.0 * cs_change));
  o.note(fmt("tridiagonal ratio %.2f (1/n decay), compound change %.2f%% "
             "(plateau at %.4f)",
             tri_ratio, 100.0 * cs_change, cs1000));
  return o;
}

// --------------------------------------------------------------------------
// 6. Standardized-posterior normality across n (50 replicates).
Outcome criterion6() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Normality;
  cfg.n_grid = {50, 200, 800};
  cfg.replicates = 50;
  cfg.seed = 2024;
  cfg.prior = Prior::uniform_box();
  cfg.mcmc.steps = 125000;  // 1e5 post-burn-in draws
  cfg.validate();
  const ExperimentResult res = run_experiment(cfg, 0);
  for (long n : cfg.n_grid) {
    o.require(res.summary_metric(n, "errors") == 0.0,
              fmt("replicates errored at n=%ld", n));
  }
  double worst_ks = 0.0;
  int bad_at_800 = 0;
  int monotone = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const double k_mu = row_value(res, 800, rep, "ks_mu");
    const double k_w = row_value(res, 800, rep, "ks_omega2");
    worst_ks = std::max({worst_ks, k_mu, k_w});
    if (!(k_mu < 0.05 && k_w < 0.05)) ++bad_at_800;
    const double m50 = row_value(res, 50, rep, "ks_max");
    const double m200 = row_value(res, 200, rep, "ks_max");
    const double m800 = row_value(res, 800, rep, "ks_max");
    if (m200 <= m50 && m800 <= m200) ++monotone;
  }
  o.require(bad_at_800 == 0,
            fmt("%d of 50 replicates exceed KS 0.05 per coordinate at n=800",
                bad_at_800));
  o.require(monotone >= 45,
            fmt("ks_max non-increasing in only %d of 50 replicates (need 45)",
                monotone));
  o.note(fmt("worst per-coordinate KS at n=800 is %.4f over 50 replicates; "
             "ks_max non-increasing in %d/50; rep0 ks_mu=%.4f ks_omega2=%.4f",
             worst_ks, monotone, row_value(res, 800, 0, "ks_mu"),
             row_value(res, 800, 0, "ks_omega2")));
  return o;
}

// --------------------------------------------------------------------------
// 7. Likelihood-ratio calibration at theta0.
Outcome criterion7() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Lrt;
  cfg.n_grid = {1000};
  cfg.replicates = 500;
  cfg.seed = 11;
  cfg.validate();
  const ExperimentResult res = run_experiment(cfg, 0);
  o.require(res.summary_metric(1000, "errors") == 0.0, "replicates errored");
  const double mean_z2 = res.summary_metric(1000, "mean_z2");
  const double ks1 = res.summary_metric(1000, "ks_chi2_df1");
  const double ks2 = res.summary_metric(1000, "ks_chi2_df2");
  o.require(mean_z2 >= 1.7 && mean_z2 <= 2.3,
            fmt("mean Z^2 = %.3f outside 2 +- 0.3", mean_z2));
  o.require(ks2 < ks1,
            fmt("KS to chi2(2) (%.4f) not below KS to chi2(1) (%.4f)", ks2,
                ks1));
  o.note(fmt("mean Z^2 = %.4f; KS chi2(df=2) %.4f < chi2(df=1) %.4f: the "
             "statistic follows the two-parameter limit",
             mean_z2, ks2, ks1));
  return o;
}

// --------------------------------------------------------------------------
// 8. Euler-grid statistics converge to the shared-path reference.
Outcome criterion8() {
  Outcome o;
  ExperimentConfig unit;
  unit.kind = ExperimentKind::Discretization;
  unit.n_grid = {50};
  unit.m_grid = {100, 1000, 10000};
  unit.m_ref = 1000000;
  unit.replicates = 1;
  unit.seed = 19;
  unit.validate();
  const ExperimentResult ru = run_experiment(unit, 0);
  for (long m : unit.m_grid) {
    o.require(ru.summary_metric(m, "errors") == 0.0,
              fmt("unit-model replicates errored at m=%ld", m));
    o.require(ru.summary_metric(m, "mean_v_rms") == 0.0,
              fmt("unit-model V not grid-exact at m=%ld", m));
    o.require(ru.summary_metric(m, "mean_u_rms") < 1e-12,
              fmt("unit-model U rms %.3g at m=%ld exceeds 1e-12",
                  ru.summary_metric(m, "mean_u_rms"), m));
  }

  ExperimentConfig lin = unit;
  lin.model_label = "linear";
  lin.x0 = 1.0;
  lin.design_param = 1.0;
  lin.theta0 = {0.2, 0.25};
  lin.stat_mode = StatMode::Discretized;
  lin.m_data = 100;
  lin.prior = Prior::normal_mu(0.0, 2.25, 0.25);
  lin.seed = 23;
  lin.validate();
  const ExperimentResult rl = run_experiment(lin, 0);
  for (long m : lin.m_grid) {
    o.require(rl.summary_metric(m, "errors") == 0.0,
              fmt("linear-model replicates errored at m=%ld", m));
  }
  double prev_u = std::numeric_limits<double>::infinity();
  double prev_v = prev_u;
  bool monotone = true;
  for (long m : lin.m_grid) {
    const double u = rl.summary_metric(m, "mean_u_rms");
    const double v = rl.summary_metric(m, "mean_v_rms");
    if (!(u < prev_u && v < prev_v)) monotone = false;
    prev_u = u;
    prev_v = v;
  }
  o.require(monotone, "linear-model rms errors are not strictly decreasing "
                      "across m = 100, 1000, 10000");
  const double tv = rl.summary_metric(10000, "mean_tv_posterior");
  o.require(tv < 0.02,
            fmt("posterior TV proxy %.4f at m=10^4 not below 0.02", tv));
  o.note(fmt("unit: V bit-exact, U rms <= %.2g; linear: u_rms %.3g/%.3g/%.3g, "
             "v_rms %.3g/%.3g/%.3g, TV(m=1e4) %.4f",
             ru.summary_metric(10000, "mean_u_rms"),
             rl.summary_metric(100, "mean_u_rms"),
             rl.summary_metric(1000, "mean_u_rms"),
             rl.summary_metric(10000, "mean_u_rms"),
             rl.summary_metric(100, "mean_v_rms"),
             rl.summary_metric(1000, "mean_v_rms"),
             rl.summary_metric(10000, "mean_v_rms"), tv));
  return o;
}

// --------------------------------------------------------------------------
// 9. HPD vs classical intervals at small n.
Outcome criterion9() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Intervals;
  cfg.n_grid = {2, 3, 4, 5, 6, 7, 8, 9, 10};
  cfg.replicates = 1000;
  cfg.seed = 7;
  cfg.prior = Prior::normal_mu(0.0, 2.25, 1.0);
  cfg.validate();
  const ExperimentResult res = run_experiment(cfg, 0);
  for (long n : cfg.n_grid) {
    o.require(res.summary_metric(n, "errors") == 0.0,
              fmt("replicates errored at n=%ld", n));
  }
  double prev_gap = std::numeric_limits<double>::infinity();
  bool hpd_shorter = true;
  bool gap_decreasing = true;
  double pooled_ci = 0.0;
  double pooled_hpd = 0.0;
  for (long n : cfg.n_grid) {
    const double ci_len = res.summary_metric(n, "mean_ci_len");
    const double hpd_len = res.summary_metric(n, "mean_hpd_len");
    if (!(hpd_len < ci_len)) hpd_shorter = false;
    const double gap = ci_len - hpd_len;
    if (!(gap < prev_gap)) gap_decreasing = false;
    prev_gap = gap;
    pooled_ci += res.summary_metric(n, "mean_ci_cover");
    pooled_hpd += res.summary_metric(n, "mean_hpd_cover");
  }
  pooled_ci /= static_cast<double>(cfg.n_grid.size());
  pooled_hpd /= static_cast<double>(cfg.n_grid.size());
  o.require(hpd_shorter, "mean HPD length not below mean CI length at some n");
  o.require(gap_decreasing, "CI-HPD length gap is not strictly decreasing");
  o.require(std::fabs(pooled_ci - 0.95) <= 0.02,
            fmt("pooled CI coverage %.4f outside 0.95 +- 0.02", pooled_ci));
  o.require(std::fabs(pooled_hpd - 0.95) <= 0.02,
            fmt("pooled HPD coverage %.4f outside 0.95 +- 0.02", pooled_hpd));
  o.note(fmt("HPD shorter at all n in 2..10; gap %.4f -> %.4f strictly "
             "decreasing; pooled coverage ci %.4f / hpd %.4f over 9000 "
             "replicates",
             res.summary_metric(2, "mean_ci_len") -
                 res.summary_metric(2, "mean_hpd_len"),
             res.summary_metric(10, "mean_ci_len") -
                 res.summary_metric(10, "mean_hpd_len"),
             pooled_ci, pooled_hpd));
  return o;
}

// --------------------------------------------------------------------------
// 10. Monte Carlo KL divergence sanity.
Outcome criterion10() {
  Outcome o;
  const ModelSpec& unit = ModelSpec::by_label("unit");

  Rng zero_rng(5);
  const KlEstimate same =
      kl_mc({0.7, 1.3}, {0.7, 1.3}, unit, 0.0, 5.0, 1000, zero_rng);
  o.require(same.estimate == 0.0 && same.std_error == 0.0,
            fmt("kl(theta, theta) = %.3g +- %.3g, expected exact zero",
                same.estimate, same.std_error));

  Rng master(29);
  double worst_dev = std::numeric_limits<double>::infinity();
  for (int pair = 0; pair < 20; ++pair) {
    Rng rep = master.child(pair);
    const Theta t0{-1.0 + 2.0 * rep.uniform(), 0.3 + 2.0 * rep.uniform()};
    const Theta t1{-1.0 + 2.0 * rep.uniform(), 0.3 + 2.0 * rep.uniform()};
    Rng sim = master.child(100 + pair);
    const KlEstimate kl = kl_mc(t0, t1, unit, 0.0, 5.0, 2000, sim);
    if (kl.std_error > 0.0) {
      worst_dev = std::min(worst_dev, kl.estimate / kl.std_error);
    }
    o.require(kl.estimate >= -3.0 * kl.std_error,
              fmt("pair %d: estimate %.4f below -3 se (%.4f)", pair,
                  kl.estimate, kl.std_error));
  }

  Rng oracle_rng(31);
  const KlEstimate kl =
      kl_mc({1.0, 1.0}, {0.0, 1.0}, unit, 0.0, 5.0, 200000, oracle_rng);
  const double target = 5.0 / 12.0;  // N(5mu, 30) endpoint law: 25/60
  const double dev = (kl.estimate - target) / kl.std_error;
  o.require(std::fabs(dev) <= 3.0,
            fmt("unit-model estimate %.5f off the %.5f oracle by %.2f se",
                kl.estimate, target, dev));
  o.require(kl.std_error < 0.01,
            fmt("oracle se %.4f not below 0.01", kl.std_error));
  o.note(fmt("kl(theta,theta) exactly 0; 20-pair sweep min dev %+.2f se; "
             "oracle %.5f vs 5/12 (dev %+.2f se, se %.5f)",
             worst_dev, kl.estimate, dev, kl.std_error));
  return o;
}

// --------------------------------------------------------------------------
// 11. CLI byte-level reproducibility across runs and thread counts.
Outcome criterion11() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("sdelab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cfg_path = (dir / "exp.ini").string();
  {
    std::ofstream out(cfg_path);
    out << "[experiment]\nkind = dependence\nn_grid = 5,20\nreplicates = 3\n"
           "[run]\nseed = 33\n";
  }
  auto run_once = [&](const std::string& out_name, int threads) {
    const std::string out_path = (dir / out_name).string();
    const std::string cmd = std::string(SDELAB_CLI_PATH) +
                            " experiment --config " + cfg_path + " --out " +
                            out_path + " --threads " + std::to_string(threads) +
                            " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  auto slurp = [&](const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  o.require(run_once("a.csv", 1) == 0, "first run failed");
  o.require(run_once("b.csv", 1) == 0, "second run failed");
  o.require(run_once("c.csv", 2) == 0, "two-thread run failed");
  const std::vector<std::string> suffixes{
      "",
      ".summary.json",
      ".curve_tridiagonal_n5.csv",
      ".curve_compound_n5.csv",
      ".curve_tridiagonal_n20.csv",
      ".curve_compound_n20.csv"};
  int compared = 0;
  for (const std::string& sfx : suffixes) {
    const std::string a = slurp("a.csv" + sfx);
    o.require(!a.empty(), "missing output file a.csv" + sfx);
    o.require(a == slurp("b.csv" + sfx),
              "double-run diff in a.csv" + sfx + " vs b.csv" + sfx);
    o.require(a == slurp("c.csv" + sfx),
              "thread-count diff in a.csv" + sfx + " vs c.csv" + sfx);
    ++compared;
  }
  fs::remove_all(dir);
  o.note(fmt("%d output files byte-identical across a rerun and a 2-thread "
             "run (rows, summary, 4 density curves)",
             compared));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1..11>\n", argv[0]);
    return 1;
  }
  const int which = std::atoi(argv[1]);
  // Runtime budgets in seconds, indexed by criterion number.
  const double budgets[12] = {0, 1, 5, 30, 10, 20, 600, 300, 300, 120, 60, 120};
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    switch (which) {
      case 1: o = criterion1(); break;
      case 2: o = criterion2(); break;
      case 3: o = criterion3(); break;
      case 4: o = criterion4(); break;
      case 5: o = criterion5(); break;
      case 6: o = criterion6(); break;
      case 7: o = criterion7(); break;
      case 8: o = criterion8(); break;
      case 9: o = criterion9(); break;
      case 10: o = criterion10(); break;
      case 11: o = criterion11(); break;
      default:
        std::fprintf(stderr, "usage: %s <criterion 1..11>\n", argv[0]);
        return 1;
    }
  } catch (const std::exception& e) {
    o.ok = false;
    o.failures.push_back(std::string("unexpected exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (elapsed > budgets[which]) {
    o.require(false, fmt("runtime %.1fs exceeds the %.0fs budget", elapsed,
                         budgets[which]));
  }
  std::printf("%s criterion %d: %s (elapsed %.1fs)\n", o.ok ? "PASS" : "FAIL",
              which, o.detail().c_str(), elapsed);
  return o.ok ? 0 : 1;
}
