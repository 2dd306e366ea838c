#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdelab/config.hpp"
#include "sdelab/experiments.hpp"
#include "sdelab/io.hpp"
#include "sdelab/likelihood.hpp"
#include "sdelab/log.hpp"
#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"
#include "sdelab/posterior.hpp"
#include "sdelab/stats.hpp"
#include "sdelab/version.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int threads = 0;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "INI configuration file")
      ->required();
  sub->add_option("--out", o.out_path, "Output file path")->required();
  sub->add_option("--format", o.format,
                  "Stdout summary format: csv (silent) or json (one line)")
      ->check(CLI::IsMember({"csv", "json"}));
  o.seed_opt =
      sub->add_option("--seed", o.seed, "Override the [run] seed value");
  sub->add_option("--threads", o.threads,
                  "Worker threads for experiments (0 = hardware)");
}

sdelab::Config load_config(const CommonOpts& o) {
  sdelab::Config cfg = sdelab::Config::from_file(o.config_path);
  if (o.seed_opt != nullptr && o.seed_opt->count() > 0) {
    cfg.set("run", "seed", std::to_string(o.seed));
  }
  return cfg;
}

std::string provenance_header(const std::string& command, std::uint64_t seed,
                              const std::string& hash) {
  return "# command=" + command + "\n# version=" + std::string(sdelab::kVersion) +
         "\n# seed=" + std::to_string(seed) + "\n# config_hash=" + hash + "\n";
}

nlohmann::json base_summary(const std::string& command, std::uint64_t seed,
                            const std::string& hash,
                            const std::string& out_path) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = sdelab::kVersion;
  j["seed"] = seed;
  j["config_hash"] = hash;
  j["out"] = out_path;
  return j;
}

void emit_summary(const CommonOpts& o, const nlohmann::json& j) {
  if (o.format == "json") std::cout << j.dump() << "\n";
}

int cmd_simulate(const CommonOpts& o) {
  sdelab::Config cfg = load_config(o);
  const sdelab::DataConfig dc = sdelab::data_config_from(cfg);
  const std::string emit = cfg.get_string("sim", "emit", "stats");
  long subject = 0;
  if (emit == "path") {
    subject = cfg.get_long("sim", "subject_index", 0);
    if (subject < 0 || subject >= dc.n) {
      throw sdelab::ConfigError(
          "config field 'sim.subject_index': must lie in [0, design.n)");
    }
  } else if (emit != "stats") {
    throw sdelab::ConfigError(
        "config field 'sim.emit': must be 'stats' or 'path'");
  }
  cfg.finish();
  const std::string hash = cfg.hash();
  SDELAB_LOG_INFO("simulate: model=%s n=%ld emit=%s", dc.model_label.c_str(),
                  dc.n, emit.c_str());
  const sdelab::ModelSpec& model = sdelab::ModelSpec::by_label(dc.model_label);
  const sdelab::Design design = sdelab::design_sequence(
      dc.design, dc.design_param, static_cast<int>(dc.n), dc.x0);
  const sdelab::Rng base(dc.seed);
  nlohmann::json j = base_summary("simulate", dc.seed, hash, o.out_path);
  std::string content;
  if (emit == "stats") {
    const sdelab::Dataset data = sdelab::simulate_dataset(
        model, design, dc.theta0, dc.cov, dc.stat_mode, dc.m, base);
    sdelab::CsvWriter w({"i", "x0", "t", "u", "v", "mode", "m"});
    for (int i = 0; i < data.n(); ++i) {
      const sdelab::SuffStats& s = data.stats[static_cast<std::size_t>(i)];
      w.add_row({std::to_string(i), sdelab::format_double(s.x0),
                 sdelab::format_double(s.T), sdelab::format_double(s.U),
                 sdelab::format_double(s.V),
                 s.mode == sdelab::StatMode::Exact ? "exact" : "discretized",
                 std::to_string(s.m)});
    }
    content = provenance_header("simulate", dc.seed, hash) + w.str();
    j["n"] = dc.n;
    j["emit"] = "stats";
  } else {
    sdelab::Rng eff_rng = base.child(0);
    const std::vector<double> phi = sdelab::sample_effects_dependent(
        static_cast<int>(dc.n), dc.theta0, dc.cov, eff_rng);
    const auto si = static_cast<std::size_t>(subject);
    sdelab::Rng path_rng = base.child(1, static_cast<std::uint64_t>(subject));
    const std::vector<double> dw =
        sdelab::brownian_increments(design.T[si], dc.m, path_rng);
    const sdelab::Trajectory traj = sdelab::simulate_path_dw(
        model, phi[si], design.x0[si], design.T[si], dw);
    sdelab::CsvWriter w({"t", "x"});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      w.add_row({sdelab::format_double(traj.times[k]),
                 sdelab::format_double(traj.values[k])});
    }
    content = provenance_header("simulate", dc.seed, hash) + w.str();
    j["emit"] = "path";
    j["subject"] = subject;
    j["phi"] = traj.phi;
  }
  sdelab::atomic_write_file(o.out_path, content);
  emit_summary(o, j);
  return 0;
}

int cmd_fit(const CommonOpts& o) {
  sdelab::Config cfg = load_config(o);
  const sdelab::DataConfig dc = sdelab::data_config_from(cfg);
  const sdelab::ParamSpace space = sdelab::space_from(cfg);
  cfg.finish();
  const std::string hash = cfg.hash();
  SDELAB_LOG_INFO("fit: model=%s n=%ld", dc.model_label.c_str(), dc.n);
  const sdelab::ModelSpec& model = sdelab::ModelSpec::by_label(dc.model_label);
  const sdelab::Design design = sdelab::design_sequence(
      dc.design, dc.design_param, static_cast<int>(dc.n), dc.x0);
  const sdelab::Rng base(dc.seed);
  const sdelab::Dataset data = sdelab::simulate_dataset(
      model, design, dc.theta0, dc.cov, dc.stat_mode, dc.m, base);
  const sdelab::MleResult fit = sdelab::mle(data, space, space.center());
  const sdelab::FisherInfo info = sdelab::observed_fisher(data, fit.theta);
  const Eigen::Matrix2d covm = info.matrix.inverse();
  const sdelab::LrtResult lrt = sdelab::lrt_stat(data, dc.theta0, space);
  nlohmann::json j = base_summary("fit", dc.seed, hash, o.out_path);
  j["n"] = data.n();
  j["theta_hat"] = {{"mu", fit.theta.mu}, {"omega2", fit.theta.omega2}};
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["grad_norm"] = fit.grad_norm;
  j["se"] = {{"mu", std::sqrt(covm(0, 0))},
             {"omega2", std::sqrt(covm(1, 1))}};
  j["fisher_fallback"] = info.fallback_used;
  j["lrt_z2"] = lrt.z2;
  j["lrt_converged"] = lrt.converged;
  sdelab::atomic_write_file(o.out_path, j.dump(2) + "\n");
  emit_summary(o, j);
  return 0;
}

nlohmann::json interval_json(const sdelab::Interval& iv) {
  return {{"lo", iv.lo},
          {"hi", iv.hi},
          {"level", iv.level},
          {"fallback", iv.fallback}};
}

int cmd_posterior(const CommonOpts& o) {
  sdelab::Config cfg = load_config(o);
  const sdelab::DataConfig dc = sdelab::data_config_from(cfg);
  const sdelab::Prior prior = sdelab::prior_from(cfg);
  const sdelab::ParamSpace space = sdelab::space_from(cfg);
  const std::string method = cfg.get_string("posterior", "method", "conjugate");
  const double level = cfg.get_double("posterior", "level", 0.95);
  if (!(level > 0.0 && level < 1.0)) {
    throw sdelab::ConfigError("config field 'posterior.level': must lie in (0, 1)");
  }
  sdelab::McmcSettings ms;
  if (method == "mcmc") ms = sdelab::mcmc_from(cfg);
  cfg.finish();
  const std::string hash = cfg.hash();
  SDELAB_LOG_INFO("posterior: method=%s n=%ld", method.c_str(), dc.n);
  const sdelab::ModelSpec& model = sdelab::ModelSpec::by_label(dc.model_label);
  const sdelab::Design design = sdelab::design_sequence(
      dc.design, dc.design_param, static_cast<int>(dc.n), dc.x0);
  const sdelab::Rng base(dc.seed);
  const sdelab::Dataset data = sdelab::simulate_dataset(
      model, design, dc.theta0, dc.cov, dc.stat_mode, dc.m, base);
  nlohmann::json j = base_summary("posterior", dc.seed, hash, o.out_path);
  j["method"] = method;
  const bool needs_normal_mu = method == "conjugate" || method == "dependent";
  if (needs_normal_mu && prior.kind != sdelab::PriorKind::NormalMu) {
    throw sdelab::ConfigError("config field 'posterior.method': '" + method +
                              "' needs prior.kind = normal_mu");
  }
  if (method == "conjugate" || method == "dependent" || method == "laplace") {
    sdelab::GaussianPosterior post;
    if (method == "conjugate") {
      post = sdelab::conjugate_posterior_mu(data, prior.A, prior.B2,
                                            prior.fixed_omega2);
    } else if (method == "dependent") {
      post = sdelab::dependent_posterior_mu(data, dc.cov, prior.fixed_omega2,
                                            prior.A, prior.B2);
    } else {
      post = sdelab::laplace_approx(data, prior, space);
    }
    j["dim"] = post.dim;
    j["mean"] = {post.mean(0), post.mean(1)};
    j["cov"] = {{post.cov(0, 0), post.cov(0, 1)},
                {post.cov(1, 0), post.cov(1, 1)}};
    j["mu_mean"] = post.mu_mean();
    j["mu_var"] = post.mu_var();
    j["fallback"] = post.fallback_used;
    j["hpd_mu"] = interval_json(sdelab::hpd_interval(post, level));
    sdelab::atomic_write_file(o.out_path, j.dump(2) + "\n");
  } else if (method == "mcmc") {
    std::array<double, 2> scale = ms.step_scale;
    if (scale[0] <= 0.0 || scale[1] <= 0.0) {
      scale = sdelab::default_step_scale(data, prior, space);
    }
    sdelab::Rng chain_rng = base.child(2, 0);
    const sdelab::McmcSample chain =
        sdelab::rw_metropolis(data, prior, space, ms.steps, scale, chain_rng);
    const std::string content = provenance_header("posterior", dc.seed, hash) +
                                sdelab::mcmc_to_csv(chain);
    sdelab::atomic_write_file(o.out_path, content);
    j["steps"] = ms.steps;
    j["burn_in"] = chain.burn_in;
    j["acceptance_rate"] = chain.acceptance_rate;
    j["hpd_mu"] = interval_json(sdelab::hpd_interval(chain, level));
  } else {
    throw sdelab::ConfigError(
        "config field 'posterior.method': must be 'conjugate', 'dependent', "
        "'laplace', or 'mcmc'");
  }
  emit_summary(o, j);
  return 0;
}

int cmd_experiment(const CommonOpts& o) {
  sdelab::Config cfg = load_config(o);
  sdelab::ExperimentConfig ec = sdelab::experiment_config_from(cfg);
  cfg.finish();
  ec.config_hash = cfg.hash();
  SDELAB_LOG_INFO("experiment: kind=%s replicates=%d",
                  sdelab::to_string(ec.kind).c_str(), ec.replicates);
  const sdelab::ExperimentResult res = sdelab::run_experiment(ec, o.threads);
  sdelab::atomic_write_file(o.out_path, res.rows_to_csv());
  sdelab::atomic_write_file(o.out_path + ".summary.json",
                            res.summary_to_json() + "\n");
  for (const sdelab::DensityCurve& c : res.curves) {
    sdelab::atomic_write_file(o.out_path + ".curve_" + c.label + ".csv",
                              sdelab::curve_to_csv(c, res));
  }
  if (o.format == "json") std::cout << res.summary_to_json() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inference and asymptotics harness for SDE models with "
               "Gaussian random effects"};
  app.require_subcommand(1);
  CommonOpts sim_opts;
  CommonOpts fit_opts;
  CommonOpts post_opts;
  CommonOpts exp_opts;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Draw effects and paths; write per-subject statistics");
  add_common(sim, sim_opts);
  CLI::App* fit = app.add_subcommand(
      "fit", "Simulate a dataset and fit (mu, omega2) by maximum likelihood");
  add_common(fit, fit_opts);
  CLI::App* post = app.add_subcommand(
      "posterior", "Simulate a dataset and compute or sample a posterior");
  add_common(post, post_opts);
  CLI::App* exp = app.add_subcommand(
      "experiment", "Run a replicated asymptotics experiment sweep");
  add_common(exp, exp_opts);
  // Exit statuses: 0 = success, 1 = configuration / usage error,
  // 2 = runtime numerical or I/O failure.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (fit->parsed()) return cmd_fit(fit_opts);
    if (post->parsed()) return cmd_posterior(post_opts);
    if (exp->parsed()) return cmd_experiment(exp_opts);
  } catch (const sdelab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
