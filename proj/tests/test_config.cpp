#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sdelab/config.hpp"
#include "test_util.hpp"

using namespace sdelab;

TEST_SUITE("config") {

TEST_CASE("parses sections, comments, and typed values") {
  const std::string text =
      "# leading comment\n"
      "[model]\n"
      "label = unit   ; trailing comment\n"
      "x0 = 0.25\n"
      "\n"
      "[run]\n"
      "seed = 42\n"
      "verbose = true\n"
      "[experiment]\n"
      "n_grid = 10, 20,30\n";
  Config cfg = Config::from_string(text);
  CHECK(cfg.has("model", "label"));
  CHECK_FALSE(cfg.has("model", "nope"));
  CHECK(cfg.get_string("model", "label", "?") == "unit");
  CHECK(cfg.get_double("model", "x0", 0.0) == 0.25);
  CHECK(cfg.get_u64("run", "seed", 0) == 42);
  CHECK(cfg.get_bool("run", "verbose", false));
  CHECK(cfg.get_long_list("experiment", "n_grid", {}) ==
        std::vector<long>{10, 20, 30});
  // Fallbacks for absent keys.
  CHECK(cfg.get_long("sim", "m", 1000) == 1000);
  CHECK(cfg.get_bool("run", "quiet", false) == false);
  CHECK_NOTHROW(cfg.finish());
}

TEST_CASE("parse errors name the line") {
  CHECK_THROWS_WITH_AS(Config::from_string("[model\n"),
                       "<config>:1: expected ']' to close the section header",
                       ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("[Model]\n"),
                       "<config>:1: section names are lowercase [a-z0-9_]",
                       ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("[model]\nBad = 1\n"),
                       "<config>:2: key names are lowercase [a-z0-9_]",
                       ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("[model]\nnoequals\n"),
                       "<config>:2: expected 'key = value'", ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("[model]\nx0 =\n"),
                       "<config>:2: empty value for key 'x0'", ConfigError);
  CHECK_THROWS_WITH_AS(Config::from_string("x0 = 1\n"),
                       "<config>:1: key 'x0' appears before any [section]",
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      Config::from_string("[model]\nx0 = 1\nx0 = 2\n"),
      "<config>:3: duplicate key 'model.x0' (first defined at line 2)",
      ConfigError);
  // The origin string prefixes errors from named sources.
  CHECK_THROWS_WITH_AS(Config::from_string("[model\n", "exp.ini"),
                       "exp.ini:1: expected ']' to close the section header",
                       ConfigError);
}

TEST_CASE("files load and missing files fail cleanly") {
  testutil::TempDir dir;
  const std::string path = dir.path("run.ini");
  testutil::write_file(path, "[run]\nseed = 9\n");
  Config cfg = Config::from_file(path);
  CHECK(cfg.get_u64("run", "seed", 0) == 9);

  const std::string missing = dir.path("absent.ini");
  CHECK_THROWS_WITH_AS(Config::from_file(missing),
                       ("cannot open config file '" + missing + "'").c_str(),
                       ConfigError);
}

TEST_CASE("typed getters reject malformed values") {
  Config cfg = Config::from_string(
      "[model]\nx0 = abc\n[sim]\nm = 1.5\n[run]\nseed = -1\nflag = yes\n"
      "[experiment]\nn_grid = 10,,20\n");
  CHECK_THROWS_WITH_AS(cfg.get_double("model", "x0", 0.0),
                       "config field 'model.x0': expected a number, got 'abc'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_long("sim", "m", 1),
                       "config field 'sim.m': expected an integer, got '1.5'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      cfg.get_u64("run", "seed", 0),
      "config field 'run.seed': expected a non-negative integer, got '-1'",
      ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_bool("run", "flag", false),
                       "config field 'run.flag': expected true or false, got 'yes'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      cfg.get_long_list("experiment", "n_grid", {}),
      "config field 'experiment.n_grid': empty list entry in '10,,20'",
      ConfigError);
}

TEST_CASE("unconsumed keys fail loudly") {
  Config cfg = Config::from_string("[model]\nlabel = unit\ntypo = 3\n");
  CHECK(cfg.get_string("model", "label", "?") == "unit");
  CHECK_THROWS_WITH_AS(cfg.finish(),
                       "<config>: unknown config key: model.typo (line 3)",
                       ConfigError);

  Config two = Config::from_string("[model]\nbad = 1\nworse = 2\n");
  CHECK_THROWS_WITH_AS(
      two.finish(),
      "<config>: unknown config keys: model.bad (line 2), model.worse (line 3)",
      ConfigError);
}

TEST_CASE("set overrides file values and counts as a fresh key") {
  Config cfg = Config::from_string("[run]\nseed = 1\n");
  cfg.set("run", "seed", "42");
  cfg.set("run", "threads", "3");
  CHECK(cfg.get_u64("run", "seed", 0) == 42);
  CHECK(cfg.get_long("run", "threads", 0) == 3);
  CHECK_NOTHROW(cfg.finish());
}

TEST_CASE("the hash fingerprints resolved values, not file text") {
  auto resolve = [](const std::string& text) {
    Config cfg = Config::from_string(text);
    cfg.get_u64("run", "seed", 0);
    cfg.get_double("prior", "b2", 2.25);
    return cfg;
  };
  Config a = resolve("[run]\nseed = 7\n");
  Config b = resolve("# cosmetic differences only\n[run]\n  seed   =  7 ; x\n");
  Config c = resolve("[run]\nseed = 8\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.canonical() == "prior.b2=2.25\nrun.seed=7\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash().size() == 16);

  // Defaults are part of the fingerprint: consulting a new key changes it.
  const std::string before = a.hash();
  a.get_double("experiment", "interval_level", 0.95);
  CHECK(a.hash() != before);
  CHECK(a.canonical() ==
        "experiment.interval_level=0.95\nprior.b2=2.25\nrun.seed=7\n");
}

TEST_CASE("data config defaults and happy path") {
  Config cfg = Config::from_string("[design]\nn = 4\n[run]\nseed = 11\n");
  const DataConfig d = data_config_from(cfg);
  CHECK(d.model_label == "unit");
  CHECK(d.theta0.mu == 1.0);
  CHECK(d.theta0.omega2 == 1.0);
  CHECK(d.design == DesignKind::ConstantT);
  CHECK(d.design_param == 5.0);
  CHECK(d.n == 4);
  CHECK(d.stat_mode == StatMode::Exact);
  CHECK(d.m == 1000);
  CHECK(d.seed == 11);
  CHECK_NOTHROW(cfg.finish());
}

TEST_CASE("data config value errors name their field") {
  auto data_err = [](const std::string& text) {
    Config cfg = Config::from_string(text);
    data_config_from(cfg);
  };
  CHECK_THROWS_WITH_AS(data_err("[theta0]\nomega2 = -1\n"),
                       "config field 'theta0.omega2': must be > 0", ConfigError);
  CHECK_THROWS_WITH_AS(data_err("[design]\nn = 0\n"),
                       "config field 'design.n': must be >= 1", ConfigError);
  CHECK_THROWS_WITH_AS(data_err("[design]\nparam = 0\n"),
                       "config field 'design.param': must be > 0", ConfigError);
  CHECK_THROWS_AS(data_err("[model]\nlabel = cubic\n"), ConfigError);
  CHECK_THROWS_WITH(data_err("[model]\nlabel = cubic\n"),
                    doctest::Contains("model.label"));
  CHECK_THROWS_WITH(data_err("[model]\nlabel = cubic\n"),
                    doctest::Contains("unknown model label"));
  CHECK_THROWS_WITH_AS(
      data_err("[effects]\ncovariance = banded\n"),
      "config field 'effects.covariance': must be 'iid', 'tridiagonal', or 'compound'",
      ConfigError);
  CHECK_THROWS_WITH(data_err("[effects]\ncovariance = tridiagonal\nrho = 0.7\n"),
                    doctest::Contains("effects.rho"));
  CHECK_THROWS_WITH_AS(
      data_err("[model]\nlabel = linear\n"),
      "config field 'sim.mode': exact statistics exist only for the unit model",
      ConfigError);
  CHECK_THROWS_WITH_AS(data_err("[sim]\nmode = euler\n"),
                       "config field 'sim.mode': must be 'exact' or 'discretized'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(data_err("[sim]\nmode = discretized\nm = 0\n"),
                       "config field 'sim.m': must be >= 1", ConfigError);
  // Discretized statistics unlock the non-unit models.
  CHECK_NOTHROW(data_err("[model]\nlabel = linear\n[sim]\nmode = discretized\n"));
}

TEST_CASE("prior and space and mcmc sections") {
  Config ok = Config::from_string(
      "[prior]\nkind = uniform_box\n[space]\nmu_lo = -2\nmu_hi = 2\n"
      "[mcmc]\nsteps = 500\n");
  const Prior p = prior_from(ok);
  CHECK(p.kind == PriorKind::UniformBox);
  const ParamSpace s = space_from(ok);
  CHECK(s.mu_lo == -2.0);
  CHECK(s.mu_hi == 2.0);
  CHECK(s.omega2_lo == doctest::Approx(1e-3));
  const McmcSettings m = mcmc_from(ok);
  CHECK(m.steps == 500);
  CHECK(m.step_scale[0] == 0.0);
  CHECK_NOTHROW(ok.finish());

  auto prior_err = [](const std::string& text) {
    return prior_from(Config::from_string(text));
  };
  CHECK_THROWS_WITH(prior_err("[prior]\nkind = banana\n"),
                    doctest::Contains("prior.kind"));
  CHECK_THROWS_WITH(prior_err("[prior]\nb2 = -1\n"),
                    doctest::Contains("config field 'prior'"));

  auto space_err = [](const std::string& text) {
    return space_from(Config::from_string(text));
  };
  CHECK_THROWS_WITH_AS(space_err("[space]\nmu_lo = 3\nmu_hi = -3\n"),
                       "config field 'space.mu_lo': needs mu_lo < mu_hi",
                       ConfigError);
  CHECK_THROWS_WITH_AS(space_err("[space]\nomega2_lo = 0\n"),
                       "config field 'space.omega2_lo': must be > 0",
                       ConfigError);

  auto mcmc_err = [](const std::string& text) {
    return mcmc_from(Config::from_string(text));
  };
  CHECK_THROWS_WITH_AS(mcmc_err("[mcmc]\nsteps = 10\n"),
                       "config field 'mcmc.steps': must be >= 50", ConfigError);
  CHECK_THROWS_WITH(mcmc_err("[mcmc]\nstep_mu = -1\n"),
                    doctest::Contains("mcmc.step_mu"));
}

TEST_CASE("experiment config happy path echoes defaults") {
  Config cfg = Config::from_string(
      "[experiment]\nkind = consistency\nn_grid = 10,20\nreplicates = 2\n"
      "[run]\nseed = 5\n");
  const ExperimentConfig ec = experiment_config_from(cfg);
  CHECK(ec.kind == ExperimentKind::Consistency);
  CHECK(ec.n_grid == std::vector<long>{10, 20});
  CHECK(ec.replicates == 2);
  CHECK(ec.seed == 5);
  CHECK(ec.prior.kind == PriorKind::NormalMu);
  CHECK(ec.prior.B2 == 2.25);
  CHECK(ec.interval_level == 0.95);
  CHECK(ec.mcmc.steps == 100000);
  CHECK_NOTHROW(cfg.finish());
  // Defaults the run consulted are fingerprinted alongside explicit keys.
  const std::string canon = cfg.canonical();
  CHECK(canon.find("prior.b2=2.25\n") != std::string::npos);
  CHECK(canon.find("experiment.interval_level=0.95\n") != std::string::npos);
  CHECK(canon.find("experiment.n_grid=10,20\n") != std::string::npos);
  CHECK(canon.find("run.seed=5\n") != std::string::npos);
}

TEST_CASE("experiment config validation failures name the field") {
  auto exp_err = [](const std::string& text) {
    return experiment_config_from(Config::from_string(text));
  };
  CHECK_THROWS_WITH(exp_err("[experiment]\nn_grid = 10,10\n"),
                    doctest::Contains("n_grid"));
  CHECK_THROWS_WITH(exp_err("[experiment]\nreplicates = 0\n"),
                    doctest::Contains("replicates"));
  CHECK_THROWS_WITH(exp_err("[experiment]\nkind = normality\n"),
                    doctest::Contains("prior.kind"));  // NormalMu default
  CHECK_THROWS_WITH(exp_err("[experiment]\nkind = dependence\nrho_weak = 0.6\n"),
                    doctest::Contains("rho_weak"));
  CHECK_THROWS_WITH(
      exp_err("[experiment]\nkind = discretization\nm_grid = 3,7\nm_ref = 10\n"),
      doctest::Contains("m_ref"));
  CHECK_THROWS_WITH(exp_err("[theta0]\nmu = 50\n"),
                    doctest::Contains("theta0"));
  CHECK_THROWS_WITH(exp_err("[experiment]\nkind = trend\n"),
                    doctest::Contains("unknown experiment"));
  CHECK_THROWS_WITH(
      exp_err("[model]\nlabel = linear\n[sim]\nmode = exact\n"),
      doctest::Contains("sim.mode"));
}

TEST_CASE("experiment configs reject per-dataset sections") {
  // The sweep owns n (via n_grid) and the effects structure (via rho_weak /
  // rho_strong), so [design] n and [effects] keys must fail the unknown-key
  // check instead of being silently ignored.
  Config with_n = Config::from_string(
      "[experiment]\nkind = consistency\n[design]\nn = 10\n");
  experiment_config_from(with_n);
  CHECK_THROWS_WITH(with_n.finish(), doctest::Contains("design.n"));

  Config with_eff = Config::from_string(
      "[experiment]\nkind = consistency\n[effects]\ncovariance = iid\n");
  experiment_config_from(with_eff);
  CHECK_THROWS_WITH(with_eff.finish(), doctest::Contains("effects.covariance"));
}

}  // TEST_SUITE
