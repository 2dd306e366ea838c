#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdelab/likelihood.hpp"
#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"
#include "sdelab/posterior.hpp"
#include "sdelab/rng.hpp"

namespace sdelab {

/// The asymptotic phenomena the harness can reproduce.
enum class ExperimentKind {
  Consistency,     // posterior concentration (or failure) across designs
  Normality,       // standardized-posterior closeness to N(0, I)
  Dependence,      // weak vs strong effects-correlation dichotomy
  Intervals,       // classical CI vs Bayesian HPD at small n
  Discretization,  // Ito-sum statistics vs fine-grid reference
  Lrt,             // likelihood-ratio statistic calibration
};

ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

struct McmcSettings {
  long steps = 100000;
  // Proposal scales (mu, log-omega2); 0 selects the auto scale
  // (2.4 x Laplace sd per coordinate).
  std::array<double, 2> step_scale{0.0, 0.0};
};

/// Declarative description of one experiment sweep.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Consistency;
  std::string model_label = "unit";
  Theta theta0{1.0, 1.0};
  DesignKind design = DesignKind::ConstantT;
  double design_param = 5.0;
  double x0 = 0.0;
  std::vector<long> n_grid{10, 100, 1000};  // subjects (strictly increasing)
  std::vector<long> m_grid{100, 1000, 10000};  // grids (Discretization)
  long m_ref = 1000000;  // reference grid (Discretization)
  int replicates = 1;
  std::uint64_t seed = 0;
  Prior prior = Prior::normal_mu(0.0, 2.25, 1.0);
  ParamSpace space;
  double delta = 0.5;           // ball radius (Consistency)
  double interval_level = 0.95;  // level (Intervals)
  McmcSettings mcmc;
  std::string sampler = "mcmc";  // Normality: "mcmc" | "exact"
  StatMode stat_mode = StatMode::Exact;  // how subject statistics are formed
  long m_data = 1000;  // path grid when stat_mode = Discretized
  double rho_weak = 1.0 / 3.0;    // Dependence: tridiagonal rho
  double rho_strong = 1.0 / 3.0;  // Dependence: compound-symmetry rho
  std::string config_hash;  // provenance; derived from fields when empty

  void validate() const;       // throws naming the offending field
  std::string canonical() const;  // canonical key=value serialization
};

struct ResultRow {
  std::string experiment;
  long n_or_m = 0;
  int replicate = 0;
  std::string metric;
  double value = 0.0;
  bool error_flag = false;
};

struct SummaryEntry {
  long n_or_m = 0;
  std::map<std::string, double> metrics;
};

struct DensityCurve {
  std::string label;
  std::vector<double> grid;
  std::vector<double> density;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::vector<SummaryEntry> summary;
  std::vector<DensityCurve> curves;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::string rows_to_csv() const;
  std::string summary_to_json() const;
  /// Value of a summary metric at a given n_or_m (throws if absent).
  double summary_metric(long n_or_m, const std::string& name) const;
};

std::string curve_to_csv(const DensityCurve& curve,
                         const ExperimentResult& provenance);

/// Simulate one dataset of per-subject statistics: joint effects draw
/// (Cholesky path, so IID and rho=0 structured draws coincide bit for bit),
/// then exact unit-model statistics or Euler-path Ito sums per subject.
/// Subject-level RNG streams are children of `rng`'s seed, so datasets are
/// prefix-stable: the first k subjects of an n-subject draw equal the
/// k-subject draw.
Dataset simulate_dataset(const ModelSpec& model, const Design& design,
                         const Theta& theta0, const EffectsCovariance& cov,
                         StatMode mode, long m, const Rng& rng);

/// Run one experiment; `threads` caps worker parallelism (0 = hardware).
/// Output is deterministic in (config, seed) and independent of `threads`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

}  // namespace sdelab
