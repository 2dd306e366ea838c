#include "sdelab/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sdelab/io.hpp"

namespace sdelab {

namespace {

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
  }
  return true;
}

[[noreturn]] void fail_line(const std::string& origin, int line,
                            const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_field(const std::string& field,
                             const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

// Re-throw invalid_argument from a factory/parser as a ConfigError naming
// the configuration field it came from.
template <typename Fn>
auto named(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    fail_field(field, e.what());
  }
}

long parse_long(const std::string& field, const std::string& text) {
  long v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    fail_field(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

Config Config::from_string(const std::string& text,
                           const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::string section;
  int lineno = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.resize(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail_line(origin, lineno, "expected ']' to close the section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) {
        fail_line(origin, lineno, "section names are lowercase [a-z0-9_]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail_line(origin, lineno, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key)) {
      fail_line(origin, lineno, "key names are lowercase [a-z0-9_]");
    }
    if (value.empty()) {
      fail_line(origin, lineno, "empty value for key '" + key + "'");
    }
    if (section.empty()) {
      fail_line(origin, lineno,
                "key '" + key + "' appears before any [section]");
    }
    const std::string full = section + "." + key;
    const auto [it, inserted] = cfg.raw_.try_emplace(full, Entry{value, lineno});
    if (!inserted) {
      fail_line(origin, lineno,
                "duplicate key '" + full + "' (first defined at line " +
                    std::to_string(it->second.line) + ")");
    }
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
  return raw_.find(section + "." + key) != raw_.end();
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  Entry& e = raw_[section + "." + key];
  e.value = value;
  e.line = 0;
  e.used = false;
}

const Config::Entry* Config::find(const std::string& section,
                                  const std::string& key) const {
  const auto it = raw_.find(section + "." + key);
  if (it == raw_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

void Config::record(const std::string& section, const std::string& key,
                    const std::string& value) const {
  resolved_[section + "." + key] = value;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  const std::string v = e ? e->value : fallback;
  record(section, key, v);
  return v;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const Entry* e = find(section, key);
  double v = fallback;
  if (e != nullptr) {
    const char* begin = e->value.c_str();
    char* end = nullptr;
    v = std::strtod(begin, &end);
    if (end != begin + e->value.size()) {
      fail_field(section + "." + key,
                 "expected a number, got '" + e->value + "'");
    }
  }
  record(section, key, format_double(v));
  return v;
}

long Config::get_long(const std::string& section, const std::string& key,
                      long fallback) const {
  const Entry* e = find(section, key);
  const long v = e ? parse_long(section + "." + key, e->value) : fallback;
  record(section, key, std::to_string(v));
  return v;
}

std::uint64_t Config::get_u64(const std::string& section,
                              const std::string& key,
                              std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  std::uint64_t v = fallback;
  if (e != nullptr) {
    const char* first = e->value.data();
    const char* last = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
      fail_field(section + "." + key,
                 "expected a non-negative integer, got '" + e->value + "'");
    }
  }
  record(section, key, std::to_string(v));
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  const Entry* e = find(section, key);
  bool v = fallback;
  if (e != nullptr) {
    if (e->value == "true") {
      v = true;
    } else if (e->value == "false") {
      v = false;
    } else {
      fail_field(section + "." + key,
                 "expected true or false, got '" + e->value + "'");
    }
  }
  record(section, key, v ? "true" : "false");
  return v;
}

std::vector<long> Config::get_long_list(
    const std::string& section, const std::string& key,
    const std::vector<long>& fallback) const {
  const Entry* e = find(section, key);
  std::vector<long> v;
  if (e != nullptr) {
    std::size_t start = 0;
    const std::string& text = e->value;
    while (start <= text.size()) {
      std::size_t comma = text.find(',', start);
      if (comma == std::string::npos) comma = text.size();
      const std::string item = trim(text.substr(start, comma - start));
      if (item.empty()) {
        fail_field(section + "." + key, "empty list entry in '" + text + "'");
      }
      v.push_back(parse_long(section + "." + key, item));
      start = comma + 1;
    }
  } else {
    v = fallback;
  }
  std::string canon;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) canon += ",";
    canon += std::to_string(v[i]);
  }
  record(section, key, canon);
  return v;
}

void Config::finish() const {
  std::vector<std::string> unknown;
  for (const auto& [k, e] : raw_) {
    if (!e.used) unknown.push_back(k + " (line " + std::to_string(e.line) + ")");
  }
  if (unknown.empty()) return;
  std::string msg = origin_ + ": unknown config key";
  if (unknown.size() > 1) msg += "s";
  msg += ": ";
  for (std::size_t i = 0; i < unknown.size(); ++i) {
    if (i > 0) msg += ", ";
    msg += unknown[i];
  }
  throw ConfigError(msg);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : resolved_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string Config::hash() const { return hex64(fnv1a64(canonical())); }

namespace {

// Sections shared by every command: model, design kind/param, theta0,
// statistic mode, seed.
DataConfig read_base(const Config& cfg) {
  DataConfig d;
  d.model_label = cfg.get_string("model", "label", "unit");
  named("model.label", [&] { return ModelSpec::by_label(d.model_label).label; });
  d.x0 = cfg.get_double("model", "x0", 0.0);
  if (!std::isfinite(d.x0)) fail_field("model.x0", "must be finite");
  d.design = named("design.kind", [&] {
    return design_kind_from_string(cfg.get_string("design", "kind", "constant"));
  });
  d.design_param = cfg.get_double("design", "param", 5.0);
  if (!(d.design_param > 0.0) || !std::isfinite(d.design_param)) {
    fail_field("design.param", "must be > 0");
  }
  d.theta0.mu = cfg.get_double("theta0", "mu", 1.0);
  if (!std::isfinite(d.theta0.mu)) fail_field("theta0.mu", "must be finite");
  d.theta0.omega2 = cfg.get_double("theta0", "omega2", 1.0);
  if (!(d.theta0.omega2 > 0.0) || !std::isfinite(d.theta0.omega2)) {
    fail_field("theta0.omega2", "must be > 0");
  }
  const std::string mode = cfg.get_string("sim", "mode", "exact");
  if (mode == "exact") {
    d.stat_mode = StatMode::Exact;
  } else if (mode == "discretized") {
    d.stat_mode = StatMode::Discretized;
  } else {
    fail_field("sim.mode", "must be 'exact' or 'discretized'");
  }
  d.m = cfg.get_long("sim", "m", 1000);
  if (d.m < 1) fail_field("sim.m", "must be >= 1");
  if (d.stat_mode == StatMode::Exact && d.model_label != "unit") {
    fail_field("sim.mode", "exact statistics exist only for the unit model");
  }
  d.seed = cfg.get_u64("run", "seed", 0);
  return d;
}

}  // namespace

DataConfig data_config_from(const Config& cfg) {
  DataConfig d = read_base(cfg);
  d.n = cfg.get_long("design", "n", 50);
  if (d.n < 1) fail_field("design.n", "must be >= 1");
  const std::string cov = cfg.get_string("effects", "covariance", "iid");
  const double rho = cfg.get_double("effects", "rho", 0.0);
  if (cov == "iid") {
    d.cov = EffectsCovariance::iid();
  } else if (cov == "tridiagonal") {
    d.cov = named("effects.rho", [&] { return EffectsCovariance::tridiagonal(rho); });
  } else if (cov == "compound") {
    d.cov = named("effects.rho",
                  [&] { return EffectsCovariance::compound_symmetry(rho); });
  } else {
    fail_field("effects.covariance",
               "must be 'iid', 'tridiagonal', or 'compound'");
  }
  return d;
}

Prior prior_from(const Config& cfg) {
  const std::string kind_name = cfg.get_string("prior", "kind", "normal_mu");
  const double a = cfg.get_double("prior", "a", 0.0);
  const double b2 = cfg.get_double("prior", "b2", 2.25);
  const double fixed_omega2 = cfg.get_double("prior", "fixed_omega2", 1.0);
  const double a_w = cfg.get_double("prior", "a_w", 1.0);
  const double b_w = cfg.get_double("prior", "b_w", 1.0);
  const PriorKind kind =
      named("prior.kind", [&] { return prior_kind_from_string(kind_name); });
  switch (kind) {
    case PriorKind::NormalMu:
      return named("prior", [&] { return Prior::normal_mu(a, b2, fixed_omega2); });
    case PriorKind::UniformBox:
      return Prior::uniform_box();
    case PriorKind::TruncatedNormalProduct:
      return named("prior", [&] {
        return Prior::truncated_normal_product(a, b2, a_w, b_w);
      });
  }
  throw std::logic_error("prior_from: unreachable");
}

ParamSpace space_from(const Config& cfg) {
  ParamSpace s;
  s.mu_lo = cfg.get_double("space", "mu_lo", s.mu_lo);
  s.mu_hi = cfg.get_double("space", "mu_hi", s.mu_hi);
  s.omega2_lo = cfg.get_double("space", "omega2_lo", s.omega2_lo);
  s.omega2_hi = cfg.get_double("space", "omega2_hi", s.omega2_hi);
  if (!(s.mu_lo < s.mu_hi)) fail_field("space.mu_lo", "needs mu_lo < mu_hi");
  if (!(s.omega2_lo > 0.0)) fail_field("space.omega2_lo", "must be > 0");
  if (!(s.omega2_lo < s.omega2_hi)) {
    fail_field("space.omega2_lo", "needs omega2_lo < omega2_hi");
  }
  return s;
}

McmcSettings mcmc_from(const Config& cfg) {
  McmcSettings m;
  m.steps = cfg.get_long("mcmc", "steps", m.steps);
  if (m.steps < 50) fail_field("mcmc.steps", "must be >= 50");
  m.step_scale[0] = cfg.get_double("mcmc", "step_mu", 0.0);
  m.step_scale[1] = cfg.get_double("mcmc", "step_omega2", 0.0);
  if (m.step_scale[0] < 0.0 || m.step_scale[1] < 0.0) {
    fail_field("mcmc.step_mu", "proposal scales must be >= 0 (0 = auto)");
  }
  return m;
}

ExperimentConfig experiment_config_from(const Config& cfg) {
  const DataConfig base = read_base(cfg);
  ExperimentConfig ec;
  ec.model_label = base.model_label;
  ec.theta0 = base.theta0;
  ec.design = base.design;
  ec.design_param = base.design_param;
  ec.x0 = base.x0;
  ec.stat_mode = base.stat_mode;
  ec.m_data = base.m;
  ec.seed = base.seed;
  ec.kind = named("experiment.kind", [&] {
    return experiment_kind_from_string(
        cfg.get_string("experiment", "kind", "consistency"));
  });
  ec.n_grid = cfg.get_long_list("experiment", "n_grid", ec.n_grid);
  ec.m_grid = cfg.get_long_list("experiment", "m_grid", ec.m_grid);
  ec.m_ref = cfg.get_long("experiment", "m_ref", ec.m_ref);
  ec.replicates =
      static_cast<int>(cfg.get_long("experiment", "replicates", 1));
  ec.delta = cfg.get_double("experiment", "delta", ec.delta);
  ec.interval_level =
      cfg.get_double("experiment", "interval_level", ec.interval_level);
  ec.sampler = cfg.get_string("experiment", "sampler", ec.sampler);
  ec.rho_weak = cfg.get_double("experiment", "rho_weak", ec.rho_weak);
  ec.rho_strong = cfg.get_double("experiment", "rho_strong", ec.rho_strong);
  ec.prior = prior_from(cfg);
  ec.space = space_from(cfg);
  ec.mcmc = mcmc_from(cfg);
  named("experiment", [&] {
    ec.validate();
    return 0;
  });
  return ec;
}

}  // namespace sdelab
