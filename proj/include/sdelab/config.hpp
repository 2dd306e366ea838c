#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdelab/experiments.hpp"
#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"

namespace sdelab {

/// Error in configuration text or values.  The message names the file and
/// line for syntax errors and the `section.key` for value errors.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Strict INI-style configuration reader:
///
///   [section]
///   key = value      # '#' and ';' start comments
///
/// Sections and keys are lowercase [a-z0-9_]; duplicate keys, keys outside a
/// section, and malformed lines are rejected at parse time with the line
/// number.  Typed getters consume keys and record the value actually used
/// (parsed or default) in a canonical resolved map; finish() then rejects
/// any key no getter consumed, so misspelled or out-of-place keys fail
/// loudly instead of being silently ignored.  The resolved map -- defaults
/// included -- feeds the provenance hash, so outputs are fingerprinted by
/// the configuration that was in effect, not by the file text.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text,
                            const std::string& origin = "<config>");

  bool has(const std::string& section, const std::string& key) const;

  /// Insert or overwrite a raw value (used for command-line overrides such
  /// as --seed); the entry is subject to the same consumption rules.
  void set(const std::string& section, const std::string& key,
           const std::string& value);

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  /// Comma-separated list of integers, e.g. "10,100,1000".
  std::vector<long> get_long_list(const std::string& section,
                                  const std::string& key,
                                  const std::vector<long>& fallback) const;

  /// Throws ConfigError naming every key that was parsed but never consumed.
  void finish() const;

  /// Sorted "section.key=value" lines of every value consulted so far.
  std::string canonical() const;
  /// Hex FNV-1a hash of canonical(); the provenance fingerprint.
  std::string hash() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  void record(const std::string& section, const std::string& key,
              const std::string& value) const;

  std::string origin_;
  std::map<std::string, Entry> raw_;  // "section.key" -> entry
  mutable std::map<std::string, std::string> resolved_;
};

/// Data-generation settings shared by the simulate / fit / posterior
/// commands, read from [model], [design], [effects], [theta0], [sim], [run].
struct DataConfig {
  std::string model_label = "unit";
  Theta theta0{1.0, 1.0};
  DesignKind design = DesignKind::ConstantT;
  double design_param = 5.0;
  double x0 = 0.0;
  long n = 50;
  EffectsCovariance cov = EffectsCovariance::iid();
  StatMode stat_mode = StatMode::Exact;
  long m = 1000;
  std::uint64_t seed = 0;
};

DataConfig data_config_from(const Config& cfg);
Prior prior_from(const Config& cfg);        // [prior]
ParamSpace space_from(const Config& cfg);   // [space]
McmcSettings mcmc_from(const Config& cfg);  // [mcmc]
/// Full experiment description from [experiment] plus the shared sections.
ExperimentConfig experiment_config_from(const Config& cfg);

}  // namespace sdelab
