#pragma once

// Shared fixtures for the test suites: deterministic synthetic datasets and
// small filesystem helpers.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sdelab/likelihood.hpp"
#include "sdelab/model.hpp"
#include "sdelab/pathsim.hpp"
#include "sdelab/rng.hpp"

namespace testutil {

// Exact-statistics dataset from the unit model under a constant design:
// phi_i ~ N(mu, omega2) from one child stream, W_i(T) ~ N(0, T) from
// per-subject child streams.  Deterministic in `seed` and prefix-stable
// in n.
inline sdelab::Dataset unit_dataset(int n, double T, const sdelab::Theta& theta,
                                    std::uint64_t seed) {
  sdelab::Rng master(seed);
  sdelab::Dataset data;
  data.design = sdelab::design_sequence(sdelab::DesignKind::ConstantT, T, n, 0.0);
  data.stats.resize(n);
  sdelab::Rng effects = master.child(0);
  for (int i = 0; i < n; ++i) {
    const double phi = effects.normal(theta.mu, std::sqrt(theta.omega2));
    sdelab::Rng path = master.child(1, static_cast<std::uint64_t>(i));
    const double w_T = path.normal(0.0, std::sqrt(T));
    data.stats[i] = sdelab::suff_stats_exact_unit(phi, T, w_T);
  }
  return data;
}

// Dataset with prescribed (U_i, V_i) pairs and no design windows.
inline sdelab::Dataset stats_dataset(std::initializer_list<std::pair<double, double>> uv) {
  sdelab::Dataset data;
  for (const auto& [u, v] : uv) {
    sdelab::SuffStats s;
    s.U = u;
    s.V = v;
    data.stats.push_back(s);
  }
  return data;
}

// Fresh scratch directory under the system temp root; removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    dir_ = base / ("sdelab_test_" + std::to_string(::getpid()) + "_" +
                   std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace testutil
