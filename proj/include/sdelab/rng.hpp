#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sdelab {

/// splitmix64 finalizer; good avalanche for deriving child-stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic random stream: mt19937_64 with an explicit Box-Muller
/// transform (spare value cached, so draw order is well-defined and
/// reproducible across platforms -- std::normal_distribution is not).
///
/// Child streams are derived by hashing the parent seed with integer tags
/// (e.g. replicate and subject index).  Two consumers holding children with
/// distinct tags never share state, which makes parallel simulation
/// schedules reproducible independent of thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// U(0,1], uses the top 53 bits of the generator.
  double uniform();

  /// Standard normal via Box-Muller.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Append `count` standard normal draws to `out`.
  void fill_normal(std::vector<double>& out, std::size_t count);

  /// Child stream keyed by up to three integer tags.
  Rng child(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sdelab
