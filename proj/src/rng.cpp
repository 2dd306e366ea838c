#include "sdelab/rng.hpp"

#include <cmath>

namespace sdelab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

double Rng::uniform() {
  // (0,1]: never 0, so log(u) below is always finite.
  return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

void Rng::fill_normal(std::vector<double>& out, std::size_t count) {
  out.reserve(out.size() + count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(normal());
}

Rng Rng::child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  std::uint64_t h = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ mix64(a));
  h = mix64(h ^ mix64(b ^ 0x14057b7ef767814fULL));
  h = mix64(h ^ mix64(c ^ 0x27bb2ee687b0b0fdULL));
  return Rng(h);
}

}  // namespace sdelab
