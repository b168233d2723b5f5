#include "fgan/rng.hpp"

#include <cmath>

namespace fgan {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : root_(seed), state_(seed) {
  // Warm the state so seeds 0 and 1 do not share a prefix.
  (void)splitmix64(state_);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_unit();
}

int Rng::next_int(int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

float Rng::normal(float mean, float stddev) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + stddev * spare_;
  }
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 < 1e-300) u1 = 1e-300;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = static_cast<float>(r * std::sin(a));
  have_spare_ = true;
  return mean + stddev * static_cast<float>(r * std::cos(a));
}

Rng Rng::derive(std::string_view label) const {
  return Rng(hash_mix(root_, hash_label(label)));
}

std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                       std::uint64_t d) {
  std::uint64_t x = a;
  x ^= b + 0x9e3779b97f4a7c15ull + (x << 6) + (x >> 2);
  x ^= c + 0x9e3779b97f4a7c15ull + (x << 6) + (x >> 2);
  x ^= d + 0x9e3779b97f4a7c15ull + (x << 6) + (x >> 2);
  return splitmix64(x);
}

double hash_unit(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                 std::uint64_t d) {
  return static_cast<double>(hash_mix(a, b, c, d) >> 11) * 0x1.0p-53;
}

}  // namespace fgan
