#include "annlab/random.hpp"

#include <cmath>

namespace annlab {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  return mix64(mix64(seed) ^ fnv1a(label));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index) noexcept {
  return mix64(derive_seed(seed, label) + mix64(index + 1));
}

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> g(dim);
  for (auto& v : g) v = normal(rng);
  return g;
}

std::vector<double> random_unit_vector(Rng& rng, std::size_t dim) {
  std::vector<double> g;
  double norm2 = 0.0;
  do {
    g = gaussian_vector(rng, dim);
    norm2 = 0.0;
    for (double v : g) norm2 += v * v;
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& v : g) v *= inv;
  return g;
}

double uniform_open01(Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u;
  do {
    u = uni(rng);
  } while (u <= 0.0);
  return u;
}

}  // namespace annlab
