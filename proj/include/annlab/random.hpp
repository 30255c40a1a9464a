#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace annlab {

/// Engine used for every random stream in the library. Streams are never
/// seeded from ambient entropy; each one is derived from a user seed and a
/// stable label so that adding parallelism never reorders randomness.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from `seed` and a label such as "lsh/table".
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept;

/// Derives a child seed for the `index`-th member of a labelled family,
/// e.g. derive_seed(seed, "lsh/table", 7).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t seed, std::string_view label) {
  return Rng(derive_seed(seed, label));
}

inline Rng make_rng(std::uint64_t seed, std::string_view label,
                    std::uint64_t index) {
  return Rng(derive_seed(seed, label, index));
}

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim);

/// Uniform point on the unit sphere S^{dim-1}.
std::vector<double> random_unit_vector(Rng& rng, std::size_t dim);

/// Uniform double in the open interval (0, 1).
double uniform_open01(Rng& rng);

}  // namespace annlab
