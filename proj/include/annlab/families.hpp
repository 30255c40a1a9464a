#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "annlab/lsh.hpp"

namespace annlab {

/// (1 - r/d, 1 - cr/d). Throws if cr >= d or r <= 0.
std::pair<double, double> bit_sampling_sensitivity(std::size_t d, double r, double c);

/// h(x) = x_i for a uniformly random coordinate i.
class BitSamplingFamily final : public LshFamily {
 public:
  BitSamplingFamily(std::size_t d, double r, double c);

  std::unique_ptr<HashFunction> sample(std::uint64_t seed) const override;
  std::string name() const override { return "bit-sampling"; }
  Metric metric() const override { return Metric::hamming(); }
  std::size_t dim() const noexcept { return d_; }

 private:
  std::size_t d_;
};

/// Collision probability of h(x) = floor(<x,g>/(w r) + b) for points at
/// l2 distance s*r, g Gaussian and b ~ U[0,1).
double pstable_collision(double s, double w);

/// Bucket width minimizing the exponent log(1/p(1,w)) / log(1/p(c,w)).
double pstable_best_w(double c);

class PStableFamily final : public LshFamily {
 public:
  PStableFamily(std::size_t d, double r, double c, double w);

  std::unique_ptr<HashFunction> sample(std::uint64_t seed) const override;
  std::string name() const override { return "p-stable"; }
  Metric metric() const override { return Metric::l2(); }
  double w() const noexcept { return w_; }
  std::size_t dim() const noexcept { return d_; }

 private:
  std::size_t d_;
  double w_;
};

/// Pr[A and B] / Pr[A or B] with A = {<x,g> >= eta}, B = {<y,g> >= eta} for
/// unit x, y at distance s in (0, 2).
double spherical_collision(double s, double eta);

/// (4 - c^2 r^2) / ((4 - r^2) c^2).
double rho_spherical(double c, double r);

/// Exponent measured from spherical_collision minus rho_spherical.
double spherical_delta(double c, double r, double eta);

inline constexpr double kOverflowTarget = 1e-4;

/// max(ceil(40 * e^{eta^2 / 2}), smallest T whose overflow probability
/// (1 - Phi_bar(eta))^T is at most kOverflowTarget).
std::size_t spherical_default_tmax(double eta);

inline constexpr double kUnitTolerance = 1e-6;

/// One sampled Gaussian-threshold function. Gaussians are generated lazily
/// in chunks keyed by (seed, chunk), so the values never depend on the order
/// in which points are hashed.
class SphericalFunction final : public HashFunction {
 public:
  static constexpr std::size_t kChunk = 32;

  SphericalFunction(std::size_t d, double eta, std::size_t t_max, std::uint64_t seed);

  /// Index t >= 1 of the first g_t with <x, g_t> >= eta, or overflow_bucket().
  std::uint64_t operator()(const Point& x) const override { return hash(x.coords()); }
  std::uint64_t hash(std::span<const double> x) const;
  std::uint64_t overflow_bucket() const noexcept { return overflow_; }
  std::size_t generated() const noexcept;

 private:
  const double* chunk(std::size_t c) const;

  std::size_t d_;
  double eta_;
  std::size_t t_max_;
  std::uint64_t seed_;
  std::uint64_t overflow_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<std::vector<double>>> owned_;
  std::unique_ptr<std::atomic<const double*>[]> slots_;
};

class SphericalFamily final : public LshFamily {
 public:
  /// t_max = 0 selects spherical_default_tmax(eta).
  SphericalFamily(std::size_t d, double r, double c, double eta, std::size_t t_max = 0);

  std::unique_ptr<HashFunction> sample(std::uint64_t seed) const override;
  std::string name() const override { return "spherical"; }
  Metric metric() const override { return Metric::l2(); }
  double eta() const noexcept { return eta_; }
  std::size_t t_max() const noexcept { return t_max_; }
  std::size_t dim() const noexcept { return d_; }

 private:
  std::size_t d_;
  double eta_;
  std::size_t t_max_;
};

}  // namespace annlab
