#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "annlab/core.hpp"

namespace annlab {

/// Gaussian random projection R^d -> R^k with entries N(0, 1/k), so that
/// E ||f(x)||^2 = ||x||^2.
class JlMap {
 public:
  JlMap(std::size_t source_dim, std::size_t target_dim, std::uint64_t seed);

  std::size_t source_dim() const noexcept { return d_; }
  std::size_t target_dim() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double scale() const noexcept { return scale_; }
  /// Row-major k x d matrix of unscaled N(0,1) entries.
  std::span<const double> matrix() const noexcept { return a_; }

  std::vector<double> apply(std::span<const double> x) const;
  Point apply(const Point& x) const { return Point::dense(apply(x.coords())); }

 private:
  std::size_t d_, k_;
  std::uint64_t seed_;
  double scale_;
  std::vector<double> a_;
};

/// GF(2) linear map x -> Ax over {0,1}^d with Bernoulli(p) entries and
/// p = 1 / (2r).
class KorMap {
 public:
  KorMap(std::size_t source_dim, std::size_t target_dim, double r,
         std::uint64_t seed);

  std::size_t source_dim() const noexcept { return d_; }
  std::size_t target_dim() const noexcept { return rows_.size(); }
  double entry_prob() const noexcept { return p_; }
  double r() const noexcept { return r_; }
  const BitVector& row(std::size_t j) const { return rows_.at(j); }

  BitVector apply(const BitVector& x) const;
  Point apply(const Point& x) const { return Point::bits(apply(x.bit_vector())); }

  /// Probability that one output bit differs for inputs at Hamming distance h.
  static double disagreement(double p, double h);
  /// Midpoint decision threshold between expected output distances at
  /// input distances r and (1 + eps) r.
  double threshold(double eps) const;

 private:
  std::size_t d_;
  double r_, p_;
  std::vector<BitVector> rows_;
};

struct CubeKeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept;
};

/// Dictionary of grid cubes of side eps*r/sqrt(k) in a JL-reduced space.
class CubeDictIndex {
 public:
  static constexpr std::size_t kDefaultMaxCells = 4'000'000;

  /// Throws ResourceLimit once more than max_cells (point, cube) admissions
  /// would be needed.
  CubeDictIndex(const Dataset& data, double r, double eps, std::size_t k,
                std::uint64_t seed, std::size_t max_cells = kDefaultMaxCells);

  double side() const noexcept { return side_; }
  double r() const noexcept { return r_; }
  double eps() const noexcept { return eps_; }
  std::size_t cube_count() const noexcept { return table_.size(); }
  const JlMap& map() const noexcept { return map_; }
  std::span<const std::vector<double>> embedded() const noexcept { return embedded_; }
  const std::unordered_map<std::vector<std::int64_t>, std::size_t, CubeKeyHash>&
  table() const noexcept {
    return table_;
  }

  std::vector<std::int64_t> cube_of(std::span<const double> y) const;
  /// Smallest l2 distance from y to any point of the cube.
  double cube_min_distance(const std::vector<std::int64_t>& key,
                           std::span<const double> y) const;

  std::optional<std::size_t> query(const Point& q) const;

 private:
  double r_, eps_, side_;
  JlMap map_;
  std::vector<std::vector<double>> embedded_;
  std::unordered_map<std::vector<std::int64_t>, std::size_t, CubeKeyHash> table_;
};

struct LookupAnswer {
  std::size_t index = 0;
  std::size_t embedded_distance = 0;
};

/// Full table over {0,1}^k storing, for every reduced query, the dataset point
/// nearest to it in the reduced space.
class HammingLookupIndex {
 public:
  static constexpr std::size_t kDefaultMaxBits = 24;

  HammingLookupIndex(const Dataset& data, double r, double eps, std::size_t k,
                     std::uint64_t seed, std::size_t k_max = kDefaultMaxBits);

  std::size_t k() const noexcept { return map_.target_dim(); }
  double r() const noexcept { return r_; }
  double eps() const noexcept { return eps_; }
  const KorMap& map() const noexcept { return map_; }
  std::size_t table_size() const noexcept { return index_.size(); }
  /// Reduced codes f(p) packed into the low k bits.
  std::span<const std::uint64_t> codes() const noexcept { return codes_; }
  LookupAnswer entry(std::uint64_t z) const {
    return {index_.at(z), static_cast<std::size_t>(dist_.at(z))};
  }

  std::uint64_t code_of(const Point& x) const;
  std::optional<LookupAnswer> query(const Point& q) const;

 private:
  double r_, eps_;
  KorMap map_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::uint32_t> index_;
  std::vector<std::uint8_t> dist_;
};

}  // namespace annlab
