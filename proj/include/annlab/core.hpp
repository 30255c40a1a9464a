#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "annlab/errors.hpp"

namespace annlab {

/// Bit vector packed 64 bits per word; bit i lives in word i / 64 at
/// position i % 64. Unused high bits of the last word are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t dim);

  /// Parses a string of '0'/'1' characters, most significant = index 0.
  static BitVector from_string(std::string_view bits);

  std::size_t dim() const noexcept { return dim_; }
  bool get(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (i & 63)) & 1ULL;
  }
  void set(std::size_t i, bool value) noexcept;
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= 1ULL << (i & 63); }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  std::size_t popcount() const noexcept;
  BitVector operator^(const BitVector& other) const;
  bool operator==(const BitVector&) const = default;
  std::string to_string() const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> words_;
};

/// A point is either a dense real vector or a packed bit vector.
class Point {
 public:
  Point() = default;

  /// Rejects NaN/Inf coordinates and empty vectors.
  static Point dense(std::vector<double> coords);
  static Point bits(BitVector bits);

  bool is_bits() const noexcept {
    return std::holds_alternative<BitVector>(data_);
  }
  std::size_t dim() const noexcept;

  /// Throws RepresentationMismatch on a bit point.
  std::span<const double> coords() const;
  /// Throws RepresentationMismatch on a dense point.
  const BitVector& bit_vector() const;

  bool operator==(const Point&) const = default;

 private:
  std::variant<std::vector<double>, BitVector> data_;
};

/// A monotone increasing convex psi with psi(0) = 0, defining an Orlicz norm.
class OrliczFunction {
 public:
  /// Validates psi(0) == 0, monotonicity and midpoint convexity on a grid.
  OrliczFunction(std::string name, std::function<double(double)> psi);

  static OrliczFunction power(double p);
  static OrliczFunction exp_minus_one();

  double operator()(double t) const { return psi_(t); }
  /// psi^{-1}(y) for y >= 0 by bisection with a doubling bracket.
  double inverse(double y, double rel_tol = 1e-12) const;
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  std::function<double(double)> psi_;
};

enum class MetricKind { Hamming, L1, L2, Lp, Linf, Orlicz, TopK };

class Metric {
 public:
  static Metric hamming() { return Metric(MetricKind::Hamming); }
  static Metric l1() { return Metric(MetricKind::L1); }
  static Metric l2() { return Metric(MetricKind::L2); }
  static Metric lp(double p);
  static Metric linf() { return Metric(MetricKind::Linf); }
  static Metric orlicz(OrliczFunction psi);
  static Metric top_k(std::size_t k);

  /// Accepts the names produced by name(): hamming, l1, l2, lp:<p>, linf,
  /// orlicz:pow:<p>, orlicz:exp, topk:<k>.
  static Metric parse(std::string_view text);

  MetricKind kind() const noexcept { return kind_; }
  double p() const noexcept { return p_; }
  std::size_t k() const noexcept { return k_; }
  const OrliczFunction& psi() const;
  bool wants_bits() const noexcept { return kind_ == MetricKind::Hamming; }
  std::string name() const;

 private:
  explicit Metric(MetricKind kind) : kind_(kind) {}
  MetricKind kind_;
  double p_ = 0.0;
  std::size_t k_ = 0;
  std::shared_ptr<const OrliczFunction> psi_;
};

/// Dense numeric kernels shared by the index structures.
namespace kernels {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_l2(std::span<const double> a, std::span<const double> b) noexcept;
double l1(std::span<const double> a, std::span<const double> b) noexcept;
double linf(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;
std::size_t hamming(std::span<const std::uint64_t> a,
                    std::span<const std::uint64_t> b) noexcept;
}  // namespace kernels

/// Orlicz norm inf{lambda > 0 : sum psi(|x_i| / lambda) <= 1}.
double orlicz_norm(const OrliczFunction& psi, std::span<const double> x,
                   double tol = 1e-12);

/// Sum of the k largest absolute values.
double top_k_norm(std::span<const double> x, std::size_t k);

double distance(const Metric& metric, const Point& x, const Point& y);

/// A nonempty set of points with uniform dimension and representation.
class Dataset {
 public:
  Dataset(std::vector<Point> points, Metric metric);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return points_.front().dim(); }
  bool is_bits() const noexcept { return points_.front().is_bits(); }
  const Metric& metric() const noexcept { return metric_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const noexcept { return points_; }

  Dataset subset(std::span<const std::size_t> indices) const;
  /// Checks that q is compatible (dimension and representation).
  void check_query(const Point& q) const;

 private:
  std::vector<Point> points_;
  Metric metric_;
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

struct PointPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double distance = 0.0;
};

/// Exact nearest neighbor by exhaustive scan; ties go to the smallest index.
Neighbor brute_force_nn(const Dataset& data, const Point& q);

/// Exact closest pair over all i < j; ties broken lexicographically.
PointPair brute_force_cp(const Dataset& data);

}  // namespace annlab
