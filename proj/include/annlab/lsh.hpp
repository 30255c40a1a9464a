#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "annlab/core.hpp"

namespace annlab {

/// (r, cr, p1, p2): near points collide with probability >= p1, points at
/// distance >= cr with probability <= p2.
struct Sensitivity {
  double r = 0.0;
  double cr = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  double c() const noexcept { return cr / r; }
};

/// log(1/p1) / log(1/p2). Requires 0 < p2 < p1 <= 1.
double rho(double p1, double p2);

/// A single sampled hash function h: X -> bucket id.
class HashFunction {
 public:
  virtual ~HashFunction() = default;
  virtual std::uint64_t operator()(const Point& x) const = 0;
};

class LshFamily {
 public:
  virtual ~LshFamily() = default;

  virtual std::unique_ptr<HashFunction> sample(std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
  /// The metric whose datasets this family hashes.
  virtual Metric metric() const = 0;

  const Sensitivity& sensitivity() const noexcept { return sens_; }
  virtual double rho() const { return annlab::rho(sens_.p1, sens_.p2); }

 protected:
  /// Validates 0 < p2 < p1 <= 1, r > 0 and c > 1.
  explicit LshFamily(Sensitivity sens);

 private:
  Sensitivity sens_;
};

/// g(x) = (h_1(x), ..., h_k(x)) hashed to one 64-bit key. k = 0 maps every
/// point to the same bucket.
class TensoredFunction final : public HashFunction {
 public:
  explicit TensoredFunction(std::vector<std::unique_ptr<HashFunction>> parts);
  std::uint64_t operator()(const Point& x) const override;
  std::size_t k() const noexcept { return parts_.size(); }

 private:
  std::vector<std::unique_ptr<HashFunction>> parts_;
};

/// The k-fold tensor power of a family: sensitivity (r, cr, p1^k, p2^k).
class TensoredFamily final : public LshFamily {
 public:
  TensoredFamily(std::shared_ptr<const LshFamily> base, std::size_t k);

  std::unique_ptr<HashFunction> sample(std::uint64_t seed) const override;
  std::string name() const override;
  Metric metric() const override { return base_->metric(); }
  /// Identical to the base family's exponent.
  double rho() const override { return base_->rho(); }

  const LshFamily& base() const noexcept { return *base_; }
  std::size_t k() const noexcept { return k_; }

 private:
  std::shared_ptr<const LshFamily> base_;
  std::size_t k_;
};

/// Samples the tensored function used by one table. The j-th part is drawn
/// from derive_seed(seed, "lsh/part", j).
std::unique_ptr<TensoredFunction> sample_tensored(const LshFamily& family,
                                                  std::size_t k,
                                                  std::uint64_t seed);

struct LshParams {
  std::size_t k = 0;
  std::size_t L = 0;
};

inline constexpr double kDefaultRepetition = 2.0;

/// k = ceil(log_{1/p2} n), L = ceil(C_rep / p1^k).
LshParams choose_params(std::size_t n, double p1, double p2,
                        double c_rep = kDefaultRepetition);
inline LshParams choose_params(std::size_t n, const LshFamily& family,
                               double c_rep = kDefaultRepetition) {
  return choose_params(n, family.sensitivity().p1, family.sensitivity().p2, c_rep);
}

struct QueryStats {
  std::size_t candidates_examined = 0;
  std::size_t tables_probed = 0;
  std::size_t distance_evals = 0;
  std::size_t hash_evals = 0;
};

struct QueryResult {
  std::optional<Neighbor> hit;
  QueryStats stats;
};

class LshIndex {
 public:
  /// Table i uses the tensored function drawn from derive_seed(seed, "lsh/table", i).
  /// `data` must outlive the index.
  LshIndex(const Dataset& data, std::shared_ptr<const LshFamily> family,
           std::size_t k, std::size_t L, std::uint64_t seed);

  /// Probes tables in order and returns the first candidate within cr.
  /// With exhaustive = true every table is probed and every candidate is
  /// counted, which is what candidate-count scaling measurements need.
  QueryResult query(const Point& q, bool exhaustive = false) const;

  std::size_t k() const noexcept { return k_; }
  std::size_t L() const noexcept { return tables_.size(); }
  double r() const noexcept { return family_->sensitivity().r; }
  double cr() const noexcept { return family_->sensitivity().cr; }
  const Dataset& data() const noexcept { return *data_; }
  const LshFamily& family() const noexcept { return *family_; }

  /// Sorted (key, point index) entries of table i, stable in insertion order.
  std::span<const std::pair<std::uint64_t, std::uint32_t>> table(std::size_t i) const {
    return tables_.at(i).entries;
  }
  /// Bucket sizes of table i in key order.
  std::vector<std::size_t> bucket_sizes(std::size_t i) const;

 private:
  struct Table {
    std::unique_ptr<TensoredFunction> g;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
  };
  const Dataset* data_;
  std::shared_ptr<const LshFamily> family_;
  std::size_t k_;
  std::vector<Table> tables_;
};

/// Fraction of `trials` sampled functions with h(x) == h(y).
double estimate_collision(const LshFamily& family, const Point& x, const Point& y,
                          std::size_t trials, std::uint64_t seed);

}  // namespace annlab
