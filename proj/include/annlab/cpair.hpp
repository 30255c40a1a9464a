#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annlab/core.hpp"
#include "annlab/lsh.hpp"

namespace annlab {

// ------------------------------------------------------------ CP via ANN

/// An ANN structure over a subset; returned indices refer to that subset.
class AnnOracle {
 public:
  virtual ~AnnOracle() = default;
  virtual std::optional<Neighbor> query(const Point& q) const = 0;
};

using AnnBuilder = std::function<std::unique_ptr<AnnOracle>(const Dataset&, std::uint64_t)>;

/// LshIndex with choose_params(|subset|, family, c_rep).
AnnBuilder lsh_ann_builder(std::shared_ptr<const LshFamily> family,
                           double c_rep = kDefaultRepetition);
/// Exhaustive scan returning the nearest point if it lies within `limit`.
AnnBuilder brute_ann_builder(double limit);

struct CpViaAnnResult {
  std::optional<PointPair> pair;
  std::size_t repetitions = 0;
  std::size_t queries = 0;
  bool duplicate_shortcut = false;
};

/// Exact duplicates are reported directly. Otherwise each repetition splits
/// P at random into A and B, builds the ANN structure on A and queries every
/// point of B. A returned pair is always within c * r.
CpViaAnnResult cp_via_ann(const Dataset& data, double c, double r, const AnnBuilder& builder,
                          std::uint64_t seed, std::size_t repeats = 3);

// ---------------------------------------------------- grouped inner products

/// Rows whose inner products the grouped method works with.
class VectorSet {
 public:
  virtual ~VectorSet() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;
  /// out += coef * row(i)
  virtual void accumulate(std::size_t i, double coef, std::span<double> out) const = 0;
  /// <row(i), other.row(j)>
  virtual double dot(std::size_t i, const VectorSet& other, std::size_t j) const;
  std::vector<double> row(std::size_t i) const;
};

class DenseRows final : public VectorSet {
 public:
  DenseRows(std::vector<double> values, std::size_t rows, std::size_t dim);
  static DenseRows from_dataset(const Dataset& data);

  std::size_t size() const override { return rows_; }
  std::size_t dim() const override { return dim_; }
  void accumulate(std::size_t i, double coef, std::span<double> out) const override;
  double dot(std::size_t i, const VectorSet& other, std::size_t j) const override;
  std::span<const double> row_span(std::size_t i) const {
    return std::span<const double>(v_).subspan(i * dim_, dim_);
  }

 private:
  std::vector<double> v_;
  std::size_t rows_, dim_;
};

/// Sign vectors in {+1, -1}^d / sqrt(d) stored as bits (1 = +1).
class SignRows final : public VectorSet {
 public:
  explicit SignRows(std::vector<BitVector> signs);

  std::size_t size() const override { return s_.size(); }
  std::size_t dim() const override { return d_; }
  void accumulate(std::size_t i, double coef, std::span<double> out) const override;
  double dot(std::size_t i, const VectorSet& other, std::size_t j) const override;

 private:
  std::vector<BitVector> s_;
  std::size_t d_;
};

/// Both backends compute exact products; faster rectangular multiplication
/// would plug in here.
enum class MatmulBackend { Naive, Blocked };
MatmulBackend parse_backend(std::string_view name);
std::string backend_name(MatmulBackend b);

/// Row-major (a_rows x b_rows) product A B^T of row-major A and B.
std::vector<double> multiply_abt(std::span<const double> a, std::size_t a_rows,
                                 std::span<const double> b, std::size_t b_rows, std::size_t dim,
                                 MatmulBackend backend);

struct IpGroupedResult {
  std::size_t first = 0, second = 0;
  double ip = 0.0;  // <left(first), right(second)>
  std::size_t groups = 0;
  std::size_t group_a = 0, group_b = 0;
  double max_entry = 0.0;   // |C_ab| of the selected group pair
  double noise_rms = 0.0;   // RMS of the other off-diagonal entries
  std::vector<std::uint32_t> group_of;
  std::vector<std::int8_t> sign;
};

/// Randomly partitions indices into ceil(n / g) groups, sums each group with
/// random signs on both sides, forms C = M_left M_right^T, takes the
/// off-diagonal entry of largest magnitude and scans the cross pairs of the
/// two groups for the largest <left(i), right(j)>. One group means a full
/// scan. `right` defaults to `left`.
IpGroupedResult ip_grouped(const VectorSet& left, const VectorSet* right, std::size_t g,
                           MatmulBackend backend, std::uint64_t seed);

// ----------------------------------------------------- polynomial embeddings

inline constexpr std::size_t kDefaultMaxEmbedDim = std::size_t{1} << 22;

/// x^{(x)k}, index (i_1, ..., i_k) at sum i_j d^{k-j}.
std::vector<double> tensor_embed(std::span<const double> x, std::size_t k,
                                 std::size_t max_dim = kDefaultMaxEmbedDim);

/// Integer coefficients c_0..c_k of T_k, exact for k <= 20.
std::vector<std::int64_t> chebyshev_coefficients(std::size_t k);
/// T_k(x) by the three-term recurrence.
double chebyshev_value(std::size_t k, double x);

enum class EmbedSide { Left, Right };

/// Block j carries sign(c_j) sqrt|c_j| x^{(x)j} on the left and sqrt|c_j|
/// y^{(x)j} on the right, so <f(x), g(y)> = T_k(<x, y>).
std::vector<double> chebyshev_embed(std::span<const double> x, std::size_t k, EmbedSide side,
                                    std::size_t max_dim = kDefaultMaxEmbedDim);
std::size_t chebyshev_embed_dim(std::size_t d, std::size_t k);

// --------------------------------------------------------- CP pipeline

enum class CpMode { Tensor, Chebyshev };
CpMode parse_cp_mode(std::string_view name);
std::string cp_mode_name(CpMode m);

struct CpPipelineParams {
  std::size_t k = 3;
  std::size_t g = 8;
  std::size_t jl_dim = 0;  // 0 keeps the embedded dimension
  MatmulBackend backend = MatmulBackend::Blocked;
  std::size_t max_dim = kDefaultMaxEmbedDim;
};

struct CpPipelineResult {
  std::optional<PointPair> pair;
  IpGroupedResult grouped;
  std::size_t embed_dim = 0;
};

/// (1 + eps, r) closest pair for unit vectors via <x, y> = 1 - |x - y|^2 / 2.
/// Tensor mode embeds x^{(x)k} on both sides; Chebyshev mode uses
/// p(a) = T_k(a / a_far) with a_far = 1 - (1 + eps)^2 r^2 / 2. The selected
/// groups are rescanned in the original space; a returned pair is always
/// within (1 + eps) r.
CpPipelineResult cp_pipeline(const Dataset& data, double eps, double r, CpMode mode,
                             const CpPipelineParams& params, std::uint64_t seed);

}  // namespace annlab
