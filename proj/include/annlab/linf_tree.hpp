#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "annlab/core.hpp"

namespace annlab {

struct LinfParams {
  double eps = 0.5;
  double R = 0.0;  // 0 selects default_radius(d, eps)
  double alpha_dense = 0.25;
  double alpha_side = 0.25;
  std::size_t n0 = 32;

  /// 4 * max(1, ceil(log2 log2 d)) / eps.
  static double default_radius(std::size_t d, double eps);
};

struct CutCertificate {
  std::size_t a = 0, b = 0, c = 0;
  double eps = 0.0;
  /// ((a + b) / n)^(1 + eps) + ((b + c) / n)^(1 + eps)
  double value = 0.0;

  static CutCertificate evaluate(std::size_t a, std::size_t b, std::size_t c, double eps);
  bool valid(std::size_t d, double alpha_side) const;
};

struct CutChoice {
  std::size_t coord = 0;
  double threshold = 0.0;
  CutCertificate cert;
};

/// First data-point center (in `ids` order) with at least alpha_dense * |ids|
/// points within l-infinity distance R.
std::optional<std::size_t> find_dense_ball(const Dataset& data, std::span<const std::size_t> ids,
                                           double R, double alpha_dense);
std::optional<std::size_t> find_dense_ball(const Dataset& data, double R, double alpha_dense);

/// Scans coordinates in order and midpoints of consecutive distinct sorted
/// values in ascending order; returns the first cut with A = {p_i < u-1},
/// B = {u-1 <= p_i <= u+1}, C = {p_i > u+1} passing CutCertificate::valid.
std::optional<CutChoice> find_good_cut(const Dataset& data, std::span<const std::size_t> ids,
                                       double eps, double alpha_side);
std::optional<CutChoice> find_good_cut(const Dataset& data, double eps, double alpha_side = 0.25);

struct LinfNode;

struct LinfDenseBall {
  std::size_t center = 0;
  double R = 0.0;
  std::vector<std::size_t> members;
  std::unique_ptr<LinfNode> remainder;  // null when every point is a member
};

struct LinfCut {
  CutChoice cut;
  std::unique_ptr<LinfNode> left;   // A and B: p_i <= u + 1
  std::unique_ptr<LinfNode> right;  // B and C: p_i >= u - 1
};

struct LinfLeaf {
  std::vector<std::size_t> points;
  bool fallback = false;  // neither a dense ball nor a good cut was found
};

struct LinfNode {
  std::variant<LinfLeaf, LinfDenseBall, LinfCut> body;
  std::vector<std::size_t> points;
  std::size_t depth = 0;
};

struct LinfBuildReport {
  std::vector<std::size_t> dense_per_level, cut_per_level, fallback_per_level, leaf_per_level;
  std::size_t stored = 0;  // leaf sizes plus dense-ball member counts
  std::size_t max_depth = 0;
  std::size_t n = 0;

  double replication() const { return static_cast<double>(stored) / static_cast<double>(n); }
  std::string summary() const;
};

struct LinfQueryResult {
  Neighbor result;
  std::size_t path_length = 0;  // internal nodes visited
  std::size_t distance_evals = 0;
};

/// Deterministic l-infinity tree: dense balls and good coordinate cuts.
/// `data` must outlive the tree.
class LinfTree {
 public:
  LinfTree(const Dataset& data, LinfParams params);

  /// Always returns a point. If some point is within 1 of q, the result is
  /// within 2R + 1.
  LinfQueryResult query(const Point& q) const;

  /// Walks the query path and reports whether `target` stays inside every
  /// chosen subtree (or the walk ends at a dense ball that answers q).
  bool routes_to(const Point& q, std::size_t target) const;

  const LinfNode& root() const noexcept { return *root_; }
  const LinfBuildReport& report() const noexcept { return report_; }
  const LinfParams& params() const noexcept { return params_; }
  double radius() const noexcept { return params_.R; }

 private:
  std::unique_ptr<LinfNode> build(std::vector<std::size_t> ids, std::vector<std::size_t> bound,
                                  std::size_t depth);

  const Dataset* data_;
  LinfParams params_;
  std::unique_ptr<LinfNode> root_;
  LinfBuildReport report_;
};

}  // namespace annlab
