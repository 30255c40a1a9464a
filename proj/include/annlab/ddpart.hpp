#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "annlab/core.hpp"
#include "annlab/dimred.hpp"
#include "annlab/families.hpp"

namespace annlab {

/// h = sqrt(2) eps - eps^2 / 2. For unit x, u: ||x - u|| <= sqrt(2) - eps
/// exactly when <x, u> >= h.
double cluster_cap_offset(double eps);

struct Cluster {
  /// Index of the data point used as the center.
  std::size_t center = 0;
  std::vector<std::size_t> members;
};

struct ClusterExtraction {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> remainder;
};

/// Repeatedly removes the densest data-point center while it has at least
/// max(tau * m, 2) of the m remaining points within sqrt(2) - eps. Ties go to
/// the smallest index. `rows` is a row-major m x d matrix of unit vectors and
/// the returned indices refer to its rows.
ClusterExtraction extract_clusters(std::span<const double> rows, std::size_t d,
                                   double eps, double tau);
ClusterExtraction extract_clusters(const Dataset& data, double eps, double tau);

struct Recentered {
  std::vector<double> center;  // h * u
  double radius = 0.0;         // sqrt(1 - h^2)
};

/// Throws InvalidArgument if a member lies outside the cap <x, u> >= h.
Recentered recenter_cluster(std::span<const double> u,
                            std::span<const std::vector<double>> members, double eps);

struct DdParams {
  double eps = 0.2;
  double tau = 0.1;
  double eta = 1.5;
  std::size_t n0 = 64;
  std::size_t depth_max = 40;
  std::size_t split_retries = 3;

  /// tau = n^-0.2, eps = max(0.05, 1 / ln ln n), n0 = 64, depth_max = 40.
  static DdParams defaults(std::size_t n);
};

struct DdBuildReport {
  std::vector<std::size_t> clusters_per_level;
  std::vector<std::size_t> cluster_nodes_per_level;
  std::vector<std::size_t> splits_per_level;
  std::size_t leaves = 0;
  std::size_t forced_leaves = 0;   // depth_max reached
  std::size_t stalled_leaves = 0;  // no sampled split separated the points
  std::size_t max_depth = 0;
  std::size_t max_clusters_at_node = 0;

  std::string summary() const;
};

struct DdNode;

struct DdClusterChild {
  std::vector<double> center;  // u in the parent's frame
  double h = 0.0;
  std::unique_ptr<DdNode> child;
};

struct DdClusterList {
  std::vector<DdClusterChild> clusters;
  std::unique_ptr<DdNode> remainder;  // may be null
};

struct DdLshSplit {
  std::unique_ptr<SphericalFunction> hash;
  std::vector<std::pair<std::uint64_t, std::unique_ptr<DdNode>>> buckets;  // sorted
};

struct DdLeaf {
  std::vector<std::size_t> points;
};

struct DdNode {
  std::variant<DdLeaf, DdClusterList, DdLshSplit> body;
  std::vector<std::size_t> points;  // dataset indices below this node
};

struct DdQueryStats {
  std::size_t candidates = 0;
  std::size_t nodes_visited = 0;
  std::size_t clusters_visited = 0;
};

struct DdQueryResult {
  std::optional<Neighbor> hit;
  DdQueryStats stats;
};

/// Data-dependent partition tree over a unit-sphere dataset. Routing works
/// in recentered frames; returned points are always checked against cr in
/// the original metric. `data` must outlive the tree.
class DdTree {
 public:
  /// Tree over a unit-sphere dataset, routing on the points themselves.
  DdTree(const Dataset& data, double c, double r, DdParams params, std::uint64_t seed);
  /// Tree over the subset `ids` of `data`, routing on `frame`, a row-major
  /// |ids| x frame_dim matrix of unit vectors (one per id).
  DdTree(const Dataset& data, std::vector<std::size_t> ids, std::vector<double> frame,
         std::size_t frame_dim, double c, double r, DdParams params, std::uint64_t seed);

  /// `q_frame` is the query's routing vector in the same frame as the build.
  void query_frame(std::span<const double> q_frame, const Point& q, DdQueryResult& out) const;

  DdQueryResult query(const Point& q) const;

  const DdNode& root() const noexcept { return *root_; }
  const DdBuildReport& report() const noexcept { return report_; }
  const DdParams& params() const noexcept { return params_; }
  double cr() const noexcept { return c_ * r_; }

 private:
  std::unique_ptr<DdNode> build(std::vector<std::size_t> ids, std::vector<double> frame,
                                std::size_t depth, std::uint64_t seed, bool allow_clusters);
  bool walk(const DdNode& node, std::span<const double> q_frame, const Point& q,
            DdQueryResult& out) const;

  const Dataset* data_;
  std::size_t dim_;
  double c_, r_;
  DdParams params_;
  std::unique_ptr<DdNode> root_;
  DdBuildReport report_;
};

/// Independent trees queried in order until one returns a point within cr.
class DdForest {
 public:
  DdForest(const Dataset& data, double c, double r, DdParams params, std::size_t trees,
           std::uint64_t seed);
  DdForest(const Dataset& data, const std::vector<std::size_t>& ids,
           const std::vector<double>& frame, std::size_t frame_dim, double c, double r,
           DdParams params, std::size_t trees, std::uint64_t seed);

  DdQueryResult query(const Point& q) const;
  void query_frame(std::span<const double> q_frame, const Point& q, DdQueryResult& out) const;
  std::size_t size() const noexcept { return trees_.size(); }
  const DdTree& tree(std::size_t i) const { return *trees_.at(i); }

 private:
  std::vector<std::unique_ptr<DdTree>> trees_;
};

/// General l2 data mapped onto spheres: optional JL reduction, shift to the
/// centroid, then thin annuli of multiplicative width (1 + annulus_eps) whose
/// directions are indexed by a DdForest each. Candidates are verified in the
/// original space.
class DdL2Index {
 public:
  struct Options {
    std::size_t jl_dim = 0;  // 0 keeps the original coordinates
    double annulus_eps = 0.25;
    std::size_t trees = 8;
  };

  DdL2Index(const Dataset& data, double c, double r, DdParams params, Options options,
            std::uint64_t seed);

  DdQueryResult query(const Point& q) const;
  std::size_t annulus_count() const noexcept { return annuli_.size(); }

 private:
  std::vector<double> reduce(const Point& x) const;

  struct Annulus {
    double inner = 0.0;
    double outer = 0.0;
    std::unique_ptr<DdForest> forest;
  };
  const Dataset* data_;
  double c_, r_;
  Options options_;
  std::optional<JlMap> jl_;
  std::vector<double> centroid_;
  std::vector<std::size_t> core_;  // points at the centroid itself
  std::vector<Annulus> annuli_;
};

struct TradeoffPoint {
  double c = 0.0;
  double rho_s = 0.0;
  double rho_q = 0.0;
};

/// Equality case of c^2 sqrt(rho_q) + (c^2 - 1) sqrt(rho_s) = sqrt(2c^2 - 1),
/// clamped at 0.
double tradeoff_rho_q(double c, double rho_s);
double tradeoff_rho_s(double c, double rho_q);

/// `samples` evenly spaced rho_s values on [0, tradeoff_rho_s(c, 0)], plus the
/// balanced point rho_s = rho_q = 1 / (2c^2 - 1) if not already present.
std::vector<TradeoffPoint> tradeoff_frontier(double c, std::size_t samples = 50);

}  // namespace annlab
