#include "annlab/ddpart.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "annlab/random.hpp"

namespace annlab {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

constexpr std::size_t kGramBlock = 256;
constexpr double kCertificateSlack = 1e-9;

void check_unit_rows(std::span<const double> rows, std::size_t d) {
  const std::size_t m = rows.size() / d;
  for (std::size_t i = 0; i < m; ++i) {
    const double norm = kernels::norm2(rows.subspan(i * d, d));
    if (std::abs(norm - 1.0) > kUnitTolerance) {
      throw InvalidArgument(fmt::format("point {} is not unit norm ({})", i, norm));
    }
  }
}

void normalize(std::span<double> v) {
  const double n = kernels::norm2(v);
  for (auto& x : v) x /= n;
}

}  // namespace

double cluster_cap_offset(double eps) {
  if (!(eps > 0.0 && eps < std::numbers::sqrt2)) {
    throw InvalidArgument(fmt::format("cluster eps must be in (0, sqrt 2), got {}", eps));
  }
  return std::numbers::sqrt2 * eps - 0.5 * eps * eps;
}

ClusterExtraction extract_clusters(std::span<const double> rows, std::size_t d, double eps,
                                   double tau) {
  if (d == 0 || rows.size() % d != 0) throw DimensionMismatch("cluster rows");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("cluster tau must be in (0, 1)");
  const double h = cluster_cap_offset(eps);
  check_unit_rows(rows, d);
  const std::size_t m = rows.size() / d;
  ConstRowMap x(rows.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));

  std::vector<char> alive(m, 1);
  std::vector<long> counts(m, 0);
  for (std::size_t b = 0; b < m; b += kGramBlock) {
    const auto len = static_cast<Eigen::Index>(std::min(kGramBlock, m - b));
    const RowMatrix g = x.middleRows(static_cast<Eigen::Index>(b), len) * x.transpose();
    for (Eigen::Index i = 0; i < len; ++i) {
      counts[b + static_cast<std::size_t>(i)] = (g.row(i).array() >= h).count();
    }
  }

  ClusterExtraction out;
  std::size_t remaining = m;
  while (remaining > 0) {
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (alive[i] && (best == m || counts[i] > counts[best])) best = i;
    }
    const double need = std::max(tau * static_cast<double>(remaining), 2.0);
    if (static_cast<double>(counts[best]) < need) break;

    const Eigen::VectorXd dots = x * x.row(static_cast<Eigen::Index>(best)).transpose();
    Cluster cl;
    cl.center = best;
    for (std::size_t i = 0; i < m; ++i) {
      if (alive[i] && dots[static_cast<Eigen::Index>(i)] >= h) cl.members.push_back(i);
    }
    for (auto i : cl.members) alive[i] = 0;
    remaining -= cl.members.size();

    RowMatrix removed(static_cast<Eigen::Index>(cl.members.size()), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < cl.members.size(); ++j) {
      removed.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(cl.members[j]));
    }
    for (std::size_t b = 0; b < m; b += kGramBlock) {
      const auto len = static_cast<Eigen::Index>(std::min(kGramBlock, m - b));
      const RowMatrix g = x.middleRows(static_cast<Eigen::Index>(b), len) * removed.transpose();
      for (Eigen::Index i = 0; i < len; ++i) {
        const std::size_t row = b + static_cast<std::size_t>(i);
        if (alive[row]) counts[row] -= (g.row(i).array() >= h).count();
      }
    }
    out.clusters.push_back(std::move(cl));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (alive[i]) out.remainder.push_back(i);
  }
  return out;
}

ClusterExtraction extract_clusters(const Dataset& data, double eps, double tau) {
  std::vector<double> rows;
  rows.reserve(data.size() * data.dim());
  for (const auto& p : data.points()) {
    const auto c = p.coords();
    rows.insert(rows.end(), c.begin(), c.end());
  }
  return extract_clusters(rows, data.dim(), eps, tau);
}

Recentered recenter_cluster(std::span<const double> u,
                            std::span<const std::vector<double>> members, double eps) {
  const double h = cluster_cap_offset(eps);
  Recentered out;
  out.center.assign(u.begin(), u.end());
  for (auto& v : out.center) v *= h;
  out.radius = std::sqrt(1.0 - h * h);
  for (const auto& x : members) {
    if (x.size() != u.size()) throw DimensionMismatch("cluster member dimension");
    if (kernels::dot(x, u) < h - 1e-12) {
      throw InvalidArgument("cluster member lies outside the cap");
    }
  }
  return out;
}

DdParams DdParams::defaults(std::size_t n) {
  DdParams p;
  const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
  p.tau = std::pow(nn, -0.2);
  const double lnln = std::log(std::log(nn));
  p.eps = lnln > 1.0 ? std::max(0.05, 1.0 / lnln) : 1.0;
  return p;
}

std::string DdBuildReport::summary() const {
  std::string s = fmt::format(
      "leaves={} forced_leaves={} stalled_leaves={} max_depth={} max_clusters_at_node={}\n",
      leaves, forced_leaves, stalled_leaves, max_depth, max_clusters_at_node);
  for (std::size_t l = 0; l < clusters_per_level.size(); ++l) {
    s += fmt::format("level {}: cluster_nodes={} clusters={} lsh_splits={}\n", l,
                     cluster_nodes_per_level[l], clusters_per_level[l], splits_per_level[l]);
  }
  return s;
}

// ------------------------------------------------------------------ DdTree

DdTree::DdTree(const Dataset& data, double c, double r, DdParams params, std::uint64_t seed)
    : data_(&data), dim_(data.dim()), c_(c), r_(r), params_(params) {
  std::vector<std::size_t> ids(data.size());
  std::vector<double> frame;
  frame.reserve(data.size() * data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ids[i] = i;
    const auto x = data[i].coords();
    frame.insert(frame.end(), x.begin(), x.end());
  }
  check_unit_rows(frame, dim_);
  for (std::size_t i = 0; i < ids.size(); ++i) normalize(std::span(frame).subspan(i * dim_, dim_));
  root_ = build(std::move(ids), std::move(frame), 0, derive_seed(seed, "dd/root"), true);
}

DdTree::DdTree(const Dataset& data, std::vector<std::size_t> ids, std::vector<double> frame,
               std::size_t frame_dim, double c, double r, DdParams params, std::uint64_t seed)
    : data_(&data), dim_(frame_dim), c_(c), r_(r), params_(params) {
  if (ids.empty() || frame.size() != ids.size() * frame_dim) {
    throw DimensionMismatch("dd tree frame does not match ids");
  }
  check_unit_rows(frame, dim_);
  for (std::size_t i = 0; i < ids.size(); ++i) normalize(std::span(frame).subspan(i * dim_, dim_));
  root_ = build(std::move(ids), std::move(frame), 0, derive_seed(seed, "dd/root"), true);
}

std::unique_ptr<DdNode> DdTree::build(std::vector<std::size_t> ids, std::vector<double> frame,
                                      std::size_t depth, std::uint64_t seed,
                                      bool allow_clusters) {
  auto node = std::make_unique<DdNode>();
  node->points = ids;
  const std::size_t m = ids.size();
  const std::size_t d = dim_;
  if (report_.clusters_per_level.size() <= depth) {
    report_.clusters_per_level.resize(depth + 1, 0);
    report_.cluster_nodes_per_level.resize(depth + 1, 0);
    report_.splits_per_level.resize(depth + 1, 0);
  }
  report_.max_depth = std::max(report_.max_depth, depth);
  auto make_leaf = [&](std::size_t* counter) {
    if (counter) ++*counter;
    ++report_.leaves;
    node->body = DdLeaf{std::move(ids)};
    return std::move(node);
  };
  if (m <= params_.n0) return make_leaf(nullptr);
  if (depth >= params_.depth_max) return make_leaf(&report_.forced_leaves);

  if (allow_clusters) {
    ClusterExtraction ext = extract_clusters(frame, d, params_.eps, params_.tau);
    if (!ext.clusters.empty()) {
      const double h = cluster_cap_offset(params_.eps);
      const double bound = std::sqrt(1.0 - h * h);
      struct Pending {
        std::vector<std::size_t> ids;
        std::vector<double> frame;
        bool allow;
      };
      DdClusterList list;
      std::vector<Pending> pending;
      for (const auto& cl : ext.clusters) {
        DdClusterChild child;
        child.h = h;
        const auto u = std::span<const double>(frame).subspan(cl.center * d, d);
        child.center.assign(u.begin(), u.end());
        Pending p;
        p.allow = cl.members.size() < m;
        for (auto local : cl.members) {
          p.ids.push_back(ids[local]);
          const auto x = std::span<const double>(frame).subspan(local * d, d);
          std::vector<double> shifted(d);
          for (std::size_t j = 0; j < d; ++j) shifted[j] = x[j] - h * u[j];
          const double len = kernels::norm2(shifted);
          if (len > bound + kCertificateSlack) {
            throw InvariantViolation(fmt::format(
                "cluster certificate violated: |x - hu| = {} > {}", len, bound));
          }
          for (auto& v : shifted) v /= len;
          p.frame.insert(p.frame.end(), shifted.begin(), shifted.end());
        }
        list.clusters.push_back(std::move(child));
        pending.push_back(std::move(p));
      }
      Pending rest;
      rest.allow = false;
      for (auto local : ext.remainder) {
        rest.ids.push_back(ids[local]);
        const auto x = std::span<const double>(frame).subspan(local * d, d);
        rest.frame.insert(rest.frame.end(), x.begin(), x.end());
      }
      report_.cluster_nodes_per_level[depth] += 1;
      report_.clusters_per_level[depth] += ext.clusters.size();
      report_.max_clusters_at_node = std::max(report_.max_clusters_at_node, ext.clusters.size());
      frame = {};
      ids = {};
      for (std::size_t j = 0; j < pending.size(); ++j) {
        list.clusters[j].child = build(std::move(pending[j].ids), std::move(pending[j].frame),
                                       depth + 1, derive_seed(seed, "dd/cluster", j),
                                       pending[j].allow);
      }
      if (!rest.ids.empty()) {
        list.remainder = build(std::move(rest.ids), std::move(rest.frame), depth + 1,
                               derive_seed(seed, "dd/remainder"), false);
      }
      node->body = std::move(list);
      return node;
    }
  }

  const std::size_t t_max = spherical_default_tmax(params_.eta);
  for (std::size_t attempt = 0; attempt < params_.split_retries; ++attempt) {
    auto fn = std::make_unique<SphericalFunction>(d, params_.eta, t_max,
                                                  derive_seed(seed, "dd/split", attempt));
    std::map<std::uint64_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < m; ++i) {
      groups[fn->hash(std::span<const double>(frame).subspan(i * d, d))].push_back(i);
    }
    if (groups.size() < 2) continue;
    std::vector<std::tuple<std::uint64_t, std::vector<std::size_t>, std::vector<double>>> parts;
    for (auto& [key, members] : groups) {
      std::vector<std::size_t> child_ids;
      std::vector<double> child_frame;
      child_frame.reserve(members.size() * d);
      for (auto local : members) {
        child_ids.push_back(ids[local]);
        const auto x = std::span<const double>(frame).subspan(local * d, d);
        child_frame.insert(child_frame.end(), x.begin(), x.end());
      }
      parts.emplace_back(key, std::move(child_ids), std::move(child_frame));
    }
    frame = {};
    ids = {};
    report_.splits_per_level[depth] += 1;
    DdLshSplit split;
    split.hash = std::move(fn);
    for (auto& [key, child_ids, child_frame] : parts) {
      split.buckets.emplace_back(key, build(std::move(child_ids), std::move(child_frame),
                                            depth + 1, derive_seed(seed, "dd/bucket", key), true));
    }
    node->body = std::move(split);
    return node;
  }
  return make_leaf(&report_.stalled_leaves);
}

bool DdTree::walk(const DdNode& node, std::span<const double> q_frame, const Point& q,
                  DdQueryResult& out) const {
  ++out.stats.nodes_visited;
  if (const auto* leaf = std::get_if<DdLeaf>(&node.body)) {
    const double limit = cr();
    for (auto idx : leaf->points) {
      ++out.stats.candidates;
      const double dist = distance(data_->metric(), (*data_)[idx], q);
      if (dist <= limit) {
        out.hit = Neighbor{idx, dist};
        return true;
      }
    }
    return false;
  }
  if (const auto* list = std::get_if<DdClusterList>(&node.body)) {
    std::vector<double> shifted(q_frame.size());
    for (const auto& cl : list->clusters) {
      ++out.stats.clusters_visited;
      for (std::size_t j = 0; j < shifted.size(); ++j) shifted[j] = q_frame[j] - cl.h * cl.center[j];
      normalize(shifted);
      if (walk(*cl.child, shifted, q, out)) return true;
    }
    return list->remainder && walk(*list->remainder, q_frame, q, out);
  }
  const auto& split = std::get<DdLshSplit>(node.body);
  const std::uint64_t key = split.hash->hash(q_frame);
  auto it = std::lower_bound(split.buckets.begin(), split.buckets.end(), key,
                             [](const auto& b, std::uint64_t k) { return b.first < k; });
  if (it == split.buckets.end() || it->first != key) return false;
  return walk(*it->second, q_frame, q, out);
}

void DdTree::query_frame(std::span<const double> q_frame, const Point& q,
                         DdQueryResult& out) const {
  if (q_frame.size() != dim_) throw DimensionMismatch("dd query frame dimension");
  std::vector<double> unit(q_frame.begin(), q_frame.end());
  const double n = kernels::norm2(unit);
  if (std::abs(n - 1.0) > kUnitTolerance) {
    throw InvalidArgument(fmt::format("dd query is not unit norm ({})", n));
  }
  normalize(unit);
  walk(*root_, unit, q, out);
}

DdQueryResult DdTree::query(const Point& q) const {
  data_->check_query(q);
  DdQueryResult out;
  query_frame(q.coords(), q, out);
  return out;
}

DdForest::DdForest(const Dataset& data, double c, double r, DdParams params, std::size_t trees,
                   std::uint64_t seed) {
  if (trees < 1) throw InvalidArgument("dd forest needs at least one tree");
  for (std::size_t i = 0; i < trees; ++i) {
    trees_.push_back(std::make_unique<DdTree>(data, c, r, params, derive_seed(seed, "dd/tree", i)));
  }
}

DdForest::DdForest(const Dataset& data, const std::vector<std::size_t>& ids,
                   const std::vector<double>& frame, std::size_t frame_dim, double c, double r,
                   DdParams params, std::size_t trees, std::uint64_t seed) {
  if (trees < 1) throw InvalidArgument("dd forest needs at least one tree");
  for (std::size_t i = 0; i < trees; ++i) {
    trees_.push_back(std::make_unique<DdTree>(data, ids, frame, frame_dim, c, r, params,
                                              derive_seed(seed, "dd/tree", i)));
  }
}

void DdForest::query_frame(std::span<const double> q_frame, const Point& q,
                           DdQueryResult& out) const {
  for (const auto& t : trees_) {
    t->query_frame(q_frame, q, out);
    if (out.hit) return;
  }
}

DdQueryResult DdForest::query(const Point& q) const {
  DdQueryResult out;
  for (const auto& t : trees_) {
    t->query_frame(q.coords(), q, out);
    if (out.hit) break;
  }
  return out;
}

// --------------------------------------------------------------- DdL2Index

DdL2Index::DdL2Index(const Dataset& data, double c, double r, DdParams params, Options options,
                     std::uint64_t seed)
    : data_(&data), c_(c), r_(r), options_(options) {
  if (data.metric().kind() != MetricKind::L2) throw InvalidArgument("DdL2Index needs l2 data");
  if (!(options.annulus_eps > 0.0)) throw InvalidArgument("annulus width must be > 0");
  if (options.jl_dim > 0) jl_.emplace(data.dim(), options.jl_dim, derive_seed(seed, "dd/jl"));
  const std::size_t d = options.jl_dim > 0 ? options.jl_dim : data.dim();

  std::vector<std::vector<double>> reduced(data.size());
  centroid_.assign(d, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    reduced[i] = jl_ ? jl_->apply(data[i].coords())
                     : std::vector<double>(data[i].coords().begin(), data[i].coords().end());
    for (std::size_t j = 0; j < d; ++j) centroid_[j] += reduced[i][j];
  }
  for (auto& v : centroid_) v /= static_cast<double>(data.size());

  std::vector<double> radius(data.size());
  double r_min = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) reduced[i][j] -= centroid_[j];
    radius[i] = kernels::norm2(reduced[i]);
    if (radius[i] > 0.0 && (r_min == 0.0 || radius[i] < r_min)) r_min = radius[i];
  }
  const double log_step = std::log1p(options.annulus_eps);
  std::map<long, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (radius[i] == 0.0) {
      core_.push_back(i);
      continue;
    }
    groups[static_cast<long>(std::floor(std::log(radius[i] / r_min) / log_step))].push_back(i);
  }
  for (auto& [j, ids] : groups) {
    Annulus a;
    a.inner = r_min * std::exp(static_cast<double>(j) * log_step);
    a.outer = a.inner * (1.0 + options.annulus_eps);
    std::vector<double> frame;
    frame.reserve(ids.size() * d);
    for (auto i : ids) {
      for (std::size_t k = 0; k < d; ++k) frame.push_back(reduced[i][k] / radius[i]);
    }
    a.forest = std::make_unique<DdForest>(data, ids, frame, d, c, r, params, options.trees,
                                          derive_seed(seed, "dd/annulus", static_cast<std::uint64_t>(j)));
    annuli_.push_back(std::move(a));
  }
}

std::vector<double> DdL2Index::reduce(const Point& x) const {
  std::vector<double> y = jl_ ? jl_->apply(x.coords())
                              : std::vector<double>(x.coords().begin(), x.coords().end());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] -= centroid_[j];
  return y;
}

DdQueryResult DdL2Index::query(const Point& q) const {
  data_->check_query(q);
  DdQueryResult out;
  const double limit = c_ * r_;
  for (auto i : core_) {
    ++out.stats.candidates;
    const double dist = distance(data_->metric(), (*data_)[i], q);
    if (dist <= limit) {
      out.hit = Neighbor{i, dist};
      return out;
    }
  }
  auto y = reduce(q);
  const double rq = kernels::norm2(y);
  if (rq == 0.0) return out;
  for (auto& v : y) v /= rq;
  // Annuli that can hold a point within cr of q, with slack for JL distortion.
  const double reach = jl_ ? 2.0 * limit : limit;
  for (const auto& a : annuli_) {
    if (a.outer < rq - reach || a.inner > rq + reach) continue;
    a.forest->query_frame(y, q, out);
    if (out.hit) return out;
  }
  return out;
}

// ---------------------------------------------------------------- tradeoff

double tradeoff_rho_q(double c, double rho_s) {
  if (!(c > 1.0)) throw InvalidArgument("trade-off needs c > 1");
  if (!(rho_s >= 0.0)) throw InvalidArgument("trade-off needs rho_s >= 0");
  const double c2 = c * c;
  const double bracket = (std::sqrt(2.0 * c2 - 1.0) - (c2 - 1.0) * std::sqrt(rho_s)) / c2;
  return bracket <= 0.0 ? 0.0 : bracket * bracket;
}

double tradeoff_rho_s(double c, double rho_q) {
  if (!(c > 1.0)) throw InvalidArgument("trade-off needs c > 1");
  if (!(rho_q >= 0.0)) throw InvalidArgument("trade-off needs rho_q >= 0");
  const double c2 = c * c;
  const double bracket = (std::sqrt(2.0 * c2 - 1.0) - c2 * std::sqrt(rho_q)) / (c2 - 1.0);
  return bracket <= 0.0 ? 0.0 : bracket * bracket;
}

std::vector<TradeoffPoint> tradeoff_frontier(double c, std::size_t samples) {
  if (samples < 2) throw InvalidArgument("trade-off frontier needs at least 2 samples");
  const double max_s = tradeoff_rho_s(c, 0.0);
  const double balanced = 1.0 / (2.0 * c * c - 1.0);
  std::vector<double> grid;
  for (std::size_t i = 0; i < samples; ++i) {
    grid.push_back(max_s * static_cast<double>(i) / static_cast<double>(samples - 1));
  }
  grid.back() = max_s;
  bool has_balanced = false;
  for (auto& s : grid) {
    if (std::abs(s - balanced) <= 1e-12) {
      s = balanced;
      has_balanced = true;
    }
  }
  if (!has_balanced) grid.push_back(balanced);
  std::sort(grid.begin(), grid.end());
  std::vector<TradeoffPoint> out;
  for (double s : grid) {
    out.push_back({c, s, tradeoff_rho_q(c, s)});
  }
  return out;
}

}  // namespace annlab
