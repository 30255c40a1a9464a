#include "annlab/linf_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace annlab {

namespace {

bool within_linf(const double* x, const double* y, std::size_t d, double R) {
  for (std::size_t i = 0; i < d; ++i) {
    if (std::abs(x[i] - y[i]) > R) return false;
  }
  return true;
}

}  // namespace

double LinfParams::default_radius(std::size_t d, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("linf eps must be > 0");
  const double dd = static_cast<double>(std::max<std::size_t>(d, 2));
  const double loglog = std::log2(std::max(std::log2(dd), 1.0));
  return 4.0 * std::max(1.0, std::ceil(loglog)) / eps;
}

CutCertificate CutCertificate::evaluate(std::size_t a, std::size_t b, std::size_t c, double eps) {
  const double n = static_cast<double>(a + b + c);
  CutCertificate cert{a, b, c, eps, 0.0};
  cert.value = std::pow(static_cast<double>(a + b) / n, 1.0 + eps) +
               std::pow(static_cast<double>(b + c) / n, 1.0 + eps);
  return cert;
}

bool CutCertificate::valid(std::size_t d, double alpha_side) const {
  const double n = static_cast<double>(a + b + c);
  const double side = alpha_side / static_cast<double>(d);
  return value <= 1.0 && static_cast<double>(a) / n >= side &&
         static_cast<double>(c) / n >= side;
}

namespace {

// bound[j] is an upper bound on the ball count of ids[j]; counts of examined
// candidates replace it. Ball counts only shrink on subsets, so the bounds
// stay valid for every subset handed down the tree.
std::optional<std::size_t> dense_ball_search(const Dataset& data, std::span<const std::size_t> ids,
                                             double R, double alpha_dense,
                                             std::vector<std::size_t>& bound) {
  if (!(R > 0.0)) throw InvalidArgument("dense ball radius must be > 0");
  if (!(alpha_dense > 0.0 && alpha_dense < 1.0)) throw InvalidArgument("alpha_dense in (0, 1)");
  const std::size_t m = ids.size();
  const double need = alpha_dense * static_cast<double>(m);
  const std::size_t d = data.dim();
  std::vector<const double*> rows(m);
  for (std::size_t j = 0; j < m; ++j) rows[j] = data[ids[j]].coords().data();
  for (std::size_t ci = 0; ci < m; ++ci) {
    if (static_cast<double>(bound[ci]) < need) continue;
    const double* x = rows[ci];
    std::size_t inside = 0;
    for (const double* y : rows) inside += within_linf(x, y, d, R) ? 1 : 0;
    bound[ci] = inside;
    if (static_cast<double>(inside) >= need) return ids[ci];
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> find_dense_ball(const Dataset& data, std::span<const std::size_t> ids,
                                           double R, double alpha_dense) {
  std::vector<std::size_t> bound(ids.size(), ids.size());
  return dense_ball_search(data, ids, R, alpha_dense, bound);
}

std::optional<std::size_t> find_dense_ball(const Dataset& data, double R, double alpha_dense) {
  std::vector<std::size_t> ids(data.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return find_dense_ball(data, ids, R, alpha_dense);
}

std::optional<CutChoice> find_good_cut(const Dataset& data, std::span<const std::size_t> ids,
                                       double eps, double alpha_side) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("cut eps must be in (0, 1)");
  const std::size_t d = data.dim();
  std::vector<double> vals(ids.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) vals[j] = data[ids[j]].coords()[i];
    std::sort(vals.begin(), vals.end());
    for (std::size_t j = 0; j + 1 < vals.size(); ++j) {
      if (vals[j] == vals[j + 1]) continue;
      const double u = 0.5 * (vals[j] + vals[j + 1]);
      const auto a = static_cast<std::size_t>(std::lower_bound(vals.begin(), vals.end(), u - 1.0) - vals.begin());
      const auto ab = static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), u + 1.0) - vals.begin());
      auto cert = CutCertificate::evaluate(a, ab - a, vals.size() - ab, eps);
      if (cert.valid(d, alpha_side)) return CutChoice{i, u, cert};
    }
  }
  return std::nullopt;
}

std::optional<CutChoice> find_good_cut(const Dataset& data, double eps, double alpha_side) {
  std::vector<std::size_t> ids(data.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return find_good_cut(data, ids, eps, alpha_side);
}

std::string LinfBuildReport::summary() const {
  std::string s = fmt::format("n={} stored={} replication={:.4f} max_depth={}\n", n, stored,
                              replication(), max_depth);
  for (std::size_t l = 0; l < dense_per_level.size(); ++l) {
    s += fmt::format("level {}: dense={} cut={} fallback={} leaf={}\n", l, dense_per_level[l],
                     cut_per_level[l], fallback_per_level[l], leaf_per_level[l]);
  }
  return s;
}

LinfTree::LinfTree(const Dataset& data, LinfParams params) : data_(&data), params_(params) {
  if (data.is_bits()) throw RepresentationMismatch("linf tree needs dense data");
  if (!(params_.eps > 0.0 && params_.eps < 1.0)) throw InvalidArgument("linf eps must be in (0, 1)");
  if (params_.R == 0.0) params_.R = LinfParams::default_radius(data.dim(), params_.eps);
  if (!(params_.R > 0.0)) throw InvalidArgument("linf radius must be > 0");
  if (params_.n0 < 1) throw InvalidArgument("linf n0 must be >= 1");
  report_.n = data.size();
  std::vector<std::size_t> ids(data.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<std::size_t> bound(ids.size(), ids.size());
  root_ = build(std::move(ids), std::move(bound), 0);
}

std::unique_ptr<LinfNode> LinfTree::build(std::vector<std::size_t> ids,
                                          std::vector<std::size_t> bound, std::size_t depth) {
  auto node = std::make_unique<LinfNode>();
  node->depth = depth;
  node->points = ids;
  if (report_.dense_per_level.size() <= depth) {
    for (auto* v : {&report_.dense_per_level, &report_.cut_per_level, &report_.fallback_per_level,
                    &report_.leaf_per_level}) {
      v->resize(depth + 1, 0);
    }
  }
  report_.max_depth = std::max(report_.max_depth, depth);
  auto leaf = [&](bool fallback) {
    report_.stored += ids.size();
    (fallback ? report_.fallback_per_level : report_.leaf_per_level)[depth] += 1;
    node->body = LinfLeaf{std::move(ids), fallback};
    return std::move(node);
  };
  if (ids.size() <= params_.n0) return leaf(false);

  if (auto center = dense_ball_search(*data_, ids, params_.R, params_.alpha_dense, bound)) {
    LinfDenseBall ball;
    ball.center = *center;
    ball.R = params_.R;
    std::vector<std::size_t> rest, rest_bound;
    const auto x = (*data_)[*center].coords();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (kernels::linf(x, (*data_)[ids[k]].coords()) <= params_.R) {
        ball.members.push_back(ids[k]);
      } else {
        rest.push_back(ids[k]);
        rest_bound.push_back(bound[k]);
      }
    }
    report_.stored += ball.members.size();
    report_.dense_per_level[depth] += 1;
    if (!rest.empty()) ball.remainder = build(std::move(rest), std::move(rest_bound), depth + 1);
    node->body = std::move(ball);
    return node;
  }

  if (auto cut = find_good_cut(*data_, ids, params_.eps, params_.alpha_side)) {
    LinfCut c;
    c.cut = *cut;
    std::vector<std::size_t> left, right, left_bound, right_bound;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const double v = (*data_)[ids[k]].coords()[cut->coord];
      if (v <= cut->threshold + 1.0) {
        left.push_back(ids[k]);
        left_bound.push_back(bound[k]);
      }
      if (v >= cut->threshold - 1.0) {
        right.push_back(ids[k]);
        right_bound.push_back(bound[k]);
      }
    }
    report_.cut_per_level[depth] += 1;
    c.left = build(std::move(left), std::move(left_bound), depth + 1);
    c.right = build(std::move(right), std::move(right_bound), depth + 1);
    node->body = std::move(c);
    return node;
  }
  return leaf(true);
}

LinfQueryResult LinfTree::query(const Point& q) const {
  data_->check_query(q);
  const auto qc = q.coords();
  LinfQueryResult out;
  const LinfNode* node = root_.get();
  while (true) {
    if (const auto* ball = std::get_if<LinfDenseBall>(&node->body)) {
      ++out.path_length;
      ++out.distance_evals;
      const double dc = kernels::linf((*data_)[ball->center].coords(), qc);
      if (dc <= ball->R + 1.0 || !ball->remainder) {
        out.result = {ball->center, dc};
        return out;
      }
      node = ball->remainder.get();
    } else if (const auto* cut = std::get_if<LinfCut>(&node->body)) {
      ++out.path_length;
      node = qc[cut->cut.coord] <= cut->cut.threshold ? cut->left.get() : cut->right.get();
    } else {
      const auto& leaf = std::get<LinfLeaf>(node->body);
      out.result = {leaf.points.front(), std::numeric_limits<double>::infinity()};
      for (auto j : leaf.points) {
        ++out.distance_evals;
        const double dj = kernels::linf((*data_)[j].coords(), qc);
        if (dj < out.result.distance) out.result = {j, dj};
      }
      return out;
    }
  }
}

bool LinfTree::routes_to(const Point& q, std::size_t target) const {
  const auto qc = q.coords();
  const auto tc = (*data_)[target].coords();
  const LinfNode* node = root_.get();
  while (true) {
    if (const auto* ball = std::get_if<LinfDenseBall>(&node->body)) {
      if (kernels::linf((*data_)[ball->center].coords(), qc) <= ball->R + 1.0) return true;
      if (!ball->remainder) return true;
      if (std::find(ball->members.begin(), ball->members.end(), target) != ball->members.end()) {
        return false;
      }
      node = ball->remainder.get();
    } else if (const auto* cut = std::get_if<LinfCut>(&node->body)) {
      const bool go_left = qc[cut->cut.coord] <= cut->cut.threshold;
      const double v = tc[cut->cut.coord];
      if (go_left ? v > cut->cut.threshold + 1.0 : v < cut->cut.threshold - 1.0) return false;
      node = go_left ? cut->left.get() : cut->right.get();
    } else {
      const auto& pts = std::get<LinfLeaf>(node->body).points;
      return std::find(pts.begin(), pts.end(), target) != pts.end();
    }
  }
}

}  // namespace annlab
