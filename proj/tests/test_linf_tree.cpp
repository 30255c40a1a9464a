#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "annlab/bench/generators.hpp"
#include "annlab/linf_tree.hpp"
#include "annlab/random.hpp"

using namespace annlab;

namespace {

Dataset linf_data(const std::vector<std::vector<double>>& rows) {
  std::vector<Point> pts;
  for (const auto& r : rows) pts.push_back(Point::dense(r));
  return Dataset(pts, Metric::linf());
}

Dataset uniform_cube(std::size_t n, std::size_t d, double side, std::uint64_t seed) {
  Rng rng = make_rng(seed, "test/linf");
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = u(rng);
    pts.push_back(Point::dense(std::move(x)));
  }
  return Dataset(pts, Metric::linf());
}

// Verifies set algebra at cut nodes, dense-ball membership and leaf sizes.
void audit(const Dataset& data, const LinfNode& node, const LinfParams& params,
           std::size_t& violations) {
  if (const auto* ball = std::get_if<LinfDenseBall>(&node.body)) {
    const auto x = data[ball->center].coords();
    for (auto j : ball->members) {
      if (kernels::linf(x, data[j].coords()) > ball->R) ++violations;
    }
    std::multiset<std::size_t> joined(ball->members.begin(), ball->members.end());
    if (ball->remainder) {
      joined.insert(ball->remainder->points.begin(), ball->remainder->points.end());
      audit(data, *ball->remainder, params, violations);
    }
    if (joined != std::multiset<std::size_t>(node.points.begin(), node.points.end())) ++violations;
  } else if (const auto* cut = std::get_if<LinfCut>(&node.body)) {
    const auto& c = cut->cut;
    std::vector<std::size_t> left, right;
    std::size_t a = 0, b = 0, cc = 0;
    for (auto j : node.points) {
      const double v = data[j].coords()[c.coord];
      if (v <= c.threshold + 1.0) left.push_back(j);
      if (v >= c.threshold - 1.0) right.push_back(j);
      if (v < c.threshold - 1.0) ++a;
      else if (v > c.threshold + 1.0) ++cc;
      else ++b;
    }
    if (left != cut->left->points || right != cut->right->points) ++violations;
    if (a != c.cert.a || b != c.cert.b || cc != c.cert.c) ++violations;
    auto recomputed = CutCertificate::evaluate(a, b, cc, params.eps);
    if (!recomputed.valid(data.dim(), params.alpha_side)) ++violations;
    audit(data, *cut->left, params, violations);
    audit(data, *cut->right, params, violations);
  } else {
    const auto& leaf = std::get<LinfLeaf>(node.body);
    if (!leaf.fallback && leaf.points.size() > params.n0) ++violations;
    if (leaf.points != node.points) ++violations;
  }
}

}  // namespace

TEST_CASE("default radius and certificate arithmetic") {
  CHECK(LinfParams::default_radius(16, 0.5) == doctest::Approx(16.0));
  CHECK(LinfParams::default_radius(2, 0.5) == doctest::Approx(8.0));
  CHECK(LinfParams::default_radius(256, 1.0 / 3.0) == doctest::Approx(36.0));
  auto cert = CutCertificate::evaluate(1, 0, 1, 0.5);
  CHECK(cert.value == doctest::Approx(2.0 * std::pow(0.5, 1.5)));
  CHECK(cert.value == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(cert.valid(1, 0.25));
  CHECK_FALSE(CutCertificate::evaluate(0, 0, 2, 0.5).valid(1, 0.25));
}

TEST_CASE("find_good_cut on small and degenerate sets") {
  auto two = linf_data({{0.0}, {10.0}});
  auto cut = find_good_cut(two, 0.5);
  REQUIRE(cut);
  CHECK(cut->coord == 0);
  CHECK(cut->threshold == 5.0);
  CHECK(cut->cert.a == 1);
  CHECK(cut->cert.b == 0);
  CHECK(cut->cert.c == 1);
  CHECK(cut->cert.value == doctest::Approx(0.7071).epsilon(1e-4));

  auto same = linf_data(std::vector<std::vector<double>>(50, {3.0, -1.0}));
  CHECK_FALSE(find_good_cut(same, 0.5));
  CHECK_THROWS_AS(find_good_cut(two, 1.0), InvalidArgument);

  auto cube = uniform_cube(1000, 8, 1000.0, 3);
  auto c = find_good_cut(cube, 0.5);
  REQUIRE(c);
  std::size_t a = 0, b = 0, cc = 0;
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const double v = cube[i].coords()[c->coord];
    if (v < c->threshold - 1.0) ++a;
    else if (v > c->threshold + 1.0) ++cc;
    else ++b;
  }
  auto re = CutCertificate::evaluate(a, b, cc, 0.5);
  CHECK(re.value == doctest::Approx(c->cert.value));
  CHECK(re.value <= 1.0);
  CHECK(re.valid(8, 0.25));
}

TEST_CASE("find_dense_ball") {
  auto same = linf_data(std::vector<std::vector<double>>(20, {1.0, 2.0}));
  auto hit = find_dense_ball(same, 0.5, 0.25);
  REQUIRE(hit);

  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) grid.push_back({100.0 * i, 100.0 * j});
  }
  CHECK_FALSE(find_dense_ball(linf_data(grid), 10.0, 0.25));

  Rng rng = make_rng(5, "test/dense");
  std::uniform_real_distribution<double> near(-2.0, 2.0), far(0.0, 10000.0);
  std::vector<Point> pts;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = i < 600 ? 50.0 + near(rng) : far(rng);
    pts.push_back(Point::dense(std::move(x)));
  }
  Rng shuffler = make_rng(6, "test/dense");
  std::shuffle(pts.begin(), pts.end(), shuffler);
  Dataset planted(pts, Metric::linf());
  auto center = find_dense_ball(planted, 4.0, 0.25);
  REQUIRE(center);
  std::size_t members = 0;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    if (kernels::linf(planted[*center].coords(), planted[i].coords()) <= 4.0) ++members;
  }
  CHECK(members >= 600);
  CHECK_THROWS_AS(find_dense_ball(planted, 0.0, 0.25), InvalidArgument);
}

TEST_CASE("linf tree on trivial inputs") {
  auto single = linf_data({{1.0, 2.0, 3.0}});
  LinfTree t(single, LinfParams{});
  CHECK(t.query(Point::dense({100.0, -5.0, 0.0})).result.index == 0);

  // One dense ball holding most points, queried inside its shell.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) rows.push_back({0.01 * i, 0.0});
  for (int i = 0; i < 40; ++i) rows.push_back({1000.0 + 50.0 * i, 500.0});
  auto data = linf_data(rows);
  LinfParams p;
  p.R = 3.0;
  p.n0 = 8;
  LinfTree tree(data, p);
  CHECK(std::holds_alternative<LinfDenseBall>(tree.root().body));
  CHECK(tree.report().dense_per_level.at(0) == 1);
  auto q = Point::dense({3.5, 0.5});
  auto res = tree.query(q);
  CHECK(res.result.distance <= 2.0 * p.R + 1.0);
  CHECK(res.path_length == 1);
}

TEST_CASE("linf tree structure and guarantee on uniform data") {
  const std::size_t n = 10000, d = 16;
  auto inst = bench::planted_linf(n, d, 100.0, 1.0, 100, 21);
  LinfParams p;
  p.eps = 0.5;
  LinfTree tree(inst.data, p);
  CHECK(tree.radius() == doctest::Approx(16.0));

  std::size_t violations = 0;
  audit(inst.data, tree.root(), tree.params(), violations);
  CHECK(violations == 0);

  const auto& rep = tree.report();
  std::size_t fallbacks = 0;
  for (auto f : rep.fallback_per_level) fallbacks += f;
  CHECK(fallbacks == 0);
  const double c_space = static_cast<double>(rep.stored) / std::pow(static_cast<double>(n), 1.0 + p.eps);
  CHECK(c_space <= 1.0);

  std::size_t within = 0, routed = 0, max_path = 0;
  for (std::size_t j = 0; j < inst.queries.size(); ++j) {
    auto res = tree.query(inst.queries[j]);
    const double truth = kernels::linf(inst.data[res.result.index].coords(), inst.queries[j].coords());
    CHECK(truth == doctest::Approx(res.result.distance));
    if (res.result.distance <= 2.0 * tree.radius() + 1.0) ++within;
    if (tree.routes_to(inst.queries[j], inst.truth[j].index)) ++routed;
    max_path = std::max(max_path, res.path_length);
  }
  CHECK(within == inst.queries.size());
  CHECK(routed == inst.queries.size());
  const double c_depth = static_cast<double>(max_path) / (static_cast<double>(d) * std::log(static_cast<double>(n)));
  MESSAGE("replication=", rep.replication(), " c_space=", c_space, " max_path=", max_path,
          " c_depth=", c_depth);
  CHECK(c_depth <= 8.0);
}

TEST_CASE("linf tree is deterministic") {
  auto inst = bench::planted_linf(800, 6, 50.0, 1.0, 20, 4);
  LinfTree a(inst.data, LinfParams{}), b(inst.data, LinfParams{});
  CHECK(a.report().stored == b.report().stored);
  CHECK(a.report().summary() == b.report().summary());
  for (const auto& q : inst.queries) CHECK(a.query(q).result.index == b.query(q).result.index);
}
