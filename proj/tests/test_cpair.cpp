#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "annlab/bench/generators.hpp"
#include "annlab/cpair.hpp"
#include "annlab/dimred.hpp"
#include "annlab/families.hpp"
#include "annlab/random.hpp"

using namespace annlab;

namespace {

std::vector<double> gauss(std::uint64_t seed, std::size_t d) {
  Rng rng = make_rng(seed, "test/cp");
  return gaussian_vector(rng, d);
}

std::vector<double> unit(std::uint64_t seed, std::size_t d) {
  Rng rng = make_rng(seed, "test/cp-unit");
  return random_unit_vector(rng, d);
}

}  // namespace

TEST_CASE("cp_via_ann hard guarantees") {
  std::vector<Point> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(Point::dense({1.0 * i, 0.0}));
  pts.push_back(Point::dense({7.0, 0.0}));
  Dataset dup(pts, Metric::l2());
  auto res = cp_via_ann(dup, 2.0, 0.0, brute_ann_builder(0.0), 1);
  REQUIRE(res.pair);
  CHECK(res.pair->distance == 0.0);
  CHECK(res.pair->first == 7);
  CHECK(res.pair->second == 30);

  std::vector<Point> spread;
  for (int i = 0; i < 40; ++i) spread.push_back(Point::dense({10.0 * i, 1.0}));
  Dataset far(spread, Metric::l2());
  auto none = cp_via_ann(far, 2.0, 4.0, brute_ann_builder(1e9), 2);
  CHECK_FALSE(none.pair);
  CHECK(none.repetitions == 3);
  CHECK_THROWS_AS(cp_via_ann(Dataset({Point::dense({1.0})}, Metric::l2()), 2.0, 1.0,
                             brute_ann_builder(1.0), 1),
                  InvalidArgument);
}

TEST_CASE("cp_via_ann on planted Hamming pairs") {
  std::size_t ok = 0;
  const std::size_t trials = 8;
  for (std::uint64_t s = 0; s < trials; ++s) {
    auto inst = bench::planted_pair_hamming(4000, 128, 8, 2.0, 100 + s);
    auto fam = std::make_shared<BitSamplingFamily>(128, 8.0, 2.0);
    auto res = cp_via_ann(inst.data, 2.0, 8.0, lsh_ann_builder(fam), 200 + s);
    if (res.pair) {
      CHECK(res.pair->distance <= 16.0);
      CHECK(res.pair->distance == distance(Metric::hamming(), inst.data[res.pair->first],
                                           inst.data[res.pair->second]));
      ++ok;
    }
  }
  MESSAGE("cp_via_ann planted successes ", ok, "/", trials);
  CHECK(ok >= 5);
}

TEST_CASE("matmul backends agree") {
  const std::size_t a = 17, b = 9, d = 40;
  auto x = gauss(1, a * d), y = gauss(2, b * d);
  auto naive = multiply_abt(x, a, y, b, d, MatmulBackend::Naive);
  auto blocked = multiply_abt(x, a, y, b, d, MatmulBackend::Blocked);
  for (std::size_t i = 0; i < naive.size(); ++i) CHECK(std::abs(naive[i] - blocked[i]) <= 1e-9);
  auto sym = multiply_abt(x, a, x, a, d, MatmulBackend::Blocked);
  for (std::size_t i = 0; i < a; ++i) {
    double sq = 0.0;
    for (std::size_t t = 0; t < d; ++t) sq += x[i * d + t] * x[i * d + t];
    CHECK(sym[i * a + i] == doctest::Approx(sq).epsilon(1e-12));
    for (std::size_t j = 0; j < a; ++j) CHECK(std::abs(sym[i * a + j] - sym[j * a + i]) <= 1e-9);
  }
  CHECK(parse_backend("naive") == MatmulBackend::Naive);
  CHECK_THROWS_AS(parse_backend("strassen"), InvalidArgument);
}

TEST_CASE("ip_grouped degenerate group sizes") {
  const std::size_t n = 40, d = 24;
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    auto u = unit(i, d);
    v.insert(v.end(), u.begin(), u.end());
  }
  // Plant a close pair (3, 27).
  auto u3 = std::vector<double>(v.begin() + 3 * d, v.begin() + 4 * d);
  auto z = unit(999, d);
  double nn = 0.0;
  for (std::size_t t = 0; t < d; ++t) nn += std::pow(u3[t] + 0.2 * z[t], 2);
  for (std::size_t t = 0; t < d; ++t) v[27 * d + t] = (u3[t] + 0.2 * z[t]) / std::sqrt(nn);
  DenseRows rows(v, n, d);

  auto all = ip_grouped(rows, nullptr, n, MatmulBackend::Naive, 1);
  CHECK(all.groups == 1);
  double best = -2.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ip = rows.dot(i, rows, j);
      if (ip > best) best = ip, bi = i, bj = j;
    }
  }
  CHECK(all.ip == doctest::Approx(best));
  CHECK(std::min(all.first, all.second) == bi);
  CHECK(std::max(all.first, all.second) == bj);
  CHECK(bi == 3);
  CHECK(bj == 27);

  // Groups of one: the entry of largest magnitude names the pair directly.
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto one = ip_grouped(rows, nullptr, 1, MatmulBackend::Blocked, s);
    CHECK(one.groups == n);
    CHECK(std::min(one.first, one.second) == 3);
    CHECK(std::max(one.first, one.second) == 27);
  }
}

TEST_CASE("ip_grouped on a planted sign instance") {
  std::size_t ok = 0;
  const auto inst = bench::planted_sign_ip(2048, 32768, 8192, 0.05, 5);
  CHECK(inst.planted_ip == doctest::Approx(0.5));
  CHECK(inst.max_background_ip <= 0.05);
  SignRows rows(inst.signs);
  CHECK(rows.dot(inst.first, rows, inst.second) == doctest::Approx(0.5));
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto res = ip_grouped(rows, nullptr, 16, MatmulBackend::Blocked, s);
    const bool hit = std::min(res.first, res.second) == std::min(inst.first, inst.second) &&
                     std::max(res.first, res.second) == std::max(inst.first, inst.second);
    ok += hit ? 1 : 0;
    MESSAGE("max entry ", res.max_entry, " noise rms ", res.noise_rms);
  }
  CHECK(ok >= 2);
}

TEST_CASE("sign aggregation is unbiased for the planted contribution") {
  const std::size_t n = 64, d = 32;
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    auto u = unit(500 + i, d);
    v.insert(v.end(), u.begin(), u.end());
  }
  DenseRows rows(v, n, d);
  const double planted = rows.dot(0, rows, 1);
  // chi_0 chi_1 C_ab has mean <p_0, p_1>; the remaining cross terms average out.
  std::vector<double> samples;
  for (std::uint64_t s = 0; s < 400; ++s) {
    auto res = ip_grouped(rows, nullptr, 8, MatmulBackend::Blocked, s);
    const auto ga = res.group_of[0], gb = res.group_of[1];
    if (ga == gb) continue;
    std::vector<double> ma(d, 0.0), mb(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (res.group_of[i] == ga) rows.accumulate(i, res.sign[i], ma);
      if (res.group_of[i] == gb) rows.accumulate(i, res.sign[i], mb);
    }
    samples.push_back(res.sign[0] * res.sign[1] * kernels::dot(ma, mb));
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  const double se = std::sqrt(var / (samples.size() - 1) / samples.size());
  CHECK(std::abs(mean - planted) <= 3.0 * se + 1e-12);
}

TEST_CASE("tensor and Chebyshev identities") {
  auto x = gauss(10, 4), y = gauss(11, 4);
  CHECK(tensor_embed(x, 1) == x);
  auto x3 = tensor_embed(x, 3), y3 = tensor_embed(y, 3);
  CHECK(x3.size() == 64);
  const double ip = kernels::dot(x, y);
  CHECK(kernels::dot(x3, y3) == doctest::Approx(ip * ip * ip).epsilon(1e-9));
  CHECK_THROWS_AS(tensor_embed(std::vector<double>(100, 1.0), 5, 1000000), ResourceLimit);

  CHECK(chebyshev_value(3, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(chebyshev_coefficients(3) == std::vector<std::int64_t>{0, -3, 0, 4});
  CHECK(chebyshev_coefficients(4) == std::vector<std::int64_t>{1, 0, -8, 0, 8});
  const auto c20 = chebyshev_coefficients(20);
  CHECK(c20[20] == (std::int64_t{1} << 19));
  CHECK(c20[0] == 1);
  CHECK_THROWS_AS(chebyshev_coefficients(21), InvalidArgument);

  for (std::size_t k = 0; k <= 5; ++k) {
    for (std::size_t d = 1; d <= 4; ++d) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        auto a = unit(100 * k + 10 * d + s, d), b = unit(7000 + 100 * k + 10 * d + s, d);
        auto fa = chebyshev_embed(a, k, EmbedSide::Left);
        auto gb = chebyshev_embed(b, k, EmbedSide::Right);
        CHECK(fa.size() == chebyshev_embed_dim(d, k));
        const double want = chebyshev_value(k, kernels::dot(a, b));
        CHECK(std::abs(kernels::dot(fa, gb) - want) <= 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
  }
  const double ratio = chebyshev_value(10, 1.04) / chebyshev_value(10, 1.0);
  CHECK(ratio == doctest::Approx(std::cosh(10.0 * std::acosh(1.04))).epsilon(1e-9));
  CHECK(ratio > std::pow(1.04, 10));
  MESSAGE("T_10(1.04) = ", ratio, " e^2 = ", std::exp(2.0));
}

TEST_CASE("JL after tensoring: inner-product error variance") {
  // Var(<Jx, Jy>) = (|x|^2 |y|^2 + <x,y>^2) / m for Gaussian J.
  const std::size_t d = 16, m = 64;
  auto x = unit(1, d), y = unit(2, d);
  auto x2 = tensor_embed(x, 2), y2 = tensor_embed(y, 2);
  const double ip2 = kernels::dot(x2, y2);
  std::vector<double> err;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    JlMap j(d * d, m, s);
    err.push_back(kernels::dot(j.apply(x2), j.apply(y2)) - ip2);
  }
  const double mean = std::accumulate(err.begin(), err.end(), 0.0) / err.size();
  double var = 0.0;
  for (double e : err) var += (e - mean) * (e - mean);
  var /= err.size() - 1;
  const double want = (1.0 + ip2 * ip2) / m;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(want / err.size()));
  CHECK(var == doctest::Approx(want).epsilon(0.1));
}

TEST_CASE("cp pipeline on planted sphere pairs") {
  const double eps = 1.0, r = 0.25;
  std::size_t tensor_ok = 0, cheb_ok = 0;
  const std::size_t trials = 8;
  for (std::uint64_t s = 0; s < trials; ++s) {
    auto inst = bench::planted_pair_sphere(256, 32, r, 1.0 + eps, 300 + s);
    CpPipelineParams p;
    p.k = 3;
    p.g = 8;
    auto t = cp_pipeline(inst.data, eps, r, CpMode::Tensor, p, 400 + s);
    auto c = cp_pipeline(inst.data, eps, r, CpMode::Chebyshev, p, 400 + s);
    for (const auto* res : {&t, &c}) {
      if (res->pair) {
        CHECK(res->pair->distance <= (1.0 + eps) * r);
        CHECK(res->pair->distance == doctest::Approx(kernels::norm2([&] {
                std::vector<double> diff(32);
                for (int i = 0; i < 32; ++i) {
                  diff[i] = inst.data[res->pair->first].coords()[i] - inst.data[res->pair->second].coords()[i];
                }
                return diff;
              }())));
      }
    }
    tensor_ok += t.pair ? 1 : 0;
    cheb_ok += c.pair ? 1 : 0;
  }
  MESSAGE("tensor ", tensor_ok, "/", trials, " chebyshev ", cheb_ok, "/", trials);
  CHECK(tensor_ok >= 6);

  auto inst = bench::planted_pair_sphere(128, 8, 0.5, 1.0, 9);
  CpPipelineParams p;
  p.k = 2;
  p.g = 4;
  p.jl_dim = 32;
  auto res = cp_pipeline(inst.data, 0.0, 0.5, CpMode::Tensor, p, 1);
  if (res.pair) CHECK(res.pair->distance <= 0.5);
  CHECK(res.embed_dim == 32);
  CHECK_THROWS_AS(cp_pipeline(Dataset({Point::dense({2.0, 0.0}), Point::dense({0.0, 1.0})}, Metric::l2()),
                              0.1, 0.1, CpMode::Tensor, p, 1),
                  InvalidArgument);
}
