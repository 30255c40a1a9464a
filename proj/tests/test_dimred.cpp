#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "annlab/dimred.hpp"
#include "annlab/numeric.hpp"
#include "annlab/random.hpp"

using namespace annlab;

namespace {

Point random_bits(Rng& rng, std::size_t d) {
  BitVector b(d);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < d; ++i) b.set(i, coin(rng));
  return Point::bits(b);
}

Point flip_random(Rng& rng, const Point& x, std::size_t h) {
  BitVector b = x.bit_vector();
  std::vector<std::size_t> idx(b.dim());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::size_t i = 0; i < h; ++i) b.flip(idx[i]);
  return Point::bits(b);
}

std::vector<double> unit(Rng& rng, std::size_t d) { return random_unit_vector(rng, d); }

}  // namespace

TEST_CASE("jl map is linear and deterministic") {
  JlMap f(20, 8, 3);
  std::vector<double> zero(20, 0.0);
  for (double v : f.apply(zero)) CHECK(v == 0.0);
  Rng rng = make_rng(1, "test/jl");
  auto x = gaussian_vector(rng, 20), y = gaussian_vector(rng, 20);
  std::vector<double> comb(20);
  for (int i = 0; i < 20; ++i) comb[i] = 2.0 * x[i] - 0.5 * y[i];
  auto fx = f.apply(x), fy = f.apply(y), fc = f.apply(comb);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(fc[j] - (2.0 * fx[j] - 0.5 * fy[j])) <= 1e-9);
  CHECK(JlMap(20, 8, 3).apply(x) == fx);
  CHECK_THROWS_AS(JlMap(20, 0, 1), InvalidArgument);
}

TEST_CASE("jl squared norm has mean one") {
  Rng rng = make_rng(2, "test/jl-mean");
  auto x = unit(rng, 64);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto y = JlMap(64, 256, seed).apply(x);
    sum += kernels::dot(y, y);
  }
  const double mean = sum / 1000.0;
  CHECK(mean >= 0.95);
  CHECK(mean <= 1.05);
}

TEST_CASE("jl distortion tail decays with a positive constant") {
  Rng rng = make_rng(3, "test/jl-tail");
  auto x = gaussian_vector(rng, 64), y = gaussian_vector(rng, 64);
  std::vector<double> diff(64);
  for (int i = 0; i < 64; ++i) diff[i] = x[i] - y[i];
  const double base = kernels::norm2(diff);
  const std::size_t k = 32;
  const int seeds = 2000;
  std::vector<double> fitted;
  for (double eps : {0.2, 0.3, 0.4}) {
    int bad = 0;
    for (int s = 0; s < seeds; ++s) {
      JlMap f(64, k, 1000 + s);
      auto fd = f.apply(diff);
      const double ratio = kernels::norm2(fd) / base;
      if (!(ratio > 1.0 - eps && ratio < 1.0 + eps)) ++bad;
    }
    const double fail = std::max(bad, 1) / double(seeds);
    fitted.push_back(-std::log(fail) / (eps * eps * k));
    CHECK(1.0 - fail >= 1.0 - std::exp(-fitted.back() * eps * eps * k) - 1e-12);
  }
  for (double c : fitted) CHECK(c > 0.0);
}

TEST_CASE("gf2 map is linear and matches the disagreement formula") {
  KorMap f(96, 40, 8.0, 5);
  CHECK(f.entry_prob() == doctest::Approx(1.0 / 16.0));
  CHECK(f.apply(BitVector(96)).popcount() == 0);
  Rng rng = make_rng(4, "test/kor");
  for (int t = 0; t < 50; ++t) {
    auto x = random_bits(rng, 96).bit_vector();
    auto y = random_bits(rng, 96).bit_vector();
    CHECK((f.apply(x ^ y)) == (f.apply(x) ^ f.apply(y)));
  }
  CHECK_THROWS_AS(KorMap(96, 40, 0.5, 1), InvalidArgument);
  CHECK_THROWS_AS(f.apply(BitVector(95)), DimensionMismatch);
  CHECK_THROWS_AS(f.apply(Point::dense({1.0})), RepresentationMismatch);

  const std::size_t h = 6;
  auto x = random_bits(rng, 96);
  auto y = flip_random(rng, x, h);
  const int seeds = 10000;
  int differ = 0;
  for (int s = 0; s < seeds; ++s) {
    KorMap g(96, 1, 8.0, 100 + s);
    differ += g.apply(x).bit_vector().get(0) != g.apply(y).bit_vector().get(0);
  }
  const double expect = KorMap::disagreement(1.0 / 16.0, h);
  const double sigma = std::sqrt(expect * (1 - expect) / seeds);
  CHECK(std::abs(differ / double(seeds) - expect) <= 3 * sigma);
}

TEST_CASE("gf2 map separates r from (1+eps) r") {
  const std::size_t d = 128, k = 512;
  const double r = 16, eps = 0.5;
  Rng rng = make_rng(6, "test/kor-sep");
  int wrong = 0, total = 0;
  for (int s = 0; s < 400; ++s) {
    KorMap f(d, k, r, 500 + s);
    const double thr = f.threshold(eps);
    auto x = random_bits(rng, d);
    auto near = flip_random(rng, x, std::size_t(r));
    auto far = flip_random(rng, x, std::size_t((1 + eps) * r));
    const auto fx = f.apply(x.bit_vector());
    wrong += (fx ^ f.apply(near.bit_vector())).popcount() > thr;
    wrong += (fx ^ f.apply(far.bit_vector())).popcount() <= thr;
    total += 2;
  }
  CHECK(wrong / double(total) < 0.05);
}

TEST_CASE("cube dictionary in one dimension") {
  Dataset ds({Point::dense({0.3, -0.2, 0.5})}, Metric::l2());
  const double r = 1.0, eps = 0.25;
  CubeDictIndex idx(ds, r, eps, 1, 9);
  const double expected = std::ceil(2 * r * (1 + eps) / idx.side());
  CHECK(std::abs(double(idx.cube_count()) - expected) <= 1.0);
  const double y = idx.embedded()[0][0];
  for (const auto& [key, rep] : idx.table()) {
    (void)rep;
    const double lo = key[0] * idx.side(), hi = lo + idx.side();
    CHECK(hi >= y - r * (1 + eps));
    CHECK(lo <= y + r * (1 + eps));
  }
}

TEST_CASE("cube dictionary construction predicate") {
  Rng rng = make_rng(10, "test/cube");
  std::vector<Point> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(Point::dense(gaussian_vector(rng, 16)));
  Dataset ds(pts, Metric::l2());
  const double r = 1.0, eps = 0.4;
  CubeDictIndex idx(ds, r, eps, 4, 11);
  std::size_t bad_predicate = 0, bad_representative = 0;
  for (const auto& [key, rep] : idx.table()) {
    bad_predicate += idx.cube_min_distance(key, idx.embedded()[rep]) > r * (1 + eps);
    for (std::size_t p = 0; p < rep; ++p) {
      bad_representative += idx.cube_min_distance(key, idx.embedded()[p]) <= r * (1 + eps);
    }
  }
  CHECK(bad_predicate == 0);
  CHECK(bad_representative == 0);
  for (std::size_t p = 0; p < ds.size(); ++p) {
    auto hit = idx.query(ds[p]);
    REQUIRE(hit);
    const double emb = std::sqrt(kernels::squared_l2(idx.embedded()[*hit], idx.embedded()[p]));
    CHECK(emb <= (1 + 2 * eps) * r + 1e-12);
  }
  std::vector<double> far(16, 1000.0);
  CHECK_FALSE(idx.query(Point::dense(far)));
  CHECK_THROWS_AS(CubeDictIndex(ds, r, eps, 4, 11, 1000), ResourceLimit);
}

TEST_CASE("cube dictionary grows as eps shrinks") {
  Rng rng = make_rng(12, "test/cube-grow");
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(Point::dense(gaussian_vector(rng, 8)));
  Dataset ds(pts, Metric::l2());
  std::size_t prev = 0;
  for (double eps : {0.4, 0.2, 0.1}) {
    CubeDictIndex idx(ds, 0.5, eps, 3, 13);
    CHECK(idx.cube_count() > prev);
    prev = idx.cube_count();
  }
}

TEST_CASE("cube dictionary planted query succeeds often") {
  const double r = 1.0, eps = 0.4;
  int success = 0;
  const int trials = 60;
  for (int s = 0; s < trials; ++s) {
    Rng rng = make_rng(14, "test/cube-planted", s);
    auto q = gaussian_vector(rng, 32);
    std::vector<Point> pts;
    for (int i = 0; i < 9; ++i) {
      auto dir = unit(rng, 32);
      for (int j = 0; j < 32; ++j) dir[j] = q[j] + 10 * r * dir[j];
      pts.push_back(Point::dense(dir));
    }
    auto dir = unit(rng, 32);
    for (int j = 0; j < 32; ++j) dir[j] = q[j] + 0.9 * r * dir[j];
    pts.insert(pts.begin() + s % 10, Point::dense(dir));
    Dataset ds(pts, Metric::l2());
    CubeDictIndex idx(ds, r, eps, 4, 1000 + s);
    auto hit = idx.query(Point::dense(q));
    if (hit && distance(Metric::l2(), ds[*hit], Point::dense(q)) <= (1 + 2 * eps) * r) ++success;
  }
  CHECK(success >= trials * 5 / 6);
}

TEST_CASE("hamming lookup equals exhaustive scan") {
  Rng rng = make_rng(15, "test/lookup");
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(random_bits(rng, 64));
  pts.push_back(pts[3]);
  Dataset ds(pts, Metric::hamming());
  HammingLookupIndex idx(ds, 4, 0.5, 10, 16);
  REQUIRE(idx.table_size() == 1024);
  for (std::uint64_t z = 0; z < 1024; ++z) {
    std::size_t best = 0, bd = 1000;
    for (std::size_t p = 0; p < ds.size(); ++p) {
      const auto d = std::size_t(std::popcount(z ^ idx.codes()[p]));
      if (d < bd) bd = d, best = p;
    }
    auto e = idx.entry(z);
    CHECK(e.embedded_distance == bd);
    CHECK(e.index == best);
  }
  auto ans = idx.query(ds[5]);
  REQUIRE(ans);
  CHECK(ans->embedded_distance == 0);
  CHECK_THROWS_AS(HammingLookupIndex(ds, 4, 0.5, 25, 1), ResourceLimit);
}
