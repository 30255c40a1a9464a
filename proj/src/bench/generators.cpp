#include "annlab/bench/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "annlab/random.hpp"

namespace annlab::bench {

namespace {

constexpr int kMaxResample = 1000;

BitVector random_bits(Rng& rng, std::size_t d) {
  BitVector b(d);
  auto w = b.words();
  for (auto& x : w) x = rng();
  if (d % 64 != 0) w.back() &= (std::uint64_t{1} << (d % 64)) - 1;
  return b;
}

BitVector flip_exact(Rng& rng, BitVector b, std::size_t h) {
  std::vector<std::size_t> idx(b.dim());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < h; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    b.flip(idx[i]);
  }
  return b;
}

std::vector<std::size_t> distinct_indices(Rng& rng, std::size_t n, std::size_t k) {
  if (k > n) throw InvalidArgument("more planted queries than data points");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

/// Unit vector at l2 distance s from unit p.
std::vector<double> at_distance_on_sphere(Rng& rng, std::span<const double> p, double s) {
  const std::size_t d = p.size();
  std::vector<double> z;
  double nz = 0.0;
  do {
    z = gaussian_vector(rng, d);
    const double proj = kernels::dot(z, p);
    for (std::size_t i = 0; i < d; ++i) z[i] -= proj * p[i];
    nz = kernels::norm2(z);
  } while (nz < 1e-6);
  const double cosv = 1.0 - 0.5 * s * s;
  const double sinv = std::sqrt(std::max(0.0, 1.0 - cosv * cosv));
  std::vector<double> q(d);
  for (std::size_t i = 0; i < d; ++i) q[i] = cosv * p[i] + sinv * z[i] / nz;
  const double nq = kernels::norm2(q);
  for (auto& v : q) v /= nq;
  return q;
}

/// Replants (point, query) pairs whose planted point lands within `limit` of
/// another query, then resamples background points that fall within `limit`
/// of any query. `make_query` derives a query from its planted point.
template <class Sampler, class MakeQuery>
void enforce_unique(std::vector<Point>& pts, std::vector<Point>& queries,
                    const std::vector<std::size_t>& planted, const Metric& metric, double limit,
                    Sampler&& sample, MakeQuery&& make_query) {
  const double lim = limit * (1.0 + 1e-9);
  for (std::size_t a = 0; a < planted.size(); ++a) {
    for (int attempt = 0;; ++attempt) {
      bool clash = false;
      for (std::size_t b = 0; b < planted.size() && !clash; ++b) {
        if (b == a) continue;
        clash = distance(metric, pts[planted[a]], queries[b]) <= lim ||
                distance(metric, pts[planted[b]], queries[a]) <= lim;
      }
      if (!clash) break;
      if (attempt >= kMaxResample) {
        throw DataError("planted generator could not separate planted pairs");
      }
      pts[planted[a]] = sample();
      queries[a] = make_query(pts[planted[a]]);
    }
  }
  std::vector<char> is_planted(pts.size(), 0);
  for (auto p : planted) is_planted[p] = 1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (is_planted[i]) continue;
    for (int attempt = 0;; ++attempt) {
      bool clash = false;
      for (const auto& q : queries) {
        if (distance(metric, pts[i], q) <= lim) {
          clash = true;
          break;
        }
      }
      if (!clash) break;
      if (attempt >= kMaxResample) {
        throw DataError("planted generator could not separate background points");
      }
      pts[i] = sample();
    }
  }
}

PlantedNeighbors finish(std::vector<Point> pts, std::vector<Point> queries,
                        const std::vector<std::size_t>& planted, const Metric& metric,
                        double limit) {
  Dataset data(std::move(pts), metric);
  std::vector<Neighbor> truth;
  for (std::size_t j = 0; j < queries.size(); ++j) {
    const auto nn = brute_force_nn(data, queries[j]);
    const std::size_t p = planted[j];
    const double dp = distance(metric, data[p], queries[j]);
    if (dp > limit * (1.0 + 1e-9) + 1e-12 || nn.distance < dp - 1e-12) {
      throw InvariantViolation(fmt::format("planted query {} failed verification", j));
    }
    if (limit > 0.0) {
      std::size_t near = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        near += distance(metric, data[i], queries[j]) <= limit * (1.0 + 1e-9) ? 1 : 0;
      }
      if (near != 1) {
        throw InvariantViolation(fmt::format("query {} has {} points within r", j, near));
      }
    }
    truth.push_back({p, dp});
  }
  return {std::move(data), std::move(queries), std::move(truth)};
}

}  // namespace

PlantedNeighbors planted_hamming(std::size_t n, std::size_t d, std::size_t r,
                                 std::size_t queries, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidArgument("planted_hamming needs n, d >= 1");
  if (r > d) throw InvalidArgument("planted_hamming needs r <= d");
  Rng rng = make_rng(seed, "gen/hamming");
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(Point::bits(random_bits(rng, d)));
  const auto planted = distinct_indices(rng, n, queries);
  std::vector<Point> qs;
  auto make_query = [&](const Point& p) { return Point::bits(flip_exact(rng, p.bit_vector(), r)); };
  for (auto p : planted) qs.push_back(make_query(pts[p]));
  enforce_unique(pts, qs, planted, Metric::hamming(), static_cast<double>(r),
                 [&] { return Point::bits(random_bits(rng, d)); }, make_query);
  return finish(std::move(pts), std::move(qs), planted, Metric::hamming(), static_cast<double>(r));
}

PlantedNeighbors hamming_shell(std::size_t n, std::size_t d, std::size_t far,
                               std::uint64_t seed) {
  if (far > d) throw InvalidArgument("hamming_shell needs far <= d");
  Rng rng = make_rng(seed, "gen/hamming-shell");
  const BitVector q = random_bits(rng, d);
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(Point::bits(flip_exact(rng, q, far)));
  Dataset data(std::move(pts), Metric::hamming());
  return {std::move(data), {Point::bits(q)}, {}};
}

PlantedNeighbors sphere_shell(std::size_t n, std::size_t d, double far, std::uint64_t seed) {
  if (!(far > 0.0 && far < 2.0)) throw InvalidArgument("sphere_shell needs far in (0, 2)");
  Rng rng = make_rng(seed, "gen/sphere-shell");
  const auto q = random_unit_vector(rng, d);
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(Point::dense(at_distance_on_sphere(rng, q, far)));
  Dataset data(std::move(pts), Metric::l2());
  return {std::move(data), {Point::dense(q)}, {}};
}

Caps planted_caps(std::size_t n, std::size_t d, std::size_t caps, double cap_fraction,
                  double cap_cos, std::uint64_t seed) {
  if (!(cap_fraction >= 0.0 && cap_fraction <= 1.0)) throw InvalidArgument("cap_fraction in [0,1]");
  if (!(cap_cos > -1.0 && cap_cos <= 1.0)) throw InvalidArgument("cap_cos in (-1, 1]");
  Rng rng = make_rng(seed, "gen/caps");
  Caps out{Dataset({Point::dense({1.0})}, Metric::l2()), {}, {}};
  for (std::size_t c = 0; c < caps; ++c) out.centers.push_back(random_unit_vector(rng, d));
  const std::size_t per_cap =
      caps == 0 ? 0 : static_cast<std::size_t>(std::floor(cap_fraction * double(n) / double(caps)));
  const double s = std::sqrt(2.0 - 2.0 * cap_cos);
  std::vector<Point> pts;
  for (std::size_t c = 0; c < caps; ++c) {
    for (std::size_t i = 0; i < per_cap; ++i) {
      pts.push_back(Point::dense(cap_cos >= 1.0 ? out.centers[c]
                                                : at_distance_on_sphere(rng, out.centers[c], s)));
      out.labels.push_back(static_cast<int>(c));
    }
  }
  while (pts.size() < n) {
    pts.push_back(Point::dense(random_unit_vector(rng, d)));
    out.labels.push_back(-1);
  }
  // Shuffle so cap membership is not encoded in the index order.
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point> shuffled;
  std::vector<int> labels;
  for (auto i : perm) {
    shuffled.push_back(pts[i]);
    labels.push_back(out.labels[i]);
  }
  out.data = Dataset(std::move(shuffled), Metric::l2());
  out.labels = std::move(labels);
  return out;
}

PlantedNeighbors planted_sphere(std::size_t n, std::size_t d, double r, std::size_t queries,
                                std::size_t caps, double cap_fraction, double cap_cos,
                                std::uint64_t seed) {
  Caps base = planted_caps(n, d, caps, cap_fraction, cap_cos, derive_seed(seed, "gen/sphere-base"));
  Rng rng = make_rng(seed, "gen/sphere");
  std::vector<Point> pts(base.data.points().begin(), base.data.points().end());
  const auto planted = distinct_indices(rng, n, queries);
  std::vector<Point> qs;
  auto make_query = [&](const Point& p) { return Point::dense(at_distance_on_sphere(rng, p.coords(), r)); };
  for (auto p : planted) qs.push_back(make_query(pts[p]));
  enforce_unique(pts, qs, planted, Metric::l2(), r,
                 [&] { return Point::dense(random_unit_vector(rng, d)); }, make_query);
  return finish(std::move(pts), std::move(qs), planted, Metric::l2(), r);
}

PlantedNeighbors planted_linf(std::size_t n, std::size_t d, double side, double dist,
                              std::size_t queries, std::uint64_t seed) {
  Rng rng = make_rng(seed, "gen/linf");
  std::uniform_real_distribution<double> coord(0.0, side), off(-dist, dist);
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = coord(rng);
    pts.push_back(Point::dense(std::move(x)));
  }
  const auto planted = distinct_indices(rng, n, queries);
  std::vector<Point> qs;
  std::uniform_int_distribution<std::size_t> pick(0, d - 1);
  std::bernoulli_distribution coin(0.5);
  for (auto p : planted) {
    const auto x = pts[p].coords();
    std::vector<double> q(d);
    for (std::size_t i = 0; i < d; ++i) q[i] = x[i] + off(rng);
    const std::size_t axis = pick(rng);
    q[axis] = x[axis] + (coin(rng) ? dist : -dist);
    qs.push_back(Point::dense(std::move(q)));
  }
  return finish(std::move(pts), std::move(qs), planted, Metric::linf(), dist);
}

PlantedNeighbors planted_l1(std::size_t n, std::size_t d, double side, double r, double c,
                            std::size_t queries, std::uint64_t seed) {
  Rng rng = make_rng(seed, "gen/l1");
  std::uniform_real_distribution<double> coord(0.0, side);
  auto sample = [&] {
    std::vector<double> x(d);
    for (auto& v : x) v = coord(rng);
    return Point::dense(std::move(x));
  };
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(sample());
  const auto planted = distinct_indices(rng, n, queries);
  std::vector<Point> qs;
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  auto make_query = [&](const Point& p) {
    std::vector<double> w(d);
    double total = 0.0;
    for (auto& v : w) total += (v = expo(rng));
    const auto x = p.coords();
    std::vector<double> q(d);
    for (std::size_t i = 0; i < d; ++i) q[i] = x[i] + (coin(rng) ? 1.0 : -1.0) * r * w[i] / total;
    return Point::dense(std::move(q));
  };
  for (auto p : planted) qs.push_back(make_query(pts[p]));
  enforce_unique(pts, qs, planted, Metric::l1(), c * r, sample, make_query);
  auto out = finish(std::move(pts), std::move(qs), planted, Metric::l1(), r);
  for (std::size_t j = 0; j < out.queries.size(); ++j) {
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      if (i != out.truth[j].index && distance(Metric::l1(), out.data[i], out.queries[j]) <= c * r) {
        throw InvariantViolation("planted l1 background within c*r");
      }
    }
  }
  return out;
}

namespace {

template <class Sampler, class Plant>
PlantedPair planted_pair(std::size_t n, const Metric& metric, double r, double c, Rng& rng,
                         Sampler&& sample, Plant&& plant) {
  if (n < 2) throw InvalidArgument("planted pair needs n >= 2");
  const double limit = c * r;
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      Point p = sample();
      bool clash = false;
      for (const auto& o : pts) {
        if (distance(metric, o, p) <= limit) {
          clash = true;
          break;
        }
      }
      if (!clash) {
        pts.push_back(std::move(p));
        break;
      }
      if (attempt >= kMaxResample) throw DataError("planted pair: background too dense");
    }
  }
  // The partner must keep every other pair above cr.
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  const std::size_t a = pick(rng);
  Point partner;
  for (int attempt = 0;; ++attempt) {
    partner = plant(pts[a]);
    bool clash = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != a && distance(metric, pts[i], partner) <= limit) {
        clash = true;
        break;
      }
    }
    if (!clash) break;
    if (attempt >= kMaxResample) throw DataError("planted pair: cannot place partner");
  }
  std::uniform_int_distribution<std::size_t> slot(0, pts.size());
  const std::size_t b = slot(rng);
  pts.insert(pts.begin() + static_cast<long>(b), std::move(partner));
  const std::size_t first = a < b ? a : a + 1;
  PlantedPair out{Dataset(std::move(pts), metric), std::min(first, b), std::max(first, b), 0.0};
  const auto cp = brute_force_cp(out.data);
  out.distance = distance(metric, out.data[out.first], out.data[out.second]);
  if (cp.first != out.first || cp.second != out.second || out.distance > r + 1e-12) {
    throw InvariantViolation("planted pair failed brute-force verification");
  }
  return out;
}

}  // namespace

PlantedPair planted_pair_hamming(std::size_t n, std::size_t d, std::size_t r, double c,
                                 std::uint64_t seed) {
  Rng rng = make_rng(seed, "gen/pair-hamming");
  return planted_pair(
      n, Metric::hamming(), static_cast<double>(r), c, rng,
      [&] { return Point::bits(random_bits(rng, d)); },
      [&](const Point& p) { return Point::bits(flip_exact(rng, p.bit_vector(), r)); });
}

PlantedPair planted_pair_sphere(std::size_t n, std::size_t d, double r, double c,
                                std::uint64_t seed) {
  Rng rng = make_rng(seed, "gen/pair-sphere");
  return planted_pair(
      n, Metric::l2(), r, c, rng, [&] { return Point::dense(random_unit_vector(rng, d)); },
      [&](const Point& p) { return Point::dense(at_distance_on_sphere(rng, p.coords(), r)); });
}

double sign_ip(const BitVector& a, const BitVector& b) {
  const double d = static_cast<double>(a.dim());
  const double disagree = static_cast<double>(kernels::hamming(a.words(), b.words()));
  return (d - 2.0 * disagree) / d;
}

SignInstance planted_sign_ip(std::size_t n, std::size_t d, std::size_t planted_flips,
                             double theta, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("sign instance needs n >= 2");
  if (planted_flips > d) throw InvalidArgument("planted flips exceed d");
  for (int attempt = 0; attempt < 4; ++attempt) {
    Rng rng = make_rng(seed, "gen/sign-ip", static_cast<std::uint64_t>(attempt));
    SignInstance inst;
    inst.d = d;
    inst.signs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) inst.signs.push_back(random_bits(rng, d));
    const auto pair = distinct_indices(rng, n, 2);
    inst.first = std::min(pair[0], pair[1]);
    inst.second = std::max(pair[0], pair[1]);
    inst.signs[inst.second] = flip_exact(rng, inst.signs[inst.first], planted_flips);
    inst.planted_ip = sign_ip(inst.signs[inst.first], inst.signs[inst.second]);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (i == inst.first && j == inst.second) continue;
        worst = std::max(worst, std::abs(sign_ip(inst.signs[i], inst.signs[j])));
      }
    }
    inst.max_background_ip = worst;
    if (worst <= theta) return inst;
  }
  throw DataError(fmt::format("sign instance: background exceeds theta={} (n={}, d={})", theta, n, d));
}

}  // namespace annlab::bench
