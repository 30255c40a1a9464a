#include "annlab/dimred.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "annlab/random.hpp"

namespace annlab {

JlMap::JlMap(std::size_t source_dim, std::size_t target_dim, std::uint64_t seed)
    : d_(source_dim), k_(target_dim), seed_(seed) {
  if (d_ < 1) throw InvalidArgument("JL map needs source dim >= 1");
  if (k_ < 1) throw InvalidArgument("JL map needs target dim >= 1");
  scale_ = 1.0 / std::sqrt(static_cast<double>(k_));
  Rng rng = make_rng(seed, "dimred/jl");
  a_ = gaussian_vector(rng, k_ * d_);
}

std::vector<double> JlMap::apply(std::span<const double> x) const {
  if (x.size() != d_) {
    throw DimensionMismatch(fmt::format("JL input dim {} vs {}", x.size(), d_));
  }
  std::vector<double> y(k_);
  for (std::size_t j = 0; j < k_; ++j) {
    y[j] = scale_ * kernels::dot(std::span(a_).subspan(j * d_, d_), x);
  }
  return y;
}

KorMap::KorMap(std::size_t source_dim, std::size_t target_dim, double r,
               std::uint64_t seed)
    : d_(source_dim), r_(r) {
  if (target_dim < 1) throw InvalidArgument("GF(2) map needs k >= 1");
  if (!(r >= 1.0) || r > static_cast<double>(d_)) {
    throw InvalidArgument(fmt::format("GF(2) map needs r in [1, d], got {}", r));
  }
  p_ = 1.0 / (2.0 * r);
  Rng rng = make_rng(seed, "dimred/kor");
  std::bernoulli_distribution coin(p_);
  rows_.reserve(target_dim);
  for (std::size_t j = 0; j < target_dim; ++j) {
    BitVector row(d_);
    for (std::size_t i = 0; i < d_; ++i) {
      if (coin(rng)) row.set(i, true);
    }
    rows_.push_back(std::move(row));
  }
}

BitVector KorMap::apply(const BitVector& x) const {
  if (x.dim() != d_) {
    throw DimensionMismatch(fmt::format("GF(2) input dim {} vs {}", x.dim(), d_));
  }
  BitVector out(rows_.size());
  const auto xw = x.words();
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    const auto aw = rows_[j].words();
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < xw.size(); ++w) acc ^= aw[w] & xw[w];
    if (std::popcount(acc) & 1) out.set(j, true);
  }
  return out;
}

double KorMap::disagreement(double p, double h) {
  return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, h));
}

double KorMap::threshold(double eps) const {
  const double k = static_cast<double>(rows_.size());
  return 0.5 * k * (disagreement(p_, r_) + disagreement(p_, (1.0 + eps) * r_));
}

// ------------------------------------------------------------ cube dictionary

std::size_t CubeKeyHash::operator()(
    const std::vector<std::int64_t>& key) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (auto v : key) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

std::vector<std::int64_t> CubeDictIndex::cube_of(std::span<const double> y) const {
  std::vector<std::int64_t> key(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    key[i] = static_cast<std::int64_t>(std::floor(y[i] / side_));
  }
  return key;
}

double CubeDictIndex::cube_min_distance(const std::vector<std::int64_t>& key,
                                        std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double lo = static_cast<double>(key[i]) * side_;
    const double hi = lo + side_;
    const double gap = y[i] < lo ? lo - y[i] : (y[i] > hi ? y[i] - hi : 0.0);
    s += gap * gap;
  }
  return std::sqrt(s);
}

CubeDictIndex::CubeDictIndex(const Dataset& data, double r, double eps,
                             std::size_t k, std::uint64_t seed,
                             std::size_t max_cells)
    : r_(r), eps_(eps), side_(0.0), map_(data.dim(), k, seed) {
  if (data.metric().kind() != MetricKind::L2) {
    throw InvalidArgument("cube dictionary requires an l2 dataset");
  }
  if (!(r > 0.0)) throw InvalidArgument("cube dictionary needs r > 0");
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("cube dictionary needs eps in (0, 1/2)");
  side_ = eps * r / std::sqrt(static_cast<double>(k));
  const double radius = r * (1.0 + eps);

  embedded_.reserve(data.size());
  std::size_t admitted = 0;
  std::vector<std::int64_t> cell(k);
  for (std::size_t p = 0; p < data.size(); ++p) {
    embedded_.push_back(map_.apply(data[p].coords()));
    const auto& y = embedded_.back();
    // Depth-first over coordinates, pruning on the partial squared gap; this
    // visits exactly the cells whose min-distance to y is within the radius.
    const double budget = radius * radius;
    auto visit = [&](auto&& self, std::size_t i, double used) -> void {
      if (i == k) {
        if (++admitted > max_cells) {
          throw ResourceLimit(fmt::format(
              "cube dictionary exceeds {} cells (k={}, eps={})", max_cells, k, eps));
        }
        table_.try_emplace(cell, p);
        return;
      }
      const auto home = static_cast<std::int64_t>(std::floor(y[i] / side_));
      for (int dir : {0, 1}) {
        for (std::int64_t c = dir == 0 ? home : home + 1;; c += dir == 0 ? -1 : 1) {
          const double lo = static_cast<double>(c) * side_;
          const double gap = y[i] < lo ? lo - y[i] : (y[i] > lo + side_ ? y[i] - lo - side_ : 0.0);
          const double next = used + gap * gap;
          if (next > budget) break;
          cell[i] = c;
          self(self, i + 1, next);
        }
      }
    };
    visit(visit, 0, 0.0);
  }
}

std::optional<std::size_t> CubeDictIndex::query(const Point& q) const {
  const auto y = map_.apply(q.coords());
  auto it = table_.find(cube_of(y));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

// --------------------------------------------------------- hamming lookup

HammingLookupIndex::HammingLookupIndex(const Dataset& data, double r, double eps,
                                       std::size_t k, std::uint64_t seed,
                                       std::size_t k_max)
    : r_(r), eps_(eps), map_(data.dim(), k, r, seed) {
  if (!data.is_bits()) throw RepresentationMismatch("lookup table needs bit data");
  if (k > k_max || k > 30) {
    throw ResourceLimit(fmt::format("lookup table k={} exceeds k_max={}", k, k_max));
  }
  if (data.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceLimit("lookup table supports at most 2^32 points");
  }
  const std::size_t size = std::size_t{1} << k;
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  index_.assign(size, kUnset);
  dist_.assign(size, 0);

  std::vector<std::uint64_t> frontier;
  codes_.reserve(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    const std::uint64_t z = code_of(data[p]);
    codes_.push_back(z);
    if (index_[z] == kUnset) {
      index_[z] = static_cast<std::uint32_t>(p);
      frontier.push_back(z);
    }
  }
  // Level-synchronous BFS; a cell reached from several cells of the previous
  // level keeps the smallest representative index.
  std::uint8_t level = 0;
  std::vector<std::uint64_t> next;
  while (!frontier.empty()) {
    next.clear();
    ++level;
    for (auto w : frontier) {
      const std::uint32_t rep = index_[w];
      for (std::size_t b = 0; b < k; ++b) {
        const std::uint64_t z = w ^ (std::uint64_t{1} << b);
        if (index_[z] == kUnset) {
          index_[z] = rep;
          dist_[z] = level;
          next.push_back(z);
        } else if (dist_[z] == level && rep < index_[z]) {
          index_[z] = rep;
        }
      }
    }
    frontier.swap(next);
  }
}

std::uint64_t HammingLookupIndex::code_of(const Point& x) const {
  const BitVector y = map_.apply(x.bit_vector());
  std::uint64_t z = 0;
  for (std::size_t j = 0; j < y.dim(); ++j) {
    if (y.get(j)) z |= std::uint64_t{1} << j;
  }
  return z;
}

std::optional<LookupAnswer> HammingLookupIndex::query(const Point& q) const {
  return entry(code_of(q));
}

}  // namespace annlab
