#include "annlab/cpair.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "annlab/dimred.hpp"
#include "annlab/random.hpp"

namespace annlab {

// ------------------------------------------------------------ CP via ANN

namespace {

class LshOracle final : public AnnOracle {
 public:
  LshOracle(std::unique_ptr<Dataset> data, std::shared_ptr<const LshFamily> family, LshParams p,
            std::uint64_t seed)
      : data_(std::move(data)), index_(*data_, std::move(family), p.k, p.L, seed) {}
  std::optional<Neighbor> query(const Point& q) const override { return index_.query(q).hit; }

 private:
  std::unique_ptr<Dataset> data_;
  LshIndex index_;
};

class BruteOracle final : public AnnOracle {
 public:
  BruteOracle(std::unique_ptr<Dataset> data, double limit) : data_(std::move(data)), limit_(limit) {}
  std::optional<Neighbor> query(const Point& q) const override {
    auto nn = brute_force_nn(*data_, q);
    if (nn.distance <= limit_) return nn;
    return std::nullopt;
  }

 private:
  std::unique_ptr<Dataset> data_;
  double limit_;
};

std::uint64_t content_hash(const Point& p) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  if (p.is_bits()) {
    for (auto w : p.bit_vector().words()) h = mix64(h ^ w);
  } else {
    for (double v : p.coords()) h = mix64(h ^ std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
  }
  return h;
}

std::optional<PointPair> find_duplicate(const Dataset& data) {
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto h = content_hash(data[i]);
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (distance(data.metric(), data[it->second], data[i]) == 0.0) {
        return PointPair{it->second, i, 0.0};
      }
    }
    seen.emplace(h, i);
  }
  return std::nullopt;
}

}  // namespace

AnnBuilder lsh_ann_builder(std::shared_ptr<const LshFamily> family, double c_rep) {
  return [family = std::move(family), c_rep](const Dataset& subset, std::uint64_t seed) {
    const auto p = choose_params(subset.size(), *family, c_rep);
    return std::unique_ptr<AnnOracle>(
        new LshOracle(std::make_unique<Dataset>(subset), family, p, seed));
  };
}

AnnBuilder brute_ann_builder(double limit) {
  return [limit](const Dataset& subset, std::uint64_t) {
    return std::unique_ptr<AnnOracle>(new BruteOracle(std::make_unique<Dataset>(subset), limit));
  };
}

CpViaAnnResult cp_via_ann(const Dataset& data, double c, double r, const AnnBuilder& builder,
                          std::uint64_t seed, std::size_t repeats) {
  if (data.size() < 2) throw InvalidArgument("closest pair needs n >= 2");
  if (!(c >= 1.0) || !(r >= 0.0)) throw InvalidArgument("closest pair needs c >= 1, r >= 0");
  CpViaAnnResult out;
  if (auto dup = find_duplicate(data)) {
    out.pair = dup;
    out.duplicate_shortcut = true;
    return out;
  }
  const double limit = c * r;
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    ++out.repetitions;
    Rng rng = make_rng(seed, "cp/split", rep);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < data.size(); ++i) (coin(rng) ? a : b).push_back(i);
    if (a.empty() || b.empty()) continue;
    auto oracle = builder(data.subset(a), derive_seed(seed, "cp/ann", rep));
    std::optional<PointPair> best;
    for (auto j : b) {
      ++out.queries;
      auto hit = oracle->query(data[j]);
      if (!hit) continue;
      const std::size_t i = a.at(hit->index);
      const double dist = distance(data.metric(), data[i], data[j]);
      if (dist > limit) continue;
      if (!best || dist < best->distance) best = PointPair{std::min(i, j), std::max(i, j), dist};
    }
    if (best) {
      out.pair = best;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------- grouped inner products

std::vector<double> VectorSet::row(std::size_t i) const {
  std::vector<double> out(dim(), 0.0);
  accumulate(i, 1.0, out);
  return out;
}

double VectorSet::dot(std::size_t i, const VectorSet& other, std::size_t j) const {
  const auto a = row(i), b = other.row(j);
  return kernels::dot(a, b);
}

DenseRows::DenseRows(std::vector<double> values, std::size_t rows, std::size_t dim)
    : v_(std::move(values)), rows_(rows), dim_(dim) {
  if (rows < 1 || dim < 1 || v_.size() != rows * dim) throw InvalidArgument("bad dense row block");
}

DenseRows DenseRows::from_dataset(const Dataset& data) {
  std::vector<double> v;
  v.reserve(data.size() * data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data[i].coords();
    v.insert(v.end(), x.begin(), x.end());
  }
  return DenseRows(std::move(v), data.size(), data.dim());
}

void DenseRows::accumulate(std::size_t i, double coef, std::span<double> out) const {
  const auto x = row_span(i);
  for (std::size_t t = 0; t < dim_; ++t) out[t] += coef * x[t];
}

double DenseRows::dot(std::size_t i, const VectorSet& other, std::size_t j) const {
  if (const auto* o = dynamic_cast<const DenseRows*>(&other)) {
    return kernels::dot(row_span(i), o->row_span(j));
  }
  const auto b = other.row(j);
  return kernels::dot(row_span(i), b);
}

SignRows::SignRows(std::vector<BitVector> signs) : s_(std::move(signs)) {
  if (s_.empty()) throw InvalidArgument("sign rows must be nonempty");
  d_ = s_.front().dim();
  for (const auto& s : s_) {
    if (s.dim() != d_) throw DimensionMismatch("sign rows of different dimension");
  }
}

void SignRows::accumulate(std::size_t i, double coef, std::span<double> out) const {
  const double v = coef / std::sqrt(static_cast<double>(d_));
  const auto& s = s_[i];
  for (std::size_t t = 0; t < d_; ++t) out[t] += s.get(t) ? v : -v;
}

double SignRows::dot(std::size_t i, const VectorSet& other, std::size_t j) const {
  if (const auto* o = dynamic_cast<const SignRows*>(&other)) {
    const double ham = static_cast<double>(kernels::hamming(s_[i].words(), o->s_[j].words()));
    return (static_cast<double>(d_) - 2.0 * ham) / static_cast<double>(d_);
  }
  return VectorSet::dot(i, other, j);
}

MatmulBackend parse_backend(std::string_view name) {
  if (name == "naive") return MatmulBackend::Naive;
  if (name == "blocked") return MatmulBackend::Blocked;
  throw InvalidArgument(fmt::format("unknown matmul backend '{}'", name));
}

std::string backend_name(MatmulBackend b) { return b == MatmulBackend::Naive ? "naive" : "blocked"; }

std::vector<double> multiply_abt(std::span<const double> a, std::size_t a_rows,
                                 std::span<const double> b, std::size_t b_rows, std::size_t dim,
                                 MatmulBackend backend) {
  if (a.size() != a_rows * dim || b.size() != b_rows * dim) {
    throw DimensionMismatch("matmul operand shape mismatch");
  }
  std::vector<double> c(a_rows * b_rows, 0.0);
  if (backend == MatmulBackend::Naive) {
    for (std::size_t i = 0; i < a_rows; ++i) {
      for (std::size_t j = 0; j < b_rows; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < dim; ++t) s += a[i * dim + t] * b[j * dim + t];
        c[i * b_rows + j] = s;
      }
    }
    return c;
  }
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> ma(a.data(), static_cast<Eigen::Index>(a_rows), static_cast<Eigen::Index>(dim));
  Eigen::Map<const RowMat> mb(b.data(), static_cast<Eigen::Index>(b_rows), static_cast<Eigen::Index>(dim));
  Eigen::Map<RowMat> mc(c.data(), static_cast<Eigen::Index>(a_rows), static_cast<Eigen::Index>(b_rows));
  mc.noalias() = ma * mb.transpose();
  return c;
}

IpGroupedResult ip_grouped(const VectorSet& left, const VectorSet* right, std::size_t g,
                           MatmulBackend backend, std::uint64_t seed) {
  const VectorSet& rt = right ? *right : left;
  const std::size_t n = left.size(), d = left.dim();
  if (g < 1) throw InvalidArgument("group size must be >= 1");
  if (n < 2) throw InvalidArgument("grouped inner products need n >= 2");
  if (rt.size() != n || rt.dim() != d) throw DimensionMismatch("left and right sets differ in shape");

  IpGroupedResult out;
  out.groups = (n + g - 1) / g;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng grng = make_rng(seed, "cp/group");
  std::shuffle(perm.begin(), perm.end(), grng);
  out.group_of.resize(n);
  std::vector<std::vector<std::size_t>> members(out.groups);
  for (std::size_t t = 0; t < n; ++t) {
    out.group_of[perm[t]] = static_cast<std::uint32_t>(t / g);
    members[t / g].push_back(perm[t]);
  }
  Rng srng = make_rng(seed, "cp/sign");
  std::bernoulli_distribution coin(0.5);
  out.sign.resize(n);
  for (auto& s : out.sign) s = coin(srng) ? 1 : -1;

  auto scan = [&](const std::vector<std::size_t>& ga, const std::vector<std::size_t>& gb, bool same) {
    double best = -std::numeric_limits<double>::infinity();
    for (auto i : ga) {
      for (auto j : gb) {
        if (i == j) continue;
        if (same && j < i) continue;
        const double v = left.dot(i, rt, j);
        if (v > best) {
          best = v;
          out.first = i;
          out.second = j;
        }
        if (!same && right) {
          const double w = left.dot(j, rt, i);
          if (w > best) {
            best = w;
            out.first = j;
            out.second = i;
          }
        }
      }
    }
    out.ip = best;
  };

  if (out.groups == 1) {
    scan(members[0], members[0], true);
    return out;
  }

  const std::size_t m = out.groups;
  std::vector<double> ml(m * d, 0.0), mr(right ? m * d : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t grp = out.group_of[i];
    left.accumulate(i, out.sign[i], std::span<double>(ml).subspan(grp * d, d));
    if (right) right->accumulate(i, out.sign[i], std::span<double>(mr).subspan(grp * d, d));
  }
  const auto c = multiply_abt(ml, m, right ? std::span<const double>(mr) : std::span<const double>(ml),
                              m, d, backend);
  double best = -1.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      // Both orders carry the pair (a, b) in the asymmetric case.
      const double v = right ? std::max(std::abs(c[a * m + b]), std::abs(c[b * m + a]))
                             : std::abs(c[a * m + b]);
      sum_sq += v * v;
      ++count;
      if (v > best) {
        best = v;
        out.group_a = a;
        out.group_b = b;
      }
    }
  }
  out.max_entry = best;
  out.noise_rms = count > 1 ? std::sqrt((sum_sq - best * best) / static_cast<double>(count - 1)) : 0.0;
  scan(members[out.group_a], members[out.group_b], false);
  return out;
}

// ----------------------------------------------------- polynomial embeddings

namespace {

std::size_t checked_power(std::size_t d, std::size_t k, std::size_t max_dim) {
  std::size_t dim = 1;
  for (std::size_t j = 0; j < k; ++j) {
    if (dim > max_dim / d) throw ResourceLimit(fmt::format("embedding dimension {}^{} over budget", d, k));
    dim *= d;
  }
  return dim;
}

void tensor_into(std::span<const double> x, std::size_t k, double scale, std::vector<double>& out) {
  std::vector<double> cur{scale};
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> next;
    next.reserve(cur.size() * x.size());
    for (double a : cur) {
      for (double b : x) next.push_back(a * b);
    }
    cur = std::move(next);
  }
  out.insert(out.end(), cur.begin(), cur.end());
}

}  // namespace

std::vector<double> tensor_embed(std::span<const double> x, std::size_t k, std::size_t max_dim) {
  if (x.empty()) throw InvalidArgument("tensor of an empty vector");
  if (k < 1) throw InvalidArgument("tensor power must be >= 1");
  checked_power(x.size(), k, max_dim);
  std::vector<double> out;
  tensor_into(x, k, 1.0, out);
  return out;
}

std::vector<std::int64_t> chebyshev_coefficients(std::size_t k) {
  if (k > 20) throw InvalidArgument("exact Chebyshev coefficients need k <= 20");
  std::vector<std::int64_t> prev{1}, cur{0, 1};
  if (k == 0) return prev;
  for (std::size_t j = 1; j < k; ++j) {
    std::vector<std::int64_t> next(j + 2, 0);
    for (std::size_t t = 0; t < cur.size(); ++t) next[t + 1] += 2 * cur[t];
    for (std::size_t t = 0; t < prev.size(); ++t) next[t] -= prev[t];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double chebyshev_value(std::size_t k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (std::size_t j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::size_t chebyshev_embed_dim(std::size_t d, std::size_t k) {
  const auto coef = chebyshev_coefficients(k);
  std::size_t total = 0;
  for (std::size_t j = 0; j <= k; ++j) {
    if (coef[j] != 0) total += checked_power(d, j, kDefaultMaxEmbedDim);
  }
  return total;
}

std::vector<double> chebyshev_embed(std::span<const double> x, std::size_t k, EmbedSide side,
                                    std::size_t max_dim) {
  if (x.empty()) throw InvalidArgument("embedding of an empty vector");
  const auto coef = chebyshev_coefficients(k);
  std::size_t total = 0;
  for (std::size_t j = 0; j <= k; ++j) {
    if (coef[j] != 0) total += checked_power(x.size(), j, max_dim);
  }
  if (total > max_dim) throw ResourceLimit("Chebyshev embedding over budget");
  std::vector<double> out;
  out.reserve(total);
  for (std::size_t j = 0; j <= k; ++j) {
    if (coef[j] == 0) continue;
    double s = std::sqrt(std::abs(static_cast<double>(coef[j])));
    if (side == EmbedSide::Left && coef[j] < 0) s = -s;
    tensor_into(x, j, s, out);
  }
  return out;
}

// --------------------------------------------------------- CP pipeline

CpMode parse_cp_mode(std::string_view name) {
  if (name == "tensor") return CpMode::Tensor;
  if (name == "chebyshev") return CpMode::Chebyshev;
  throw InvalidArgument(fmt::format("unknown cp mode '{}'", name));
}

std::string cp_mode_name(CpMode m) { return m == CpMode::Tensor ? "tensor" : "chebyshev"; }

CpPipelineResult cp_pipeline(const Dataset& data, double eps, double r, CpMode mode,
                             const CpPipelineParams& params, std::uint64_t seed) {
  if (data.is_bits()) throw RepresentationMismatch("cp pipeline needs dense unit vectors");
  if (data.size() < 2) throw InvalidArgument("closest pair needs n >= 2");
  if (!(eps >= 0.0) || !(r > 0.0)) throw InvalidArgument("cp pipeline needs eps >= 0, r > 0");
  if (params.k < 1) throw InvalidArgument("cp pipeline needs k >= 1");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (std::abs(kernels::norm2(data[i].coords()) - 1.0) > 1e-9) {
      throw InvalidArgument("cp pipeline needs unit-norm points");
    }
  }
  const std::size_t n = data.size();
  const double limit = (1.0 + eps) * r;
  const double a_far = 1.0 - limit * limit / 2.0;
  if (mode == CpMode::Chebyshev && !(a_far > 0.0)) {
    throw InvalidArgument("Chebyshev mode needs (1 + eps) r < sqrt(2)");
  }

  std::vector<double> lv, rv;
  std::size_t dim = 0;
  std::optional<JlMap> jl;
  auto push = [&](std::vector<double> e, std::vector<double>& dst) {
    if (params.jl_dim > 0) {
      if (!jl) jl.emplace(e.size(), params.jl_dim, derive_seed(seed, "cp/jl"));
      e = jl->apply(e);
    }
    dim = e.size();
    dst.insert(dst.end(), e.begin(), e.end());
  };
  const double pre = mode == CpMode::Chebyshev ? 1.0 / std::sqrt(a_far) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(data[i].coords().begin(), data[i].coords().end());
    if (mode == CpMode::Tensor) {
      push(tensor_embed(x, params.k, params.max_dim), lv);
    } else {
      for (auto& v : x) v *= pre;
      push(chebyshev_embed(x, params.k, EmbedSide::Left, params.max_dim), lv);
      push(chebyshev_embed(x, params.k, EmbedSide::Right, params.max_dim), rv);
    }
  }
  CpPipelineResult out;
  out.embed_dim = dim;
  DenseRows left(std::move(lv), n, dim);
  std::optional<DenseRows> right;
  if (mode == CpMode::Chebyshev) right.emplace(std::move(rv), n, dim);
  out.grouped = ip_grouped(left, right ? &*right : nullptr, params.g, params.backend,
                           derive_seed(seed, "cp/grouped"));

  // Rescan the selected groups in the original metric.
  std::vector<std::size_t> ga, gb;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.grouped.groups == 1 || out.grouped.group_of[i] == out.grouped.group_a) ga.push_back(i);
    if (out.grouped.groups > 1 && out.grouped.group_of[i] == out.grouped.group_b) gb.push_back(i);
  }
  std::optional<PointPair> best;
  auto consider = [&](std::size_t i, std::size_t j) {
    const double dist = distance(data.metric(), data[i], data[j]);
    if (!best || dist < best->distance) best = PointPair{std::min(i, j), std::max(i, j), dist};
  };
  if (gb.empty()) {
    for (std::size_t s = 0; s < ga.size(); ++s) {
      for (std::size_t t = s + 1; t < ga.size(); ++t) consider(ga[s], ga[t]);
    }
  } else {
    for (auto i : ga) {
      for (auto j : gb) consider(i, j);
    }
  }
  if (best && best->distance <= limit) out.pair = best;
  return out;
}

}  // namespace annlab
