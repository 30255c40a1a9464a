#include "annlab/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "annlab/random.hpp"

namespace annlab {

double rho(double p1, double p2) {
  if (!(p2 > 0.0 && p2 < p1 && p1 <= 1.0)) {
    throw InvalidArgument(fmt::format("rho needs 0 < p2 < p1 <= 1, got p1={} p2={}", p1, p2));
  }
  return std::log(1.0 / p1) / std::log(1.0 / p2);
}

LshFamily::LshFamily(Sensitivity sens) : sens_(sens) {
  if (!(sens.r > 0.0)) throw InvalidArgument("LSH family needs r > 0");
  if (!(sens.cr > sens.r)) throw InvalidArgument("LSH family needs c > 1");
  if (!(sens.p2 > 0.0 && sens.p2 < sens.p1 && sens.p1 <= 1.0)) {
    throw InvalidArgument(fmt::format(
        "LSH family needs 0 < p2 < p1 <= 1, got p1={} p2={}", sens.p1, sens.p2));
  }
}

TensoredFunction::TensoredFunction(std::vector<std::unique_ptr<HashFunction>> parts)
    : parts_(std::move(parts)) {}

std::uint64_t TensoredFunction::operator()(const Point& x) const {
  std::uint64_t key = 0x6a09e667f3bcc908ULL;
  for (const auto& h : parts_) key = mix64(key ^ (*h)(x));
  return key;
}

std::unique_ptr<TensoredFunction> sample_tensored(const LshFamily& family,
                                                  std::size_t k,
                                                  std::uint64_t seed) {
  std::vector<std::unique_ptr<HashFunction>> parts;
  parts.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    parts.push_back(family.sample(derive_seed(seed, "lsh/part", j)));
  }
  return std::make_unique<TensoredFunction>(std::move(parts));
}

namespace {

Sensitivity tensor_sensitivity(const LshFamily& base, std::size_t k) {
  Sensitivity s = base.sensitivity();
  s.p1 = std::pow(s.p1, static_cast<double>(k));
  s.p2 = std::pow(s.p2, static_cast<double>(k));
  return s;
}

}  // namespace

TensoredFamily::TensoredFamily(std::shared_ptr<const LshFamily> base, std::size_t k)
    : LshFamily(tensor_sensitivity(*base, std::max<std::size_t>(k, 1))),
      base_(std::move(base)),
      k_(k) {
  if (k_ < 1) throw InvalidArgument("tensored family needs k >= 1");
}

std::unique_ptr<HashFunction> TensoredFamily::sample(std::uint64_t seed) const {
  return sample_tensored(*base_, k_, seed);
}

std::string TensoredFamily::name() const {
  return fmt::format("{}^{}", base_->name(), k_);
}

LshParams choose_params(std::size_t n, double p1, double p2, double c_rep) {
  if (n < 2) throw InvalidArgument("choose_params needs n >= 2");
  if (!(c_rep > 0.0)) throw InvalidArgument("choose_params needs C_rep > 0");
  rho(p1, p2);
  // The small slack keeps exact powers such as n = 2^10, p2 = 1/2 at k = 10.
  const double exact_k = std::log(static_cast<double>(n)) / std::log(1.0 / p2);
  LshParams params;
  params.k = static_cast<std::size_t>(std::ceil(exact_k - 1e-9));
  const double reps = c_rep / std::pow(p1, static_cast<double>(params.k));
  params.L = static_cast<std::size_t>(std::ceil(reps - 1e-9 * reps));
  params.L = std::max<std::size_t>(params.L, 1);
  return params;
}

LshIndex::LshIndex(const Dataset& data, std::shared_ptr<const LshFamily> family,
                   std::size_t k, std::size_t L, std::uint64_t seed)
    : data_(&data), family_(std::move(family)), k_(k) {
  if (L < 1) throw InvalidArgument("LSH index needs L >= 1");
  const Metric fm = family_->metric();
  if (fm.kind() != data.metric().kind()) {
    throw InvalidArgument(fmt::format("family {} hashes {} data, dataset is {}",
                                      family_->name(), fm.name(), data.metric().name()));
  }
  if (data.size() > UINT32_MAX) throw ResourceLimit("LSH index supports at most 2^32 points");
  tables_.resize(L);
  for (std::size_t i = 0; i < L; ++i) {
    Table& t = tables_[i];
    t.g = sample_tensored(*family_, k, derive_seed(seed, "lsh/table", i));
    t.entries.reserve(data.size());
    for (std::size_t p = 0; p < data.size(); ++p) {
      t.entries.emplace_back((*t.g)(data[p]), static_cast<std::uint32_t>(p));
    }
    std::stable_sort(t.entries.begin(), t.entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  }
}

QueryResult LshIndex::query(const Point& q, bool exhaustive) const {
  data_->check_query(q);
  QueryResult result;
  QueryStats& st = result.stats;
  const double limit = cr();
  std::unordered_set<std::uint32_t> seen;
  for (const Table& t : tables_) {
    const std::uint64_t key = (*t.g)(q);
    st.hash_evals += t.g->k();
    ++st.tables_probed;
    auto range = std::equal_range(
        t.entries.begin(), t.entries.end(), std::pair<std::uint64_t, std::uint32_t>{key, 0},
        [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = range.first; it != range.second; ++it) {
      ++st.candidates_examined;
      if (result.hit && exhaustive) continue;
      if (!seen.insert(it->second).second) continue;
      ++st.distance_evals;
      const double dist = distance(data_->metric(), (*data_)[it->second], q);
      if (dist <= limit) {
        result.hit = Neighbor{it->second, dist};
        if (!exhaustive) return result;
      }
    }
  }
  return result;
}

std::vector<std::size_t> LshIndex::bucket_sizes(std::size_t i) const {
  std::vector<std::size_t> sizes;
  const auto& entries = tables_.at(i).entries;
  for (std::size_t a = 0; a < entries.size();) {
    std::size_t b = a;
    while (b < entries.size() && entries[b].first == entries[a].first) ++b;
    sizes.push_back(b - a);
    a = b;
  }
  return sizes;
}

double estimate_collision(const LshFamily& family, const Point& x, const Point& y,
                          std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("estimate_collision needs trials >= 1");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto h = family.sample(derive_seed(seed, "lsh/estimate", t));
    if ((*h)(x) == (*h)(y)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace annlab
