#include "annlab/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "annlab/random.hpp"

namespace annlab {

namespace {

std::vector<double> exponential_draws(std::size_t d, std::uint64_t seed) {
  Rng rng = make_rng(seed, "embed/divisor");
  std::vector<double> e(d);
  for (auto& v : e) v = -std::log(uniform_open01(rng));
  return e;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

DivisorEmbedding::DivisorEmbedding(SourceNorm source, std::vector<double> divisors,
                                   std::uint64_t seed, std::string source_name)
    : source_(source), u_(std::move(divisors)), seed_(seed), name_(std::move(source_name)) {
  if (u_.empty()) throw InvalidArgument("embedding dimension must be >= 1");
  for (double u : u_) {
    if (!(u > 0.0) || !std::isfinite(u)) throw InvariantViolation("divisors must be positive");
  }
}

std::vector<double> DivisorEmbedding::apply(std::span<const double> x) const {
  if (x.size() != u_.size()) throw DimensionMismatch("embedding dimension mismatch");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / u_[i];
  return y;
}

double DivisorEmbedding::linf_image(std::span<const double> x) const {
  if (x.size() != u_.size()) throw DimensionMismatch("embedding dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i]) / u_[i]);
  return m;
}

DivisorEmbedding embed_l1_to_linf(std::size_t d, std::uint64_t seed) {
  return DivisorEmbedding(SourceNorm::L1, exponential_draws(d, seed), seed, "l1");
}

DivisorEmbedding embed_lp_to_linf(std::size_t d, double p, std::uint64_t seed) {
  if (!(p >= 1.0)) throw InvalidArgument("lp embedding requires p >= 1");
  auto u = exponential_draws(d, seed);
  if (p != 1.0) {
    for (auto& v : u) v = std::pow(v, 1.0 / p);
  }
  return DivisorEmbedding(p == 1.0 ? SourceNorm::L1 : SourceNorm::Lp, std::move(u), seed,
                          p == 1.0 ? "l1" : fmt::format("lp:{}", p));
}

DivisorEmbedding embed_orlicz_to_linf(std::size_t d, const OrliczFunction& psi,
                                      std::uint64_t seed) {
  auto u = exponential_draws(d, seed);  // -ln V_i
  for (auto& v : u) v = psi.inverse(v);
  return DivisorEmbedding(SourceNorm::Orlicz, std::move(u), seed, "orlicz:" + psi.name());
}

double default_topk_truncation(std::size_t d, std::size_t k) {
  if (k < 1 || k > d) throw InvalidArgument("top-k requires 1 <= k <= d");
  return std::log(static_cast<double>(d) / static_cast<double>(k)) + 1.0;
}

DivisorEmbedding embed_topk_to_linf(std::size_t d, std::size_t k, double tau_trunc,
                                    std::uint64_t seed) {
  if (k < 1 || k > d) throw InvalidArgument("top-k requires 1 <= k <= d");
  if (!(tau_trunc > 0.0)) throw InvalidArgument("truncation must be > 0");
  Rng rng = make_rng(seed, "embed/divisor");
  const double mass = -std::expm1(-tau_trunc);  // 1 - e^{-tau}
  std::vector<double> u(d);
  for (auto& v : u) v = -std::log1p(-uniform_open01(rng) * mass);
  return DivisorEmbedding(SourceNorm::TopK, std::move(u), seed, fmt::format("topk:{}", k));
}

GaussianL1Embedding::GaussianL1Embedding(std::size_t d, std::size_t m, std::uint64_t seed)
    : d_(d), m_(m), seed_(seed), scale_(std::sqrt(std::numbers::pi / 2.0) / static_cast<double>(m)) {
  if (d < 1 || m < 1) throw InvalidArgument("l2 -> l1 embedding needs d, m >= 1");
  Rng rng = make_rng(seed, "embed/gauss");
  g_ = gaussian_vector(rng, d * m);
}

std::vector<double> GaussianL1Embedding::apply(std::span<const double> x) const {
  if (x.size() != d_) throw DimensionMismatch("embedding dimension mismatch");
  std::vector<double> y(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    y[i] = scale_ * kernels::dot(std::span<const double>(g_).subspan(i * d_, d_), x);
  }
  return y;
}

GaussianL1Embedding embed_l2_to_l1(std::size_t d, std::size_t m, std::uint64_t seed) {
  return GaussianL1Embedding(d, m, seed);
}

std::string DistortionReport::to_text() const {
  return fmt::format(
      "embedding={} inputs={} seeds={} q05={:.6f} q25={:.6f} median={:.6f} q75={:.6f} "
      "q95={:.6f} C1={:.6f} C2={:.6f}\n",
      embedding, inputs, seeds, q05, q25, median, q75, q95, c1, c2);
}

DistortionReport calibrate_distortion(
    std::string name, const std::function<DivisorEmbedding(std::uint64_t)>& make,
    const std::function<double(std::span<const double>)>& norm,
    const std::vector<std::vector<double>>& inputs, std::size_t seeds, std::uint64_t seed) {
  if (inputs.empty() || seeds < 1) throw InvalidArgument("calibration needs inputs and seeds");
  DistortionReport rep;
  rep.embedding = std::move(name);
  rep.inputs = inputs.size();
  rep.seeds = seeds;
  std::vector<double> all;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::vector<DivisorEmbedding> maps;
  maps.reserve(seeds);
  for (std::size_t s = 0; s < seeds; ++s) maps.push_back(make(derive_seed(seed, "embed/calibrate", s)));
  for (const auto& x : inputs) {
    const double nx = norm(x);
    if (!(nx > 0.0)) throw InvalidArgument("calibration inputs must be nonzero");
    std::vector<double> ratios;
    ratios.reserve(seeds);
    for (const auto& f : maps) ratios.push_back(f.linf_image(x) / nx);
    const double med = quantile(ratios, 0.5);
    lo = std::min(lo, med);
    hi = std::max(hi, med);
    all.insert(all.end(), ratios.begin(), ratios.end());
  }
  rep.q05 = quantile(all, 0.05);
  rep.q25 = quantile(all, 0.25);
  rep.median = quantile(all, 0.5);
  rep.q75 = quantile(all, 0.75);
  rep.q95 = quantile(all, 0.95);
  rep.c1 = 1.0 / lo;
  rep.c2 = hi;
  return rep;
}

L1ViaLinfIndex::L1ViaLinfIndex(const Dataset& data, double c_target, double r,
                               std::size_t m_structs, LinfParams linf, std::uint64_t seed)
    : data_(&data), c_target_(c_target), r_(r), scale_(std::numbers::ln2 / r) {
  if (data.metric().kind() != MetricKind::L1) throw InvalidArgument("l1 index needs an l1 dataset");
  if (m_structs < 1) throw InvalidArgument("m_structs must be >= 1");
  if (!(r > 0.0) || !(c_target >= 1.0)) throw InvalidArgument("need r > 0 and c_target >= 1");
  parts_.reserve(m_structs);
  for (std::size_t s = 0; s < m_structs; ++s) {
    auto f = embed_l1_to_linf(data.dim(), derive_seed(seed, "embed/struct", s));
    std::vector<Point> image;
    image.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto y = f.apply(data[i].coords());
      for (auto& v : y) v *= scale_;
      image.push_back(Point::dense(std::move(y)));
    }
    auto ds = std::make_unique<Dataset>(std::move(image), Metric::linf());
    auto tree = std::make_unique<LinfTree>(*ds, linf);
    parts_.push_back(Part{std::move(f), std::move(ds), std::move(tree)});
  }
}

L1ViaLinfIndex::Result L1ViaLinfIndex::query(const Point& q) const {
  data_->check_query(q);
  Result out;
  const double limit = c_target_ * r_;
  for (const auto& part : parts_) {
    auto y = part.embedding.apply(q.coords());
    for (auto& v : y) v *= scale_;
    const auto res = part.tree->query(Point::dense(std::move(y)));
    ++out.structures_probed;
    ++out.candidates_verified;
    const double dist = kernels::l1((*data_)[res.result.index].coords(), q.coords());
    if (dist <= limit && (!out.hit || dist < out.hit->distance)) {
      out.hit = Neighbor{res.result.index, dist};
    }
  }
  return out;
}

}  // namespace annlab
