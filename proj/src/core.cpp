#include "annlab/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "annlab/numeric.hpp"

namespace annlab {

// ---------------------------------------------------------------- BitVector

BitVector::BitVector(std::size_t dim) : dim_(dim), words_((dim + 63) / 64, 0) {}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i, true);
    } else if (bits[i] != '0') {
      throw InvalidArgument(fmt::format("non-binary character '{}'", bits[i]));
    }
  }
  return v;
}

void BitVector::set(std::size_t i, bool value) noexcept {
  const std::uint64_t mask = 1ULL << (i & 63);
  if (value) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

std::size_t BitVector::popcount() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

BitVector BitVector::operator^(const BitVector& other) const {
  if (other.dim_ != dim_) throw DimensionMismatch("xor of bit vectors");
  BitVector out(dim_);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out.words_[i] = words_[i] ^ other.words_[i];
  }
  return out;
}

std::string BitVector::to_string() const {
  std::string s(dim_, '0');
  for (std::size_t i = 0; i < dim_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

// -------------------------------------------------------------------- Point

Point Point::dense(std::vector<double> coords) {
  if (coords.empty()) throw InvalidArgument("point must have dim >= 1");
  for (double v : coords) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite coordinate");
  }
  Point p;
  p.data_ = std::move(coords);
  return p;
}

Point Point::bits(BitVector bits) {
  if (bits.dim() == 0) throw InvalidArgument("point must have dim >= 1");
  Point p;
  p.data_ = std::move(bits);
  return p;
}

std::size_t Point::dim() const noexcept {
  if (const auto* b = std::get_if<BitVector>(&data_)) return b->dim();
  return std::get<std::vector<double>>(data_).size();
}

std::span<const double> Point::coords() const {
  if (const auto* v = std::get_if<std::vector<double>>(&data_)) return *v;
  throw RepresentationMismatch("dense coordinates requested from a bit point");
}

const BitVector& Point::bit_vector() const {
  if (const auto* b = std::get_if<BitVector>(&data_)) return *b;
  throw RepresentationMismatch("bit vector requested from a dense point");
}

// ----------------------------------------------------------- OrliczFunction

OrliczFunction::OrliczFunction(std::string name,
                               std::function<double(double)> psi)
    : name_(std::move(name)), psi_(std::move(psi)) {
  if (!psi_) throw InvalidArgument("empty Orlicz function");
  if (psi_(0.0) != 0.0) throw InvalidArgument("Orlicz psi(0) must be 0");
  constexpr int kGrid = 256;
  constexpr double kMax = 32.0;
  double prev = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double t = kMax * i / kGrid;
    const double v = psi_(t);
    if (!std::isfinite(v) || v <= prev) {
      throw InvalidArgument(
          fmt::format("Orlicz psi '{}' is not increasing at t={}", name_, t));
    }
    const double a = kMax * (i - 1) / kGrid;
    const double mid = psi_(0.5 * (a + t));
    const double chord = 0.5 * (prev + v);
    if (mid > chord * (1.0 + 1e-12) + 1e-300) {
      throw InvalidArgument(
          fmt::format("Orlicz psi '{}' is not convex near t={}", name_, t));
    }
    prev = v;
  }
}

OrliczFunction OrliczFunction::power(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("power Orlicz function needs p >= 1");
  return OrliczFunction(fmt::format("pow:{}", p),
                        [p](double t) { return std::pow(t, p); });
}

OrliczFunction OrliczFunction::exp_minus_one() {
  return OrliczFunction("exp", [](double t) { return std::expm1(t); });
}

double OrliczFunction::inverse(double y, double rel_tol) const {
  if (y < 0.0) throw InvalidArgument("Orlicz inverse of a negative value");
  if (y == 0.0) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (psi_(hi) < y) {
    hi *= 2.0;
    if (++guard > 1100 || !std::isfinite(hi)) {
      throw InvalidArgument("Orlicz inverse: bracket failure");
    }
  }
  double lo = hi;
  while (lo > 0.0 && psi_(lo) > y) lo *= 0.5;
  return numeric::bisect_increasing(psi_, y, lo, hi, rel_tol);
}

// ------------------------------------------------------------------- Metric

Metric Metric::lp(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp metric requires p >= 1");
  Metric m(MetricKind::Lp);
  m.p_ = p;
  return m;
}

Metric Metric::orlicz(OrliczFunction psi) {
  Metric m(MetricKind::Orlicz);
  m.psi_ = std::make_shared<const OrliczFunction>(std::move(psi));
  return m;
}

Metric Metric::top_k(std::size_t k) {
  if (k < 1) throw InvalidArgument("top-k metric requires k >= 1");
  Metric m(MetricKind::TopK);
  m.k_ = k;
  return m;
}

const OrliczFunction& Metric::psi() const {
  if (!psi_) throw InvalidArgument("metric has no Orlicz function");
  return *psi_;
}

std::string Metric::name() const {
  switch (kind_) {
    case MetricKind::Hamming: return "hamming";
    case MetricKind::L1: return "l1";
    case MetricKind::L2: return "l2";
    case MetricKind::Lp: return fmt::format("lp:{}", p_);
    case MetricKind::Linf: return "linf";
    case MetricKind::Orlicz: return "orlicz:" + psi_->name();
    case MetricKind::TopK: return fmt::format("topk:{}", k_);
  }
  return "unknown";
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument(fmt::format("bad number '{}'", s));
  }
  return v;
}

}  // namespace

Metric Metric::parse(std::string_view text) {
  if (text == "hamming") return hamming();
  if (text == "l1") return l1();
  if (text == "l2") return l2();
  if (text == "linf") return linf();
  if (text.starts_with("lp:")) return lp(parse_double(text.substr(3)));
  if (text.starts_with("topk:")) {
    return top_k(static_cast<std::size_t>(parse_double(text.substr(5))));
  }
  if (text == "orlicz:exp") return orlicz(OrliczFunction::exp_minus_one());
  if (text.starts_with("orlicz:pow:")) {
    return orlicz(OrliczFunction::power(parse_double(text.substr(11))));
  }
  throw InvalidArgument(fmt::format("unknown metric '{}'", text));
}

// ------------------------------------------------------------------ kernels

namespace kernels {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_l2(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double l1(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double linf(std::span<const double> a, std::span<const double> b) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

std::size_t hamming(std::span<const std::uint64_t> a,
                    std::span<const std::uint64_t> b) noexcept {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  }
  return c;
}

}  // namespace kernels

// ------------------------------------------------------------------- norms

double orlicz_norm(const OrliczFunction& psi, std::span<const double> x,
                   double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("orlicz_norm: tol must be > 0");
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) return 0.0;

  // mass(lambda) = sum psi(|x_i| / lambda) is decreasing in lambda.
  auto mass = [&](double lambda) {
    double s = 0.0;
    for (double v : x) s += psi(std::abs(v) / lambda);
    return s;
  };
  double hi = max_abs * static_cast<double>(x.size());
  while (mass(hi) > 1.0) hi *= 2.0;
  double lo = hi;
  while (mass(lo) <= 1.0) {
    lo *= 0.5;
    if (lo < std::numeric_limits<double>::min()) return 0.0;
  }
  // Bisect on the increasing function -mass.
  return numeric::bisect_increasing([&](double l) { return -mass(l); }, -1.0, lo,
                                    hi, tol);
}

double top_k_norm(std::span<const double> x, std::size_t k) {
  if (k < 1 || k > x.size()) {
    throw InvalidArgument(fmt::format("top-k norm: k={} outside [1, {}]", k, x.size()));
  }
  std::vector<double> mags(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mags[i] = std::abs(x[i]);
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k - 1),
                   sorted.end(), std::greater<>());
  const double threshold = sorted[k - 1];
  std::size_t above = 0;
  for (double m : mags) above += m > threshold ? 1 : 0;
  std::size_t ties_left = k - above;
  // Summing in index order makes top-d identical to the l1 kernel.
  double s = 0.0;
  for (double m : mags) {
    if (m > threshold) {
      s += m;
    } else if (m == threshold && ties_left > 0) {
      s += m;
      --ties_left;
    }
  }
  return s;
}

double distance(const Metric& metric, const Point& x, const Point& y) {
  if (x.dim() != y.dim()) {
    throw DimensionMismatch(fmt::format("dimensions {} and {}", x.dim(), y.dim()));
  }
  if (metric.wants_bits()) {
    if (!x.is_bits() || !y.is_bits()) {
      throw RepresentationMismatch("hamming distance needs bit points");
    }
    return static_cast<double>(
        kernels::hamming(x.bit_vector().words(), y.bit_vector().words()));
  }
  if (x.is_bits() || y.is_bits()) {
    throw RepresentationMismatch(metric.name() + " distance needs dense points");
  }
  const auto a = x.coords();
  const auto b = y.coords();
  switch (metric.kind()) {
    case MetricKind::L1: return kernels::l1(a, b);
    case MetricKind::L2: return std::sqrt(kernels::squared_l2(a, b));
    case MetricKind::Linf: return kernels::linf(a, b);
    case MetricKind::Lp: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::pow(std::abs(a[i] - b[i]), metric.p());
      }
      return std::pow(s, 1.0 / metric.p());
    }
    case MetricKind::TopK: {
      std::vector<double> diff(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
      return top_k_norm(diff, metric.k());
    }
    case MetricKind::Orlicz: {
      std::vector<double> diff(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
      return orlicz_norm(metric.psi(), diff);
    }
    case MetricKind::Hamming: break;
  }
  throw InvalidArgument("unsupported metric");
}

// ------------------------------------------------------------------ Dataset

Dataset::Dataset(std::vector<Point> points, Metric metric)
    : points_(std::move(points)), metric_(std::move(metric)) {
  if (points_.empty()) throw InvalidArgument("dataset must be nonempty");
  const std::size_t d = points_.front().dim();
  const bool bits = points_.front().is_bits();
  if (bits != metric_.wants_bits()) {
    throw RepresentationMismatch(
        fmt::format("metric {} does not match point representation", metric_.name()));
  }
  if (metric_.kind() == MetricKind::TopK && metric_.k() > d) {
    throw InvalidArgument("top-k metric with k > dim");
  }
  for (const auto& p : points_) {
    if (p.dim() != d) throw DimensionMismatch("dataset points differ in dimension");
    if (p.is_bits() != bits) throw RepresentationMismatch("mixed point representations");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Point> pts;
  pts.reserve(indices.size());
  for (auto i : indices) pts.push_back(points_.at(i));
  return Dataset(std::move(pts), metric_);
}

void Dataset::check_query(const Point& q) const {
  if (q.dim() != dim()) {
    throw DimensionMismatch(fmt::format("query dim {} vs dataset dim {}", q.dim(), dim()));
  }
  if (q.is_bits() != is_bits()) throw RepresentationMismatch("query representation");
}

Neighbor brute_force_nn(const Dataset& data, const Point& q) {
  data.check_query(q);
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double dist = distance(data.metric(), data[i], q);
    if (dist < best.distance) best = {i, dist};
  }
  return best;
}

PointPair brute_force_cp(const Dataset& data) {
  if (data.size() < 2) throw InvalidArgument("closest pair needs n >= 2");
  PointPair best{0, 1, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = i + 1; j < data.size(); ++j) {
      const double dist = distance(data.metric(), data[i], data[j]);
      if (dist < best.distance) best = {i, j, dist};
    }
  }
  return best;
}

}  // namespace annlab
