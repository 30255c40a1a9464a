#include "annlab/families.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "annlab/numeric.hpp"
#include "annlab/random.hpp"

namespace annlab {

// ------------------------------------------------------------- bit sampling

std::pair<double, double> bit_sampling_sensitivity(std::size_t d, double r, double c) {
  const double dd = static_cast<double>(d);
  if (!(r > 0.0)) throw InvalidArgument("bit sampling needs r > 0");
  if (!(c * r < dd)) throw InvalidArgument(fmt::format("bit sampling needs cr < d (cr={}, d={})", c * r, d));
  return {1.0 - r / dd, 1.0 - c * r / dd};
}

namespace {

Sensitivity bit_sampling_sens(std::size_t d, double r, double c) {
  auto [p1, p2] = bit_sampling_sensitivity(d, r, c);
  return {r, c * r, p1, p2};
}

class BitSamplingFunction final : public HashFunction {
 public:
  explicit BitSamplingFunction(std::size_t coord) : coord_(coord) {}
  std::uint64_t operator()(const Point& x) const override {
    return x.bit_vector().get(coord_) ? 1 : 0;
  }

 private:
  std::size_t coord_;
};

}  // namespace

BitSamplingFamily::BitSamplingFamily(std::size_t d, double r, double c)
    : LshFamily(bit_sampling_sens(d, r, c)), d_(d) {}

std::unique_ptr<HashFunction> BitSamplingFamily::sample(std::uint64_t seed) const {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d_ - 1);
  return std::make_unique<BitSamplingFunction>(pick(rng));
}

// ----------------------------------------------------------------- p-stable

double pstable_collision(double s, double w) {
  if (!(s > 0.0)) throw InvalidArgument("pstable_collision needs s > 0");
  if (!(w > 0.0)) throw InvalidArgument("pstable_collision needs w > 0");
  // |<x-y, g>| / r has density (2/s) phi(t/s); the offset b makes the
  // collision probability (1 - t/w) for t < w.
  auto integrand = [s, w](double t) {
    return 2.0 / s * numeric::normal_pdf(t / s) * (1.0 - t / w);
  };
  const double upper = std::min(w, 40.0 * s);
  return numeric::integrate(integrand, 0.0, upper, 1e-13);
}

double pstable_best_w(double c) {
  if (!(c > 1.0)) throw InvalidArgument("pstable_best_w needs c > 1");
  auto exponent = [c](double w) {
    return std::log(1.0 / pstable_collision(1.0, w)) /
           std::log(1.0 / pstable_collision(c, w));
  };
  auto best = boost::math::tools::brent_find_minima(exponent, 0.25, 32.0, 40);
  return best.first;
}

namespace {

Sensitivity pstable_sens(double r, double c, double w) {
  if (!(w > 0.0)) throw InvalidArgument("p-stable family needs w > 0");
  return {r, c * r, pstable_collision(1.0, w), pstable_collision(c, w)};
}

class PStableFunction final : public HashFunction {
 public:
  PStableFunction(std::vector<double> g, double b, double width)
      : g_(std::move(g)), b_(b), inv_width_(1.0 / width) {}
  std::uint64_t operator()(const Point& x) const override {
    const double v = kernels::dot(x.coords(), g_) * inv_width_ + b_;
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(v)));
  }

 private:
  std::vector<double> g_;
  double b_, inv_width_;
};

}  // namespace

PStableFamily::PStableFamily(std::size_t d, double r, double c, double w)
    : LshFamily(pstable_sens(r, c, w)), d_(d), w_(w) {}

std::unique_ptr<HashFunction> PStableFamily::sample(std::uint64_t seed) const {
  Rng rng(seed);
  auto g = gaussian_vector(rng, d_);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double b = uni(rng);
  return std::make_unique<PStableFunction>(std::move(g), b, w_ * sensitivity().r);
}

// ---------------------------------------------------------------- spherical

double spherical_collision(double s, double eta) {
  if (!(s > 0.0 && s < 2.0)) throw InvalidArgument("spherical_collision needs s in (0, 2)");
  const double rho_xy = 1.0 - 0.5 * s * s;
  const double root = std::sqrt(1.0 - rho_xy * rho_xy);
  // Pr[X >= eta, Y >= eta] for standard bivariate normal with correlation
  // rho_xy, conditioning on X.
  auto joint = [&](double x) {
    return numeric::normal_pdf(x) * numeric::normal_sf((eta - rho_xy * x) / root);
  };
  const double upper = std::max(eta, 0.0) + 14.0;
  double both = 0.0;
  if (eta < 0.0) {
    both = numeric::integrate(joint, eta, 0.0) + numeric::integrate(joint, 0.0, upper);
  } else {
    both = numeric::integrate(joint, eta, upper);
  }
  const double single = numeric::normal_sf(eta);
  return both / (2.0 * single - both);
}

double rho_spherical(double c, double r) {
  if (!(r > 0.0) || !(c * r < 2.0)) throw InvalidArgument("rho_spherical needs 0 < r and cr < 2");
  return (4.0 - c * c * r * r) / ((4.0 - r * r) * c * c);
}

double spherical_delta(double c, double r, double eta) {
  const double p1 = spherical_collision(r, eta);
  const double p2 = spherical_collision(c * r, eta);
  return rho(p1, p2) - rho_spherical(c, r);
}

std::size_t spherical_default_tmax(double eta) {
  const auto base = static_cast<std::size_t>(std::ceil(40.0 * std::exp(0.5 * eta * eta)));
  const double accept = numeric::normal_sf(eta);
  if (accept >= 1.0) return base;
  // Smallest T with (1 - accept)^T <= kOverflowTarget.
  const double t = std::log(kOverflowTarget) / std::log1p(-accept);
  return std::max(base, static_cast<std::size_t>(std::ceil(t)));
}

SphericalFunction::SphericalFunction(std::size_t d, double eta, std::size_t t_max,
                                     std::uint64_t seed)
    : d_(d), eta_(eta), t_max_(t_max), seed_(seed) {
  if (t_max_ < 1) throw InvalidArgument("spherical function needs T_max >= 1");
  overflow_ = (std::uint64_t{1} << 63) | (mix64(seed ^ 0x5bd1e995ULL) >> 1);
  const std::size_t n_chunks = (t_max_ + kChunk - 1) / kChunk;
  slots_ = std::make_unique<std::atomic<const double*>[]>(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) slots_[c].store(nullptr);
}

const double* SphericalFunction::chunk(std::size_t c) const {
  if (const double* p = slots_[c].load(std::memory_order_acquire)) return p;
  std::lock_guard<std::mutex> lock(mu_);
  if (const double* p = slots_[c].load(std::memory_order_relaxed)) return p;
  Rng rng = make_rng(seed_, "spherical/chunk", c);
  auto block = std::make_unique<std::vector<double>>(gaussian_vector(rng, kChunk * d_));
  const double* data = block->data();
  owned_.push_back(std::move(block));
  slots_[c].store(data, std::memory_order_release);
  return data;
}

std::size_t SphericalFunction::generated() const noexcept {
  std::lock_guard<std::mutex> lock(mu_);
  return owned_.size() * kChunk;
}

std::uint64_t SphericalFunction::hash(std::span<const double> v) const {
  if (v.size() != d_) throw DimensionMismatch("spherical hash input dimension");
  const double norm = kernels::norm2(v);
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    throw InvalidArgument(fmt::format("spherical hash needs a unit vector, norm={}", norm));
  }
  for (std::size_t t = 0; t < t_max_; ++t) {
    const double* g = chunk(t / kChunk) + (t % kChunk) * d_;
    if (kernels::dot(v, std::span<const double>(g, d_)) >= eta_) return t + 1;
  }
  return overflow_;
}

namespace {

Sensitivity spherical_sens(double r, double c, double eta) {
  if (!(r > 0.0) || !(c * r < 2.0)) throw InvalidArgument("spherical family needs 0 < r, cr < 2");
  return {r, c * r, spherical_collision(r, eta), spherical_collision(c * r, eta)};
}

}  // namespace

SphericalFamily::SphericalFamily(std::size_t d, double r, double c, double eta,
                                 std::size_t t_max)
    : LshFamily(spherical_sens(r, c, eta)),
      d_(d),
      eta_(eta),
      t_max_(t_max == 0 ? spherical_default_tmax(eta) : t_max) {}

std::unique_ptr<HashFunction> SphericalFamily::sample(std::uint64_t seed) const {
  return std::make_unique<SphericalFunction>(d_, eta_, t_max_, seed);
}

}  // namespace annlab
