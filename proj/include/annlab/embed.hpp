#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annlab/core.hpp"
#include "annlab/linf_tree.hpp"

namespace annlab {

enum class SourceNorm { L1, Lp, Orlicz, TopK };

/// x -> (x_1 / u_1, ..., x_d / u_d) with random positive divisors. The map
/// is linear; its law depends on the distribution of the divisors.
class DivisorEmbedding {
 public:
  DivisorEmbedding(SourceNorm source, std::vector<double> divisors, std::uint64_t seed,
                   std::string source_name);

  std::size_t dim() const noexcept { return u_.size(); }
  std::span<const double> divisors() const noexcept { return u_; }
  SourceNorm source() const noexcept { return source_; }
  const std::string& source_name() const noexcept { return name_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::vector<double> apply(std::span<const double> x) const;
  Point apply(const Point& x) const { return Point::dense(apply(x.coords())); }
  /// ||apply(x)||_inf without materializing the image.
  double linf_image(std::span<const double> x) const;

 private:
  SourceNorm source_;
  std::vector<double> u_;
  std::uint64_t seed_;
  std::string name_;
};

/// u_i i.i.d. Exp(1): Pr[||f(x)||_inf <= t] = exp(-||x||_1 / t).
DivisorEmbedding embed_l1_to_linf(std::size_t d, std::uint64_t seed);
/// u_i = E_i^{1/p}: Pr[||f(x)||_inf <= t] = exp(-||x||_p^p / t^p). p = 1
/// reproduces embed_l1_to_linf exactly.
DivisorEmbedding embed_lp_to_linf(std::size_t d, double p, std::uint64_t seed);
/// u_i = psi^{-1}(-ln V_i): Pr[||f(x)||_inf <= t] = exp(-sum psi(|x_i| / t)).
DivisorEmbedding embed_orlicz_to_linf(std::size_t d, const OrliczFunction& psi,
                                      std::uint64_t seed);
/// u_i ~ Exp(1) conditioned on u_i <= tau_trunc.
DivisorEmbedding embed_topk_to_linf(std::size_t d, std::size_t k, double tau_trunc,
                                    std::uint64_t seed);
/// ln(d / k) + 1
double default_topk_truncation(std::size_t d, std::size_t k);

/// x -> (sqrt(pi/2) / m) G x with G an m x d standard Gaussian matrix, so
/// that E ||f(x)||_1 = ||x||_2.
class GaussianL1Embedding {
 public:
  GaussianL1Embedding(std::size_t d, std::size_t m, std::uint64_t seed);

  std::size_t source_dim() const noexcept { return d_; }
  std::size_t target_dim() const noexcept { return m_; }
  double scale() const noexcept { return scale_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::vector<double> apply(std::span<const double> x) const;
  Point apply(const Point& x) const { return Point::dense(apply(x.coords())); }

 private:
  std::size_t d_, m_;
  std::uint64_t seed_;
  double scale_;
  std::vector<double> g_;  // row-major m x d
};

GaussianL1Embedding embed_l2_to_l1(std::size_t d, std::size_t m, std::uint64_t seed);

/// Quantiles of ||f(x)||_inf / ||x|| over inputs and seeds. c1 and c2 bound
/// the per-input median ratio: median in [1 / c1, c2] for every input.
struct DistortionReport {
  std::string embedding;
  std::size_t inputs = 0, seeds = 0;
  double q05 = 0, q25 = 0, median = 0, q75 = 0, q95 = 0;
  double c1 = 0, c2 = 0;

  std::string to_text() const;
};

DistortionReport calibrate_distortion(
    std::string name, const std::function<DivisorEmbedding(std::uint64_t)>& make,
    const std::function<double(std::span<const double>)>& norm,
    const std::vector<std::vector<double>>& inputs, std::size_t seeds, std::uint64_t seed);

/// (c_target, r)-ANN over l1 through m_structs independent l1 -> l_inf
/// embeddings, each scaled by ln 2 / r and indexed by an l_inf tree.
/// Candidates are verified in l1; any returned point is within c_target * r.
class L1ViaLinfIndex {
 public:
  L1ViaLinfIndex(const Dataset& data, double c_target, double r, std::size_t m_structs,
                 LinfParams linf, std::uint64_t seed);

  struct Result {
    std::optional<Neighbor> hit;
    std::size_t structures_probed = 0;
    std::size_t candidates_verified = 0;
  };
  Result query(const Point& q) const;

  std::size_t structures() const noexcept { return parts_.size(); }
  double embed_scale() const noexcept { return scale_; }
  const LinfTree& tree(std::size_t i) const { return *parts_.at(i).tree; }

 private:
  struct Part {
    DivisorEmbedding embedding;
    std::unique_ptr<Dataset> image;
    std::unique_ptr<LinfTree> tree;
  };
  const Dataset* data_;
  double c_target_, r_, scale_;
  std::vector<Part> parts_;
};

}  // namespace annlab
