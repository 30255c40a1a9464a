#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "annlab/bench/config.hpp"
#include "annlab/bench/io.hpp"
#include "annlab/core.hpp"
#include "annlab/cpair.hpp"
#include "annlab/embed.hpp"
#include "annlab/linf_tree.hpp"

namespace annlab::bench {

// ------------------------------------------------------------ ANN indexes

struct AnnAnswer {
  std::optional<Neighbor> hit;
  std::size_t candidates = 0;
  std::size_t distance_evals = 0;
  std::size_t hash_evals = 0;
  std::size_t tables = 0;
};

class AnnIndex {
 public:
  virtual ~AnnIndex() = default;
  virtual AnnAnswer query(const Point& q) const = 0;
  /// Largest distance a hit may have.
  virtual double limit() const = 0;
  virtual std::string build_report() const = 0;
};

/// Index kinds: brute, lsh-bitsampling, lsh-pstable, lsh-spherical,
/// dd-forest, dd-l2, cube, hamming-lookup, linf, l1-linf.
struct IndexSpec {
  std::string kind = "brute";
  double r = 1.0;
  double c = 2.0;
  std::size_t k = 0;  // 0 selects the kind's default
  std::size_t L = 0;
  double c_rep = 2.0;
  double eta = 0.25;
  double w = 0.0;     // 0 selects pstable_best_w(c)
  double eps = 0.5;
  std::size_t trees = 8;
  std::size_t jl_dim = 0;
  std::size_t structs = 8;
  std::uint64_t seed = 1;

  Config to_config() const;
};

std::unique_ptr<AnnIndex> make_index(const IndexSpec& spec, const Dataset& data);

// ------------------------------------------------------------ recall runs

struct RecallRow {
  std::size_t query_id = 0;
  bool hit = false;
  std::optional<Neighbor> returned;
  bool correct = false;  // returned within the index limit and truth exists
  AnnAnswer stats;
};

struct RecallReport {
  std::vector<RecallRow> rows;
  double recall = 0.0;
  std::size_t violations = 0;  // returned points beyond the limit
  double cand_median = 0, cand_q90 = 0, cand_max = 0;

  /// Per-query CSV followed by "# aggregate" comment lines.
  std::string to_csv() const;
};

/// Runs every query. `truth` rows may be empty (no recall denominator).
RecallReport run_recall(const AnnIndex& index, const Dataset& data, const std::vector<Point>& queries,
                        const std::vector<TruthRow>& truth);

// ------------------------------------------------------------ rho fits

struct RhoSpec {
  std::string family = "bitsampling";  // bitsampling | pstable | spherical | brute
  std::vector<std::size_t> n_grid{1024, 2048, 4096, 8192, 16384};
  std::size_t seeds = 9;
  std::size_t d = 0;  // 0: 128 for bitsampling, 16 otherwise
  double c = 2.0;
  double r = 0.0;     // 0: d / 16 for bitsampling, sqrt(2) / c otherwise
  double eta = 0.25;
  double c_rep = 2.0;
  std::uint64_t seed = 1;

  Config to_config() const;
};

struct RhoRow {
  std::size_t n = 0, k = 0, L = 0;
  double median_candidates = 0.0;
};

struct RhoReport {
  std::string family;
  std::vector<RhoRow> rows;
  double rho_hat = 0.0, intercept = 0.0, rms_residual = 0.0;
  double declared = 0.0;
  std::string to_text() const;
};

/// Candidate counts of exhaustive queries on shells where every point is at
/// distance c r from the query, fitted as log(median) against log n.
RhoReport estimate_rho(const RhoSpec& spec);

// ------------------------------------------------------------ trade-offs

/// Columns c,rho_s,rho_q,space_exponent.
std::string tradeoff_csv(const std::vector<double>& cs, std::size_t samples = 50);

// ------------------------------------------------------------ closest pair

struct CpRow {
  std::uint64_t seed = 0;
  std::string mode;
  std::size_t n = 0, d = 0, g = 0, k = 0;
  bool success = false;
  bool verified = true;  // any returned pair passed the original-metric check
  double wall_time = -1.0;  // < 0 prints NA
};

/// Header seed,mode,n,d,g,k,success,wall_time.
std::string cp_csv(const std::vector<CpRow>& rows);

struct CpAnnSpec {
  std::size_t n = 4000, d = 128, r = 8;
  double c = 2.0;
  std::size_t instances = 50;
  std::uint64_t seed = 1;
  bool timing = false;
};
std::vector<CpRow> cp_ann_experiment(const CpAnnSpec& spec);

struct IpGroupedSpec {
  std::size_t n = 2048, d = 32768, g = 16;
  double theta = 0.05, planted_ip = 0.5;
  std::size_t seeds = 20;
  MatmulBackend backend = MatmulBackend::Blocked;
  std::uint64_t seed = 1;
  bool timing = false;
};
/// One planted sign instance, one run per algorithm seed.
std::vector<CpRow> ip_grouped_experiment(const IpGroupedSpec& spec);

struct CpPipelineSpec {
  std::size_t n = 256, d = 32, k = 3, g = 8, jl_dim = 0;
  double r = 0.25, eps = 1.0;
  std::size_t seeds = 20;
  std::vector<CpMode> modes{CpMode::Tensor, CpMode::Chebyshev};
  std::uint64_t seed = 1;
  bool timing = false;
};
std::vector<CpRow> cp_pipeline_experiment(const CpPipelineSpec& spec);

// ------------------------------------------------------------ embeddings

struct CalibrationSpec {
  std::string embedding = "l1";  // l1 | lp | orlicz | topk
  std::size_t d = 16;
  double p = 2.0;
  std::string psi = "pow:2";     // pow:<p> | exp
  std::size_t k = 4;
  double tau = 0.0;              // 0 selects ln(d/k) + 1
  std::size_t inputs = 20, seeds = 2000;
  std::uint64_t seed = 1;

  Config to_config() const;
};

struct CdfCheck {
  double t = 0.0, empirical = 0.0, predicted = 0.0;
};

struct CalibrationResult {
  DistortionReport distortion;
  std::vector<CdfCheck> cdf;  // empty for top-k (no closed form)
  std::string to_text() const;
};

/// Distortion quantiles over random Gaussian inputs plus, where a closed
/// form exists, the CDF of ||f(x)||_inf at t = {1/2, 1, 2} * ||x|| for the
/// first input.
CalibrationResult embed_calibration(const CalibrationSpec& spec);

// ------------------------------------------------------------ l_inf tree

struct LinfSpec {
  std::size_t n = 10000, d = 16, queries = 100;
  double side = 100.0, eps = 0.5;
  std::uint64_t seed = 1;

  Config to_config() const;
};

struct LinfAudit {
  std::size_t cut_nodes = 0, cut_failures = 0;  // certificate or set algebra
  std::size_t dense_nodes = 0, dense_failures = 0;
  std::size_t leaf_nodes = 0, fallback_leaves = 0, oversized_leaves = 0;
};

/// Recomputes every cut certificate and child set from the node's points.
LinfAudit audit_linf_tree(const LinfTree& tree, const Dataset& data);

struct LinfResult {
  double R = 0.0;
  std::size_t queries = 0, within_bound = 0, routing_failures = 0;
  double max_returned = 0.0;
  std::size_t stored = 0, max_path = 0;
  double replication = 0.0, c_space = 0.0, c_depth = 0.0;
  LinfAudit audit;
  std::string build_summary;
  std::string to_text() const;
};

/// Uniform cube benchmark with queries planted at l_inf distance 1.
LinfResult linf_experiment(const LinfSpec& spec);

}  // namespace annlab::bench
