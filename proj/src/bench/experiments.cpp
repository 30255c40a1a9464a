#include "annlab/bench/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "annlab/bench/generators.hpp"
#include "annlab/ddpart.hpp"
#include "annlab/dimred.hpp"
#include "annlab/families.hpp"
#include "annlab/lsh.hpp"
#include "annlab/numeric.hpp"
#include "annlab/random.hpp"

namespace annlab::bench {

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void require_metric(const Dataset& data, MetricKind kind, std::string_view index) {
  if (data.metric().kind() != kind) {
    throw DataError(fmt::format("index '{}' cannot serve {} data", index, data.metric().name()));
  }
}

class BruteIndex final : public AnnIndex {
 public:
  BruteIndex(const Dataset& data, double limit) : data_(&data), limit_(limit) {}
  AnnAnswer query(const Point& q) const override {
    AnnAnswer a;
    const auto nn = brute_force_nn(*data_, q);
    a.candidates = a.distance_evals = data_->size();
    if (nn.distance <= limit_) a.hit = nn;
    return a;
  }
  double limit() const override { return limit_; }
  std::string build_report() const override {
    return fmt::format("index=brute n={} limit={}\n", data_->size(), num(limit_));
  }

 private:
  const Dataset* data_;
  double limit_;
};

class LshAdapter final : public AnnIndex {
 public:
  LshAdapter(const Dataset& data, std::shared_ptr<const LshFamily> family, LshParams p,
             std::uint64_t seed)
      : family_(family), params_(p), index_(data, family, p.k, p.L, seed) {}
  AnnAnswer query(const Point& q) const override {
    const auto r = index_.query(q);
    AnnAnswer a;
    a.hit = r.hit;
    a.candidates = r.stats.candidates_examined;
    a.distance_evals = r.stats.distance_evals;
    a.hash_evals = r.stats.hash_evals;
    a.tables = r.stats.tables_probed;
    return a;
  }
  double limit() const override { return index_.cr(); }
  std::string build_report() const override {
    const auto s = family_->sensitivity();
    std::string out = fmt::format("index=lsh family={} n={} k={} L={} r={} cr={} p1={} p2={} rho={}\n",
                                  family_->name(), index_.data().size(), params_.k, params_.L,
                                  num(s.r), num(s.cr), num(s.p1), num(s.p2), num(family_->rho()));
    std::vector<double> sizes;
    for (std::size_t i = 0; i < params_.L; ++i) {
      for (auto b : index_.bucket_sizes(i)) sizes.push_back(static_cast<double>(b));
    }
    out += fmt::format("buckets={} bucket_median={} bucket_max={}\n", sizes.size(),
                       num(quantile(sizes, 0.5)), num(quantile(sizes, 1.0)));
    return out;
  }

 private:
  std::shared_ptr<const LshFamily> family_;
  LshParams params_;
  LshIndex index_;
};

template <class Structure>
class DdAdapter final : public AnnIndex {
 public:
  template <class... Args>
  DdAdapter(std::string name, double limit, std::string report, Args&&... args)
      : name_(std::move(name)), limit_(limit), s_(std::forward<Args>(args)...), report_(std::move(report)) {}
  AnnAnswer query(const Point& q) const override {
    const auto r = s_.query(q);
    AnnAnswer a;
    a.hit = r.hit;
    a.candidates = r.stats.candidates;
    a.distance_evals = r.stats.candidates;
    a.tables = r.stats.nodes_visited;
    return a;
  }
  double limit() const override { return limit_; }
  std::string build_report() const override { return report_ + extra(); }
  const Structure& structure() const { return s_; }

 private:
  std::string extra() const {
    if constexpr (std::is_same_v<Structure, DdForest>) {
      std::string out = fmt::format("trees={}\n", s_.size());
      out += s_.tree(0).report().summary();
      return out;
    } else {
      return fmt::format("annuli={}\n", s_.annulus_count());
    }
  }
  std::string name_;
  double limit_;
  Structure s_;
  std::string report_;
};

/// Wraps structures without an internal distance check: hits beyond the
/// limit are dropped after verification in the original metric.
class VerifiedAdapter final : public AnnIndex {
 public:
  using Fn = std::function<std::optional<std::size_t>(const Point&)>;
  VerifiedAdapter(const Dataset& data, double limit, Fn fn, std::string report)
      : data_(&data), limit_(limit), fn_(std::move(fn)), report_(std::move(report)) {}
  AnnAnswer query(const Point& q) const override {
    AnnAnswer a;
    if (auto idx = fn_(q)) {
      a.candidates = a.distance_evals = 1;
      const double dist = distance(data_->metric(), (*data_)[*idx], q);
      if (dist <= limit_) a.hit = Neighbor{*idx, dist};
    }
    return a;
  }
  double limit() const override { return limit_; }
  std::string build_report() const override { return report_; }

 private:
  const Dataset* data_;
  double limit_;
  Fn fn_;
  std::string report_;
};

class LinfAdapter final : public AnnIndex {
 public:
  LinfAdapter(const Dataset& data, double r, LinfParams p) : data_(&data), r_(r) {
    std::vector<Point> scaled;
    scaled.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) scaled.push_back(scale(data[i]));
    scaled_ = std::make_unique<Dataset>(std::move(scaled), Metric::linf());
    tree_ = std::make_unique<LinfTree>(*scaled_, p);
  }
  AnnAnswer query(const Point& q) const override {
    const auto res = tree_->query(scale(q));
    AnnAnswer a;
    a.candidates = a.distance_evals = res.distance_evals;
    a.tables = res.path_length;
    const double dist = distance(data_->metric(), (*data_)[res.result.index], q);
    if (dist <= limit()) a.hit = Neighbor{res.result.index, dist};
    return a;
  }
  double limit() const override { return (2.0 * tree_->radius() + 1.0) * r_; }
  std::string build_report() const override {
    return fmt::format("index=linf R={} limit={}\n", num(tree_->radius()), num(limit())) +
           tree_->report().summary();
  }

 private:
  Point scale(const Point& x) const {
    std::vector<double> y(x.coords().begin(), x.coords().end());
    for (auto& v : y) v /= r_;
    return Point::dense(std::move(y));
  }
  const Dataset* data_;
  double r_;
  std::unique_ptr<Dataset> scaled_;
  std::unique_ptr<LinfTree> tree_;
};

class L1LinfAdapter final : public AnnIndex {
 public:
  L1LinfAdapter(const Dataset& data, double c, double r, std::size_t structs, LinfParams p,
                std::uint64_t seed)
      : limit_(c * r), index_(data, c, r, structs, p, seed), structs_(structs) {}
  AnnAnswer query(const Point& q) const override {
    const auto res = index_.query(q);
    AnnAnswer a;
    a.hit = res.hit;
    a.candidates = a.distance_evals = res.candidates_verified;
    a.tables = res.structures_probed;
    return a;
  }
  double limit() const override { return limit_; }
  std::string build_report() const override {
    std::string out = fmt::format("index=l1-linf structs={} scale={} limit={}\n", structs_,
                                  num(index_.embed_scale()), num(limit_));
    for (std::size_t i = 0; i < index_.structures(); ++i) {
      const auto& rep = index_.tree(i).report();
      out += fmt::format("struct {}: stored={} replication={} max_depth={}\n", i, rep.stored,
                         num(rep.replication()), rep.max_depth);
    }
    return out;
  }

 private:
  double limit_;
  L1ViaLinfIndex index_;
  std::size_t structs_;
};

}  // namespace

Config IndexSpec::to_config() const {
  Config c;
  c.set("index", kind);
  c.set("r", num(r));
  c.set("c", num(this->c));
  c.set("k", std::to_string(k));
  c.set("L", std::to_string(L));
  c.set("c_rep", num(c_rep));
  c.set("eta", num(eta));
  c.set("w", num(w));
  c.set("eps", num(eps));
  c.set("trees", std::to_string(trees));
  c.set("jl_dim", std::to_string(jl_dim));
  c.set("structs", std::to_string(structs));
  c.set("seed", std::to_string(seed));
  return c;
}

std::unique_ptr<AnnIndex> make_index(const IndexSpec& spec, const Dataset& data) {
  const std::size_t n = data.size(), d = data.dim();
  const double limit = spec.c * spec.r;
  const auto& kind = spec.kind;
  auto lsh = [&](std::shared_ptr<const LshFamily> fam) {
    LshParams p = choose_params(n, *fam, spec.c_rep);
    if (spec.k) p.k = spec.k;
    if (spec.L) p.L = spec.L;
    return std::unique_ptr<AnnIndex>(new LshAdapter(data, fam, p, spec.seed));
  };
  if (kind == "brute") return std::make_unique<BruteIndex>(data, limit);
  if (kind == "lsh-bitsampling") {
    require_metric(data, MetricKind::Hamming, kind);
    return lsh(std::make_shared<BitSamplingFamily>(d, spec.r, spec.c));
  }
  if (kind == "lsh-pstable") {
    require_metric(data, MetricKind::L2, kind);
    const double w = spec.w > 0.0 ? spec.w : pstable_best_w(spec.c);
    return lsh(std::make_shared<PStableFamily>(d, spec.r, spec.c, w));
  }
  if (kind == "lsh-spherical") {
    require_metric(data, MetricKind::L2, kind);
    return lsh(std::make_shared<SphericalFamily>(d, spec.r, spec.c, spec.eta));
  }
  if (kind == "dd-forest") {
    require_metric(data, MetricKind::L2, kind);
    const auto params = DdParams::defaults(n);
    auto report = fmt::format("index=dd-forest n={} eps={} tau={} eta={} n0={}\n", n, num(params.eps),
                              num(params.tau), num(params.eta), params.n0);
    return std::make_unique<DdAdapter<DdForest>>(kind, limit, report, data, spec.c, spec.r, params,
                                                 spec.trees, spec.seed);
  }
  if (kind == "dd-l2") {
    require_metric(data, MetricKind::L2, kind);
    const auto params = DdParams::defaults(n);
    DdL2Index::Options opt;
    opt.jl_dim = spec.jl_dim;
    opt.trees = spec.trees;
    auto report = fmt::format("index=dd-l2 n={} jl_dim={} trees={}\n", n, spec.jl_dim, spec.trees);
    return std::make_unique<DdAdapter<DdL2Index>>(kind, limit, report, data, spec.c, spec.r, params,
                                                  opt, spec.seed);
  }
  if (kind == "cube") {
    require_metric(data, MetricKind::L2, kind);
    const std::size_t k = spec.k ? spec.k : 4;
    auto cube = std::make_shared<CubeDictIndex>(data, spec.r, spec.eps, k, spec.seed);
    auto report = fmt::format("index=cube k={} side={} cubes={}\n", k, num(cube->side()), cube->cube_count());
    return std::make_unique<VerifiedAdapter>(data, limit, [cube](const Point& q) { return cube->query(q); },
                                             report);
  }
  if (kind == "hamming-lookup") {
    require_metric(data, MetricKind::Hamming, kind);
    const std::size_t k = spec.k ? spec.k : 12;
    auto look = std::make_shared<HammingLookupIndex>(data, spec.r, spec.eps, k, spec.seed);
    auto report = fmt::format("index=hamming-lookup k={} table={}\n", k, std::size_t{1} << k);
    return std::make_unique<VerifiedAdapter>(
        data, limit,
        [look](const Point& q) -> std::optional<std::size_t> {
          if (auto a = look->query(q)) return a->index;
          return std::nullopt;
        },
        report);
  }
  if (kind == "linf") {
    if (data.is_bits()) throw RepresentationMismatch("linf index needs dense data");
    LinfParams p;
    p.eps = spec.eps;
    return std::make_unique<LinfAdapter>(data, spec.r, p);
  }
  if (kind == "l1-linf") {
    require_metric(data, MetricKind::L1, kind);
    LinfParams p;
    p.eps = spec.eps;
    return std::make_unique<L1LinfAdapter>(data, spec.c, spec.r, spec.structs, p, spec.seed);
  }
  throw InvalidArgument(fmt::format("unknown index kind '{}'", kind));
}

// ------------------------------------------------------------ recall runs

RecallReport run_recall(const AnnIndex& index, const Dataset& data, const std::vector<Point>& queries,
                        const std::vector<TruthRow>& truth) {
  std::map<std::size_t, TruthRow> by_query;
  for (const auto& t : truth) {
    if (t.query_id >= queries.size()) throw DataError(fmt::format("truth names query {} of {}", t.query_id, queries.size()));
    by_query[t.query_id] = t;
  }
  RecallReport rep;
  std::vector<double> cands;
  std::size_t hits_with_truth = 0;
  for (std::size_t j = 0; j < queries.size(); ++j) {
    RecallRow row;
    row.query_id = j;
    row.stats = index.query(queries[j]);
    row.returned = row.stats.hit;
    row.hit = row.returned.has_value();
    if (row.returned) {
      const double dist = distance(data.metric(), data[row.returned->index], queries[j]);
      if (dist > index.limit() * (1.0 + 1e-12)) ++rep.violations;
      row.correct = dist <= index.limit() * (1.0 + 1e-12);
    }
    if (by_query.count(j) && row.correct) ++hits_with_truth;
    cands.push_back(static_cast<double>(row.stats.candidates));
    rep.rows.push_back(std::move(row));
  }
  rep.recall = by_query.empty() ? 0.0 : static_cast<double>(hits_with_truth) / static_cast<double>(by_query.size());
  rep.cand_median = quantile(cands, 0.5);
  rep.cand_q90 = quantile(cands, 0.9);
  rep.cand_max = quantile(cands, 1.0);
  return rep;
}

std::string RecallReport::to_csv() const {
  std::string out = "query_id,hit,returned_id,distance,candidates,distance_evals,hash_evals,tables\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.query_id, r.hit ? 1 : 0,
                       r.returned ? std::to_string(r.returned->index) : "",
                       r.returned ? num(r.returned->distance) : "", r.stats.candidates,
                       r.stats.distance_evals, r.stats.hash_evals, r.stats.tables);
  }
  out += fmt::format("# recall={} violations={} queries={}\n", num(recall), violations, rows.size());
  out += fmt::format("# candidates median={} q90={} max={}\n", num(cand_median), num(cand_q90), num(cand_max));
  return out;
}

// ------------------------------------------------------------ rho fits

Config RhoSpec::to_config() const {
  Config c;
  c.set("family", family);
  std::string grid;
  for (auto n : n_grid) grid += (grid.empty() ? "" : ",") + std::to_string(n);
  c.set("n_grid", grid);
  c.set("seeds", std::to_string(seeds));
  c.set("d", std::to_string(d));
  c.set("c", num(this->c));
  c.set("r", num(r));
  c.set("eta", num(eta));
  c.set("c_rep", num(c_rep));
  c.set("seed", std::to_string(seed));
  return c;
}

RhoReport estimate_rho(const RhoSpec& spec) {
  if (spec.n_grid.size() < 4) throw InvalidArgument("rho fit needs at least 4 grid points");
  for (std::size_t i = 1; i < spec.n_grid.size(); ++i) {
    if (spec.n_grid[i] <= spec.n_grid[i - 1]) throw InvalidArgument("rho grid must be strictly increasing");
  }
  if (spec.seeds < 1) throw InvalidArgument("rho fit needs seeds >= 1");
  const bool hamming = spec.family == "bitsampling";
  const std::size_t d = spec.d ? spec.d : (hamming ? 128 : 16);
  const double r = spec.r > 0.0 ? spec.r : (hamming ? static_cast<double>(d) / 16.0 : std::sqrt(2.0) / spec.c);
  std::shared_ptr<const LshFamily> fam;
  if (spec.family == "bitsampling") {
    fam = std::make_shared<BitSamplingFamily>(d, r, spec.c);
  } else if (spec.family == "pstable") {
    fam = std::make_shared<PStableFamily>(d, r, spec.c, pstable_best_w(spec.c));
  } else if (spec.family == "spherical") {
    fam = std::make_shared<SphericalFamily>(d, r, spec.c, spec.eta);
  } else if (spec.family != "brute") {
    throw InvalidArgument(fmt::format("unknown rho family '{}'", spec.family));
  }

  RhoReport rep;
  rep.family = spec.family;
  rep.declared = fam ? fam->rho() : 1.0;
  std::vector<double> xs, ys;
  for (auto n : spec.n_grid) {
    RhoRow row;
    row.n = n;
    std::vector<double> counts;
    for (std::size_t s = 0; s < spec.seeds; ++s) {
      const auto inst_seed = derive_seed(spec.seed, "rho/instance", n * 1000 + s);
      auto inst = hamming ? hamming_shell(n, d, static_cast<std::size_t>(std::llround(spec.c * r)), inst_seed)
                          : sphere_shell(n, d, std::min(spec.c * r, 2.0 - 1e-12), inst_seed);
      if (!fam) {
        counts.push_back(static_cast<double>(n));
        continue;
      }
      const auto p = choose_params(n, *fam, spec.c_rep);
      row.k = p.k;
      row.L = p.L;
      LshIndex index(inst.data, fam, p.k, p.L, derive_seed(spec.seed, "rho/index", n * 1000 + s));
      counts.push_back(static_cast<double>(index.query(inst.queries.front(), true).stats.candidates_examined));
    }
    row.median_candidates = quantile(counts, 0.5);
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(std::max(row.median_candidates, 1.0)));
    rep.rows.push_back(row);
  }
  const auto fit = numeric::fit_line(xs, ys);
  rep.rho_hat = fit.slope;
  rep.intercept = fit.intercept;
  rep.rms_residual = fit.rms_residual;
  return rep;
}

std::string RhoReport::to_text() const {
  std::string out = "n,k,L,median_candidates\n";
  for (const auto& r : rows) out += fmt::format("{},{},{},{}\n", r.n, r.k, r.L, num(r.median_candidates));
  out += fmt::format("# family={} rho_hat={} declared={} intercept={} rms_residual={}\n", family,
                     num(rho_hat), num(declared), num(intercept), num(rms_residual));
  return out;
}

// ------------------------------------------------------------ trade-offs

std::string tradeoff_csv(const std::vector<double>& cs, std::size_t samples) {
  std::string out = "c,rho_s,rho_q,space_exponent\n";
  for (double c : cs) {
    if (!(c > 1.0)) throw InvalidArgument("trade-off needs c > 1");
    for (const auto& p : tradeoff_frontier(c, samples)) {
      out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", p.c, p.rho_s, p.rho_q, 1.0 + p.rho_s);
    }
  }
  return out;
}

// ------------------------------------------------------------ closest pair

namespace {

template <class F>
double timed(bool enabled, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  if (!enabled) return -1.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_pair(std::size_t a, std::size_t b, std::size_t x, std::size_t y) {
  return std::min(a, b) == std::min(x, y) && std::max(a, b) == std::max(x, y);
}

}  // namespace

std::string cp_csv(const std::vector<CpRow>& rows) {
  std::string out = "seed,mode,n,d,g,k,success,wall_time\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.seed, r.mode, r.n, r.d, r.g, r.k, r.success ? 1 : 0,
                       r.wall_time < 0.0 ? std::string("NA") : fmt::format("{:.6f}", r.wall_time));
  }
  std::size_t ok = 0, bad = 0;
  for (const auto& r : rows) {
    ok += r.success ? 1 : 0;
    bad += r.verified ? 0 : 1;
  }
  out += fmt::format("# successes={} runs={} unverified={}\n", ok, rows.size(), bad);
  return out;
}

std::vector<CpRow> cp_ann_experiment(const CpAnnSpec& spec) {
  std::vector<CpRow> rows;
  const double r = static_cast<double>(spec.r);
  for (std::size_t s = 0; s < spec.instances; ++s) {
    CpRow row{s, "ann", spec.n, spec.d, 0, 0, false, true, -1.0};
    auto inst = planted_pair_hamming(spec.n, spec.d, spec.r, spec.c, derive_seed(spec.seed, "cp/instance", s));
    auto fam = std::make_shared<BitSamplingFamily>(spec.d, r, spec.c);
    CpViaAnnResult res;
    row.wall_time = timed(spec.timing, [&] {
      res = cp_via_ann(inst.data, spec.c, r, lsh_ann_builder(fam), derive_seed(spec.seed, "cp/run", s));
    });
    if (res.pair) {
      const double dist = distance(inst.data.metric(), inst.data[res.pair->first], inst.data[res.pair->second]);
      row.verified = res.pair->first != res.pair->second && dist <= spec.c * r;
      row.success = row.verified;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<CpRow> ip_grouped_experiment(const IpGroupedSpec& spec) {
  const auto flips = static_cast<std::size_t>(std::llround((1.0 - spec.planted_ip) * static_cast<double>(spec.d) / 2.0));
  const auto inst = planted_sign_ip(spec.n, spec.d, flips, spec.theta, derive_seed(spec.seed, "cp/ip-instance"));
  SignRows rows_set(inst.signs);
  std::vector<CpRow> rows;
  for (std::size_t s = 0; s < spec.seeds; ++s) {
    CpRow row{s, "grouped-" + backend_name(spec.backend), spec.n, spec.d, spec.g, 1, false, true, -1.0};
    IpGroupedResult res;
    row.wall_time = timed(spec.timing, [&] {
      res = ip_grouped(rows_set, nullptr, spec.g, spec.backend, derive_seed(spec.seed, "cp/ip-run", s));
    });
    const double ip = sign_ip(inst.signs[res.first], inst.signs[res.second]);
    row.verified = res.first != res.second && std::abs(ip - res.ip) <= 1e-12;
    row.success = row.verified && same_pair(res.first, res.second, inst.first, inst.second);
    rows.push_back(row);
  }
  return rows;
}

std::vector<CpRow> cp_pipeline_experiment(const CpPipelineSpec& spec) {
  std::vector<CpRow> rows;
  const double limit = (1.0 + spec.eps) * spec.r;
  for (std::size_t s = 0; s < spec.seeds; ++s) {
    auto inst = planted_pair_sphere(spec.n, spec.d, spec.r, 1.0 + spec.eps,
                                    derive_seed(spec.seed, "cp/pipe-instance", s));
    for (auto mode : spec.modes) {
      CpRow row{s, cp_mode_name(mode), spec.n, spec.d, spec.g, spec.k, false, true, -1.0};
      CpPipelineParams p;
      p.k = spec.k;
      p.g = spec.g;
      p.jl_dim = spec.jl_dim;
      CpPipelineResult res;
      row.wall_time = timed(spec.timing, [&] {
        res = cp_pipeline(inst.data, spec.eps, spec.r, mode, p, derive_seed(spec.seed, "cp/pipe-run", s));
      });
      if (res.pair) {
        const double dist = distance(inst.data.metric(), inst.data[res.pair->first], inst.data[res.pair->second]);
        row.verified = res.pair->first != res.pair->second && dist <= limit;
        row.success = row.verified && same_pair(res.pair->first, res.pair->second, inst.first, inst.second);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// ------------------------------------------------------------ embeddings

Config CalibrationSpec::to_config() const {
  Config c;
  c.set("embedding", embedding);
  c.set("d", std::to_string(d));
  c.set("p", num(p));
  c.set("psi", psi);
  c.set("k", std::to_string(k));
  c.set("tau", num(tau));
  c.set("inputs", std::to_string(inputs));
  c.set("seeds", std::to_string(seeds));
  c.set("seed", std::to_string(seed));
  return c;
}

CalibrationResult embed_calibration(const CalibrationSpec& spec) {
  if (spec.d < 1 || spec.inputs < 1 || spec.seeds < 1) throw InvalidArgument("calibration needs d, inputs, seeds >= 1");
  std::function<DivisorEmbedding(std::uint64_t)> make;
  std::function<double(std::span<const double>)> norm;
  std::function<double(std::span<const double>, double)> cdf;
  std::string name = spec.embedding;
  const std::size_t d = spec.d;
  if (spec.embedding == "l1") {
    make = [d](std::uint64_t s) { return embed_l1_to_linf(d, s); };
    norm = [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return s;
    };
    cdf = [norm](std::span<const double> x, double t) { return std::exp(-norm(x) / t); };
  } else if (spec.embedding == "lp") {
    const double p = spec.p;
    make = [d, p](std::uint64_t s) { return embed_lp_to_linf(d, p, s); };
    norm = [p](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += std::pow(std::abs(v), p);
      return std::pow(s, 1.0 / p);
    };
    cdf = [norm, p](std::span<const double> x, double t) { return std::exp(-std::pow(norm(x) / t, p)); };
    name = fmt::format("lp:{}", num(p));
  } else if (spec.embedding == "orlicz") {
    auto psi = std::make_shared<OrliczFunction>(Metric::parse("orlicz:" + spec.psi).psi());
    make = [d, psi](std::uint64_t s) { return embed_orlicz_to_linf(d, *psi, s); };
    norm = [psi](std::span<const double> x) { return orlicz_norm(*psi, x); };
    cdf = [psi](std::span<const double> x, double t) {
      double s = 0.0;
      for (double v : x) s += (*psi)(std::abs(v) / t);
      return std::exp(-s);
    };
    name = "orlicz:" + spec.psi;
  } else if (spec.embedding == "topk") {
    const std::size_t k = spec.k;
    const double tau = spec.tau > 0.0 ? spec.tau : default_topk_truncation(d, k);
    make = [d, k, tau](std::uint64_t s) { return embed_topk_to_linf(d, k, tau, s); };
    norm = [k](std::span<const double> x) { return top_k_norm(x, k); };
    name = fmt::format("topk:{}:tau={}", k, num(tau));
  } else {
    throw InvalidArgument(fmt::format("unknown embedding '{}'", spec.embedding));
  }

  Rng rng = make_rng(spec.seed, "embed/inputs");
  std::vector<std::vector<double>> inputs;
  for (std::size_t i = 0; i < spec.inputs; ++i) inputs.push_back(gaussian_vector(rng, d));

  CalibrationResult out;
  out.distortion = calibrate_distortion(name, make, norm, inputs, spec.seeds, spec.seed);
  if (cdf) {
    const auto& x = inputs.front();
    const double nx = norm(x);
    std::vector<double> images;
    for (std::size_t s = 0; s < spec.seeds; ++s) images.push_back(make(derive_seed(spec.seed, "embed/cdf", s)).linf_image(x));
    for (double f : {0.5, 1.0, 2.0}) {
      const double t = f * nx;
      const auto below = std::count_if(images.begin(), images.end(), [t](double v) { return v <= t; });
      out.cdf.push_back({t, static_cast<double>(below) / static_cast<double>(images.size()), cdf(x, t)});
    }
  }
  return out;
}

std::string CalibrationResult::to_text() const {
  std::string out = distortion.to_text();
  for (const auto& c : cdf) {
    out += fmt::format("cdf t={} empirical={} predicted={} gap={}\n", num(c.t), num(c.empirical),
                       num(c.predicted), num(std::abs(c.empirical - c.predicted)));
  }
  return out;
}

// ------------------------------------------------------------ l_inf tree

Config LinfSpec::to_config() const {
  Config c;
  c.set("n", std::to_string(n));
  c.set("d", std::to_string(d));
  c.set("queries", std::to_string(queries));
  c.set("side", num(side));
  c.set("eps", num(eps));
  c.set("seed", std::to_string(seed));
  return c;
}

LinfAudit audit_linf_tree(const LinfTree& tree, const Dataset& data) {
  LinfAudit a;
  const auto& params = tree.params();
  std::vector<const LinfNode*> stack{&tree.root()};
  while (!stack.empty()) {
    const LinfNode* node = stack.back();
    stack.pop_back();
    if (const auto* ball = std::get_if<LinfDenseBall>(&node->body)) {
      ++a.dense_nodes;
      bool ok = true;
      const auto x = data[ball->center].coords();
      std::vector<std::size_t> joined = ball->members;
      for (auto j : ball->members) ok = ok && kernels::linf(x, data[j].coords()) <= ball->R;
      if (ball->remainder) {
        joined.insert(joined.end(), ball->remainder->points.begin(), ball->remainder->points.end());
        stack.push_back(ball->remainder.get());
      }
      auto parent = node->points;
      std::sort(joined.begin(), joined.end());
      std::sort(parent.begin(), parent.end());
      ok = ok && joined == parent;
      a.dense_failures += ok ? 0 : 1;
    } else if (const auto* cut = std::get_if<LinfCut>(&node->body)) {
      ++a.cut_nodes;
      const auto& c = cut->cut;
      std::vector<std::size_t> left, right;
      std::size_t na = 0, nb = 0, nc = 0;
      for (auto j : node->points) {
        const double v = data[j].coords()[c.coord];
        if (v <= c.threshold + 1.0) left.push_back(j);
        if (v >= c.threshold - 1.0) right.push_back(j);
        if (v < c.threshold - 1.0) ++na;
        else if (v > c.threshold + 1.0) ++nc;
        else ++nb;
      }
      const auto re = CutCertificate::evaluate(na, nb, nc, params.eps);
      const bool ok = left == cut->left->points && right == cut->right->points && na == c.cert.a &&
                      nb == c.cert.b && nc == c.cert.c && re.value <= 1.0 &&
                      std::abs(re.value - c.cert.value) <= 1e-12 && re.valid(data.dim(), params.alpha_side);
      a.cut_failures += ok ? 0 : 1;
      stack.push_back(cut->left.get());
      stack.push_back(cut->right.get());
    } else {
      const auto& leaf = std::get<LinfLeaf>(node->body);
      ++a.leaf_nodes;
      a.fallback_leaves += leaf.fallback ? 1 : 0;
      a.oversized_leaves += (!leaf.fallback && leaf.points.size() > params.n0) ? 1 : 0;
    }
  }
  return a;
}

LinfResult linf_experiment(const LinfSpec& spec) {
  auto inst = planted_linf(spec.n, spec.d, spec.side, 1.0, spec.queries, spec.seed);
  LinfParams p;
  p.eps = spec.eps;
  LinfTree tree(inst.data, p);
  LinfResult out;
  out.R = tree.radius();
  out.queries = inst.queries.size();
  for (std::size_t j = 0; j < inst.queries.size(); ++j) {
    const auto res = tree.query(inst.queries[j]);
    const double dist = kernels::linf(inst.data[res.result.index].coords(), inst.queries[j].coords());
    out.max_returned = std::max(out.max_returned, dist);
    out.within_bound += dist <= 2.0 * out.R + 1.0 ? 1 : 0;
    out.routing_failures += tree.routes_to(inst.queries[j], inst.truth[j].index) ? 0 : 1;
    out.max_path = std::max(out.max_path, res.path_length);
  }
  const auto& rep = tree.report();
  out.stored = rep.stored;
  out.replication = rep.replication();
  out.c_space = static_cast<double>(rep.stored) / std::pow(static_cast<double>(spec.n), 1.0 + spec.eps);
  out.c_depth = static_cast<double>(out.max_path) / (static_cast<double>(spec.d) * std::log(static_cast<double>(spec.n)));
  out.audit = audit_linf_tree(tree, inst.data);
  out.build_summary = rep.summary();
  return out;
}

std::string LinfResult::to_text() const {
  std::string out = fmt::format(
      "R={} bound={} queries={} within_bound={} max_returned={} routing_failures={}\n"
      "stored={} replication={} C_space={} max_path={} C_depth={}\n"
      "cut_nodes={} cut_failures={} dense_nodes={} dense_failures={} leaves={} fallback_leaves={} "
      "oversized_leaves={}\n",
      num(R), num(2.0 * R + 1.0), queries, within_bound, num(max_returned), routing_failures, stored,
      num(replication), num(c_space), max_path, num(c_depth), audit.cut_nodes, audit.cut_failures,
      audit.dense_nodes, audit.dense_failures, audit.leaf_nodes, audit.fallback_leaves,
      audit.oversized_leaves);
  return out + build_summary;
}

}  // namespace annlab::bench
