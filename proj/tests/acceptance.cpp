// Acceptance gates: one PASS/FAIL line per criterion with its pinned
// tolerance and runtime budget. Exit status is nonzero if any gate fails.
// Usage: annlab_acceptance [criterion numbers...]

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "annlab/bench/cli.hpp"
#include "annlab/bench/experiments.hpp"
#include "annlab/bench/generators.hpp"
#include "annlab/cpair.hpp"
#include "annlab/ddpart.hpp"
#include "annlab/dimred.hpp"
#include "annlab/embed.hpp"
#include "annlab/families.hpp"
#include "annlab/lsh.hpp"
#include "annlab/numeric.hpp"
#include "annlab/random.hpp"

using namespace annlab;
using namespace annlab::bench;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string g(double v) { return fmt::format("{:.6g}", v); }

// ------------------------------------------------------------ 1
Outcome tradeoff_exactness() {
  Outcome o;
  const double tol = 1e-12;
  const double q0 = tradeoff_rho_q(2.0, 0.0);
  const double bal = tradeoff_rho_q(2.0, 1.0 / 7.0);
  const double s0 = tradeoff_rho_s(2.0, 0.0);
  o.require(std::abs(q0 - 7.0 / 16.0) <= tol, "rho_q(2, 0) = 7/16");
  o.require(std::abs(bal - 1.0 / 7.0) <= tol, "rho_q(2, 1/7) = 1/7");
  o.require(std::abs(s0 - 7.0 / 9.0) <= tol, "rho_s(2, 0) = 7/9");
  o.require(std::abs(1.0 + s0 - 16.0 / 9.0) <= tol, "space exponent 16/9 at rho_q = 0");
  o.require(tradeoff_rho_q(2.0, 16.0 / 9.0) == 0.0, "rho_q(2, 16/9) clamps to 0");
  bool rows = false;
  for (const auto& p : tradeoff_frontier(2.0, 50)) {
    rows |= std::abs(p.rho_s - 1.0 / 7.0) <= tol && std::abs(p.rho_q - 1.0 / 7.0) <= tol;
  }
  o.require(rows, "balanced row in frontier");
  o.note(fmt::format("rho_q(0)={:.15g} balanced={:.15g} rho_s(0)={:.15g} tol=1e-12", q0, bal, s0));
  return o;
}

// ------------------------------------------------------------ 2
Outcome spherical_endpoints() {
  Outcome o;
  double worst = 0.0;
  for (double c : {1.5, 2.0, 3.0}) {
    const double small = rho_spherical(c, 1e-9);
    const double far = rho_spherical(c, std::sqrt(2.0) / c);
    worst = std::max({worst, std::abs(small - 1.0 / (c * c)), std::abs(far - 1.0 / (2.0 * c * c - 1.0))});
  }
  o.require(worst <= 1e-12, "endpoint error <= 1e-12");
  o.note(fmt::format("max error={} tol=1e-12 (r->0 evaluated at r=1e-9)", g(worst)));
  return o;
}

// ------------------------------------------------------------ 3
Outcome bitsampling_collisions() {
  Outcome o;
  const std::size_t d = 128, trials = 10000;
  BitSamplingFamily fam(d, 8.0, 2.0);
  double worst_z = 0.0;
  for (std::size_t h : {1, 8, 32, 64, 100}) {
    Rng rng = make_rng(kSeed, "acc/bits", h);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      BitVector x(d);
      for (std::size_t i = 0; i < d; ++i) x.set(i, (rng() & 1) != 0);
      BitVector y = x;
      std::vector<std::size_t> idx(d);
      for (std::size_t i = 0; i < d; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i = 0; i < h; ++i) y.flip(idx[i]);
      const auto fn = fam.sample(derive_seed(kSeed, "acc/bits-fn", h * trials + t));
      hits += (*fn)(Point::bits(x)) == (*fn)(Point::bits(y)) ? 1 : 0;
    }
    const double p = 1.0 - static_cast<double>(h) / static_cast<double>(d);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    const double rate = static_cast<double>(hits) / static_cast<double>(trials);
    worst_z = std::max(worst_z, std::abs(rate - p) / sigma);
    o.note(fmt::format("h={} rate={} expected={}", h, g(rate), g(p)));
  }
  o.require(worst_z <= 3.0, "all rates within 3 sigma");
  o.note(fmt::format("max |z|={} bound=3", g(worst_z)));
  return o;
}

// ------------------------------------------------------------ 4
Outcome lsh_recall() {
  Outcome o;
  // A single 200-query run has standard deviation ~0.024 around the expected
  // recall 1 - (1 - p1^k)^L ~ 0.865, so the gate pools ten independent
  // 200-query runs; the hard check covers every query of every run.
  const std::size_t runs = 10;
  std::size_t hits = 0, total = 0, violations = 0;
  double lo = 1.0, hi = 0.0, first = 0.0;
  std::string params;
  for (std::size_t s = 0; s < runs; ++s) {
    auto inst = planted_hamming(10000, 128, 8, 200, derive_seed(kSeed, "acc/lsh-data", s));
    IndexSpec spec;
    spec.kind = "lsh-bitsampling";
    spec.r = 8.0;
    spec.c = 2.0;
    spec.c_rep = 2.0;
    spec.seed = derive_seed(kSeed, "acc/lsh-index", s);
    auto index = make_index(spec, inst.data);
    std::vector<TruthRow> truth;
    for (std::size_t j = 0; j < inst.truth.size(); ++j) truth.push_back({j, inst.truth[j].index, inst.truth[j].distance});
    const auto rep = run_recall(*index, inst.data, inst.queries, truth);
    violations += rep.violations;
    for (const auto& row : rep.rows) {
      if (row.returned && row.returned->distance > 16.0) ++violations;
      hits += row.correct ? 1 : 0;
    }
    total += rep.rows.size();
    lo = std::min(lo, rep.recall);
    hi = std::max(hi, rep.recall);
    if (s == 0) {
      first = rep.recall;
      params = index->build_report().substr(0, index->build_report().find('\n'));
    }
  }
  const double pooled = static_cast<double>(hits) / static_cast<double>(total);
  o.require(violations == 0, "no returned point beyond cr = 16");
  o.require(pooled >= 0.85, "pooled recall >= 0.85");
  o.note(fmt::format("pooled recall={} over {} queries; per-run min={} max={} first={}; violations={}; {}",
                     g(pooled), total, g(lo), g(hi), g(first), violations, params));
  return o;
}

// ------------------------------------------------------------ 5
Outcome rho_exponents() {
  Outcome o;
  RhoSpec spec;
  spec.seed = kSeed;
  spec.family = "bitsampling";
  const auto bs = estimate_rho(spec);
  spec.family = "pstable";
  const auto ps = estimate_rho(spec);
  spec.family = "spherical";
  spec.eta = 0.25;
  const auto sph = estimate_rho(spec);
  o.require(std::abs(bs.rho_hat - bs.declared) <= 0.15, "bit-sampling |rho_hat - declared| <= 0.15");
  o.require(sph.rho_hat < ps.rho_hat, "spherical rho_hat < p-stable rho_hat on the same sphere instances");
  o.require(sph.rho_hat < bs.rho_hat, "spherical rho_hat < bit-sampling rho_hat");
  o.note(fmt::format("bitsampling rho_hat={} declared={}; pstable rho_hat={} declared={}; spherical(eta=0.25) "
                     "rho_hat={} declared={}; spherical vs 1/7={} and 1/4={}",
                     g(bs.rho_hat), g(bs.declared), g(ps.rho_hat), g(ps.declared), g(sph.rho_hat),
                     g(sph.declared), g(1.0 / 7.0), g(0.25)));
  return o;
}

// ------------------------------------------------------------ 6
Outcome spherical_analytics() {
  Outcome o;
  double worst = 0.0;
  for (double eta : {0.25, 0.5, 1.0, 1.5, 2.0, 2.5}) {
    const double f = numeric::normal_sf(eta);
    const double closed = f * f / (2.0 * f - f * f);
    worst = std::max(worst, std::abs(spherical_collision(std::sqrt(2.0), eta) - closed));
  }
  o.require(worst <= 1e-6, "independent-events closed form to 1e-6");
  bool nonneg = true, monotone = true;
  for (double c : {1.5, 2.0}) {
    for (double r : {0.3, 0.5, std::sqrt(2.0) / c}) {
      double prev = 1e9;
      for (double eta : {1.0, 1.5, 2.0, 2.5}) {
        const double delta = spherical_delta(c, r, eta);
        nonneg &= delta >= 0.0;
        monotone &= delta < prev;
        prev = delta;
      }
    }
  }
  o.require(nonneg, "delta >= 0");
  o.require(monotone, "delta decreasing in eta");
  o.note(fmt::format("max closed-form error={} tol=1e-6; grid c in {{1.5,2}}, r in {{0.3,0.5,sqrt2/c}}, "
                     "eta in {{1,1.5,2,2.5}}",
                     g(worst)));
  return o;
}

// ------------------------------------------------------------ 7
Outcome min_stability() {
  Outcome o;
  double worst = 0.0;
  for (const char* emb : {"l1", "lp"}) {
    CalibrationSpec spec;
    spec.embedding = emb;
    spec.p = 2.0;
    spec.d = 16;
    spec.inputs = 3;
    spec.seeds = 10000;
    spec.seed = kSeed;
    const auto res = embed_calibration(spec);
    for (const auto& c : res.cdf) {
      worst = std::max(worst, std::abs(c.empirical - c.predicted));
      o.note(fmt::format("{} t={} emp={} pred={}", emb, g(c.t), g(c.empirical), g(c.predicted)));
    }
    o.require(res.cdf.size() == 3, "three t values");
  }
  o.require(worst <= 0.02, "CDF gap <= 0.02");
  o.note(fmt::format("max gap={} tol=0.02", g(worst)));
  return o;
}

// ------------------------------------------------------------ 8, 9
const LinfResult& linf_run() {
  static const LinfResult res = [] {
    LinfSpec spec;
    spec.seed = kSeed;
    return linf_experiment(spec);
  }();
  return res;
}

Outcome linf_guarantees() {
  Outcome o;
  const auto& r = linf_run();
  constexpr double kSpaceC = 1.0, kDepthC = 4.0;
  o.require(r.within_bound == r.queries, "every query within 2R+1");
  o.require(r.routing_failures == 0, "planted neighbor reachable");
  o.require(r.c_space <= kSpaceC, "stored <= 1.0 * n^{1+eps}");
  o.require(r.c_depth <= kDepthC, "max path <= 4.0 * d ln n");
  o.note(fmt::format("R={} within={}/{} max_returned={} stored={} C={} (pinned 1.0) max_path={} C'={} (pinned 4.0)",
                     g(r.R), r.within_bound, r.queries, g(r.max_returned), r.stored, g(r.c_space), r.max_path,
                     g(r.c_depth)));
  return o;
}

Outcome cut_certificates() {
  Outcome o;
  const auto& a = linf_run().audit;
  o.require(a.cut_nodes > 0, "tree has cut nodes");
  o.require(a.cut_failures == 0, "every cut recomputes to <= 1 with side masses >= alpha/d");
  o.require(a.dense_failures == 0, "dense balls sound");
  o.note(fmt::format("cut_nodes={} cut_failures={} dense_nodes={} leaves={} fallback_leaves={}", a.cut_nodes,
                     a.cut_failures, a.dense_nodes, a.leaf_nodes, a.fallback_leaves));
  return o;
}

// ------------------------------------------------------------ 10
Outcome closest_pair() {
  Outcome o;
  CpAnnSpec ann;
  ann.seed = kSeed;
  const auto a = cp_ann_experiment(ann);
  IpGroupedSpec ip;
  ip.seed = kSeed;
  const auto b = ip_grouped_experiment(ip);
  auto rate = [](const std::vector<CpRow>& rows) {
    std::size_t ok = 0;
    for (const auto& r : rows) ok += r.success ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(rows.size());
  };
  auto verified = [](const std::vector<CpRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const CpRow& r) { return r.verified; });
  };
  o.require(a.size() == 50 && rate(a) >= 0.66, "cp_via_ann success >= 0.66 over 50 instances");
  o.require(b.size() == 20 && rate(b) >= 0.8, "ip_grouped success >= 0.8 over 20 seeds");
  o.require(verified(a) && verified(b), "every returned pair verified");
  o.note(fmt::format("cp_via_ann {}/50 (n=4000 d=128 r=8 c=2); ip_grouped {}/20 (n=2048 d=32768 g=16 theta=0.05 "
                     "planted ip=0.5)",
                     static_cast<int>(std::lround(rate(a) * 50)), static_cast<int>(std::lround(rate(b) * 20))));
  return o;
}

// ------------------------------------------------------------ 11
Outcome algebraic_identities() {
  Outcome o;
  Rng rng = make_rng(kSeed, "acc/algebra");
  double tensor_err = 0.0, cheb_err = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng() % 4, k = 1 + rng() % 4;
    const auto x = random_unit_vector(rng, d), y = random_unit_vector(rng, d);
    const double ip = kernels::dot(x, y);
    const auto tx = tensor_embed(x, k), ty = tensor_embed(y, k);
    const double lhs = kernels::dot(tx, ty), rhs = std::pow(ip, static_cast<double>(k));
    tensor_err = std::max(tensor_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    const auto fx = chebyshev_embed(x, k, EmbedSide::Left), gy = chebyshev_embed(y, k, EmbedSide::Right);
    const double cl = kernels::dot(fx, gy), cr = std::cos(static_cast<double>(k) * std::acos(ip));
    cheb_err = std::max(cheb_err, std::abs(cl - cr) / std::max(1.0, std::abs(cr)));
  }
  double amp_err = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    for (double eps : {0.01, 0.04, 0.1}) {
      const double ratio = chebyshev_value(k, 1.0 + eps) / chebyshev_value(k, 1.0);
      const double ref = std::cosh(static_cast<double>(k) * std::acosh(1.0 + eps));
      amp_err = std::max(amp_err, std::abs(ratio - ref) / ref);
    }
  }
  const double t10 = chebyshev_value(10, 1.04);
  o.require(tensor_err <= 1e-9, "tensor identity");
  o.require(cheb_err <= 1e-9, "Chebyshev asymmetric identity");
  o.require(amp_err <= 1e-9, "T_k(1+eps)/T_k(1) = cosh(k arccosh(1+eps))");
  o.require(t10 > std::pow(1.04, 10), "T_10(1.04) > 1.04^10");
  o.note(fmt::format("tensor rel err={} chebyshev rel err={} amplification rel err={} (tol 1e-9); T_10(1.04)={} "
                     "1.04^10={}",
                     g(tensor_err), g(cheb_err), g(amp_err), g(t10), g(std::pow(1.04, 10))));
  return o;
}

// ------------------------------------------------------------ 12
double naive_distance(const Metric& m, const Point& a, const Point& b) {
  if (a.is_bits()) {
    std::size_t h = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) h += a.bit_vector().get(i) != b.bit_vector().get(i) ? 1 : 0;
    return static_cast<double>(h);
  }
  const auto x = a.coords(), y = b.coords();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = std::abs(x[i] - y[i]);
    switch (m.kind()) {
      case MetricKind::L1: acc += diff; break;
      case MetricKind::L2: acc += diff * diff; break;
      default: acc = std::max(acc, diff); break;
    }
  }
  return m.kind() == MetricKind::L2 ? std::sqrt(acc) : acc;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::size_t table_mismatch = 0, entries = 0;
  for (std::size_t k : {4, 8, 12}) {
    Rng rng = make_rng(kSeed, "acc/lookup", k);
    std::vector<Point> pts;
    for (int i = 0; i < 40; ++i) {
      BitVector b(96);
      for (std::size_t j = 0; j < 96; ++j) b.set(j, (rng() & 1) != 0);
      pts.push_back(Point::bits(b));
    }
    Dataset ds(pts, Metric::hamming());
    HammingLookupIndex idx(ds, 6, 0.5, k, derive_seed(kSeed, "acc/lookup-index", k));
    for (std::size_t p = 0; p < ds.size(); ++p) table_mismatch += idx.code_of(ds[p]) != idx.codes()[p] ? 1 : 0;
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << k); ++z) {
      std::size_t best = 0, bd = 1000;
      for (std::size_t p = 0; p < ds.size(); ++p) {
        const auto dz = static_cast<std::size_t>(std::popcount(z ^ idx.codes()[p]));
        if (dz < bd) bd = dz, best = p;
      }
      const auto e = idx.entry(z);
      table_mismatch += (e.index != best || e.embedded_distance != bd) ? 1 : 0;
      ++entries;
    }
  }
  std::size_t nn_mismatch = 0, cp_mismatch = 0;
  Rng rng = make_rng(kSeed, "acc/oracles");
  const std::vector<Metric> metrics{Metric::hamming(), Metric::l1(), Metric::l2(), Metric::linf()};
  for (int inst = 0; inst < 100; ++inst) {
    const Metric& m = metrics[static_cast<std::size_t>(inst) % metrics.size()];
    const std::size_t n = 2 + rng() % 60, d = 1 + rng() % 20;
    std::uniform_int_distribution<int> small(-3, 3);
    auto sample = [&] {
      if (m.kind() == MetricKind::Hamming) {
        BitVector b(d);
        for (std::size_t j = 0; j < d; ++j) b.set(j, (rng() & 1) != 0);
        return Point::bits(b);
      }
      // Small integers make ties common, exercising the tie rules.
      std::vector<double> x(d);
      for (auto& v : x) v = small(rng);
      return Point::dense(std::move(x));
    };
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(sample());
    Dataset ds(pts, m);
    for (int q = 0; q < 5; ++q) {
      const Point qp = sample();
      std::size_t best = 0;
      double bd = naive_distance(m, pts[0], qp);
      for (std::size_t i = 1; i < n; ++i) {
        const double di = naive_distance(m, pts[i], qp);
        if (di < bd) bd = di, best = i;
      }
      const auto nn = brute_force_nn(ds, qp);
      nn_mismatch += (nn.index != best || std::abs(nn.distance - bd) > 1e-12) ? 1 : 0;
    }
    std::size_t bi = 0, bj = 1;
    double bd = naive_distance(m, pts[0], pts[1]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dij = naive_distance(m, pts[i], pts[j]);
        if (dij < bd) bd = dij, bi = i, bj = j;
      }
    }
    const auto cp = brute_force_cp(ds);
    cp_mismatch += (cp.first != bi || cp.second != bj || std::abs(cp.distance - bd) > 1e-12) ? 1 : 0;
  }
  o.require(table_mismatch == 0, "lookup table equals exhaustive scan");
  o.require(nn_mismatch == 0, "brute NN equals naive re-implementation");
  o.require(cp_mismatch == 0, "brute CP equals naive re-implementation");
  o.note(fmt::format("table entries checked={} (k in {{4,8,12}}) mismatches={}; NN mismatches={}/500; CP "
                     "mismatches={}/100",
                     entries, table_mismatch, nn_mismatch, cp_mismatch));
  return o;
}

// ------------------------------------------------------------ 13
struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "annlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str() + err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::current_path() / "acceptance_scratch";
  std::filesystem::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  const std::vector<std::vector<std::string>> commands{
      {"build", "--data", p("d.data.annb"), "--index", "lsh-bitsampling", "--r", "4"},
      {"query", "--data", p("d.data.annb"), "--queries", p("d.queries.annb"), "--truth", p("d.truth.csv"),
       "--index", "lsh-bitsampling", "--r", "4"},
      {"bench", "--n", "2000", "--d", "64", "--r", "4", "--queries", "50", "--index", "lsh-bitsampling"},
      {"bench", "--bench", "sphere", "--n", "2000", "--d", "16", "--r", "0.4", "--queries", "20", "--index",
       "dd-forest", "--trees", "2"},
      {"rho", "--family", "spherical", "--n-grid", "256,512,1024,2048", "--seeds", "3"},
      {"tradeoff", "--c", "1.5,2,3"},
      {"cp", "--mode", "ann", "--n", "500", "--runs", "3"},
      {"cp", "--mode", "grouped", "--n", "256", "--d", "8192", "--g", "8", "--theta", "0.1", "--runs", "3"},
      {"cp", "--mode", "both", "--runs", "3"},
      {"embed-calibrate", "--embedding", "topk", "--seeds", "500"},
      {"linf", "--n", "2000", "--queries", "20"},
  };
  std::set<std::string> covered;
  std::size_t compared = 0, differing = 0, failed = 0;
  std::string gen_reports[2], gen_files[2];
  for (int rep = 0; rep < 2; ++rep) {
    const auto prefix = p(rep == 0 ? "d" : "e");
    const auto run = cli({"gen", "--mode", "hamming", "--n", "500", "--d", "32", "--r", "4", "--queries", "20",
                          "--prefix", prefix});
    failed += run.code != 0 ? 1 : 0;
    // The prefix appears in the report; compare with it masked out.
    std::string masked = run.out;
    for (std::size_t at; (at = masked.find(prefix)) != std::string::npos;) masked.replace(at, prefix.size(), "PREFIX");
    gen_reports[rep] = masked;
    gen_files[rep] = slurp(prefix + ".data.annb") + slurp(prefix + ".queries.annb") + slurp(prefix + ".truth.csv");
  }
  covered.insert("gen");
  ++compared;
  differing += (gen_reports[0] != gen_reports[1] || gen_files[0] != gen_files[1]) ? 1 : 0;
  for (const auto& cmd : commands) {
    const auto a = cli(cmd), b = cli(cmd);
    failed += (a.code != 0 || b.code != 0) ? 1 : 0;
    differing += a.out != b.out ? 1 : 0;
    ++compared;
    covered.insert(cmd.front());
  }
  o.require(failed == 0, "every command succeeded");
  o.require(differing == 0, "reruns byte-identical");
  o.require(covered.size() == 9, "all nine subcommands covered");
  o.note(fmt::format("{} command pairs compared, {} differing, subcommands covered={}", compared, differing,
                     covered.size()));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "trade-off calculator exactness", 1, tradeoff_exactness},
      {2, "spherical rho endpoints", 1, spherical_endpoints},
      {3, "bit-sampling collision rates", 30, bitsampling_collisions},
      {4, "LSH hard guarantee and recall", 120, lsh_recall},
      {5, "candidate-count exponent", 600, rho_exponents},
      {6, "spherical collision analytics", 60, spherical_analytics},
      {7, "min-stability CDF identities", 60, min_stability},
      {8, "l-infinity tree guarantees", 180, linf_guarantees},
      {9, "cut certificate soundness", 60, cut_certificates},
      {10, "closest pair", 300, closest_pair},
      {11, "algebraic identities", 30, algebraic_identities},
      {12, "oracle equivalence", 120, oracle_equivalence},
      {13, "determinism", 600, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) res.require(false, fmt::format("runtime {:.1f}s over budget", secs));
    failures += res.pass ? 0 : 1;
    std::cout << fmt::format("[{:2}] {} {} ({:.2f}s, budget {}s): {}\n", c.id, res.pass ? "PASS" : "FAIL", c.name,
                             secs, c.budget_s, res.detail)
              << std::flush;
  }
  std::cout << (failures == 0 ? "ALL PASS\n" : fmt::format("{} criteria FAILED\n", failures));
  return failures == 0 ? 0 : 1;
}
