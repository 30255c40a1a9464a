#include "annlab/bench/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "annlab/bench/config.hpp"
#include "annlab/bench/experiments.hpp"
#include "annlab/bench/generators.hpp"
#include "annlab/bench/io.hpp"
#include "annlab/errors.hpp"

namespace annlab::bench {

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.10g}", v); }

template <class T>
std::vector<T> parse_list(const std::string& text, std::string_view what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError(fmt::format("bad {} list '{}'", what, text));
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(fmt::format("empty {} list", what));
  return out;
}

std::string header(const std::string& command, const Config& resolved) {
  std::string out = fmt::format("# annlab {} version={}\n", command, kVersion);
  return out + resolved.header();
}

void merge(Config& into, const Config& from, const std::string& prefix = "") {
  for (const auto& [k, v] : from.values()) into.set(prefix + k, v);
}

// ------------------------------------------------------------ gen

struct GenArgs {
  std::string mode = "hamming";
  std::size_t n = 1000, d = 64, queries = 100;
  double r = 4.0, c = 2.0, side = 100.0;
  std::size_t caps = 3;
  double cap_fraction = 0.3, cap_cos = 0.9;
  double ip = 0.5, theta = 0.05;
  std::string format = "annb";
  std::string out = "planted";
  std::uint64_t seed = 1;

  Config to_config() const {
    Config cfg;
    cfg.set("mode", mode);
    cfg.set("n", std::to_string(n));
    cfg.set("d", std::to_string(d));
    cfg.set("queries", std::to_string(queries));
    cfg.set("r", num(r));
    cfg.set("c", num(c));
    cfg.set("side", num(side));
    cfg.set("caps", std::to_string(caps));
    cfg.set("cap_fraction", num(cap_fraction));
    cfg.set("cap_cos", num(cap_cos));
    cfg.set("ip", num(ip));
    cfg.set("theta", num(theta));
    cfg.set("format", format);
    cfg.set("out", out);
    cfg.set("seed", std::to_string(seed));
    return cfg;
  }
};

std::string ext(FileFormat f) { return f == FileFormat::Annb ? ".annb" : ".txt"; }

std::size_t integral(double v, std::string_view name) {
  if (v < 0.0 || std::floor(v) != v) throw InvalidArgument(fmt::format("{} must be a non-negative integer here", name));
  return static_cast<std::size_t>(v);
}

constexpr double kRoundTol = 1e-6;

/// Bound on how far f32 rounding can move any distance between the points.
double rounding_slack(const Dataset& data, std::span<const Point> queries) {
  if (data.is_bits()) return 0.0;
  double scale = 0.0;
  for (const auto& p : data.points()) for (double v : p.coords()) scale = std::max(scale, std::abs(v));
  for (const auto& p : queries) for (double v : p.coords()) scale = std::max(scale, std::abs(v));
  return 2.5e-7 * scale * static_cast<double>(data.dim());
}

std::string gen_neighbors(const GenArgs& a, FileFormat fmt_) {
  PlantedNeighbors inst = [&] {
    if (a.mode == "hamming") return planted_hamming(a.n, a.d, integral(a.r, "r"), a.queries, a.seed);
    if (a.mode == "sphere") return planted_sphere(a.n, a.d, a.r, a.queries, 0, 0.0, 0.0, a.seed);
    if (a.mode == "linf") return planted_linf(a.n, a.d, a.side, a.r, a.queries, a.seed);
    return planted_l1(a.n, a.d, a.side, a.r, a.c, a.queries, a.seed);
  }();
  const bool unique = a.mode != "linf";
  Dataset data(to_f32(inst.data.points()), inst.data.metric());
  const auto queries = to_f32(inst.queries);
  const double limit = a.r * (1.0 + kRoundTol) + rounding_slack(data, queries);
  std::vector<TruthRow> truth;
  for (std::size_t j = 0; j < queries.size(); ++j) {
    const auto planted = inst.truth[j].index;
    const double dist = distance(data.metric(), data[planted], queries[j]);
    std::size_t within = 0;
    for (std::size_t i = 0; i < data.size(); ++i) within += distance(data.metric(), data[i], queries[j]) <= limit ? 1 : 0;
    if (dist > limit || (unique && within != 1)) {
      throw InvariantViolation(fmt::format("ground truth of query {} failed verification ({} points within r)", j, within));
    }
    truth.push_back({j, planted, dist});
  }
  save_points(a.out + ".data" + ext(fmt_), data.points(), data.metric(), fmt_);
  save_points(a.out + ".queries" + ext(fmt_), queries, data.metric(), fmt_);
  save_truth(a.out + ".truth.csv", truth);
  return fmt::format("wrote {0}.data{1} {0}.queries{1} {0}.truth.csv\nn={2} d={3} queries={4} metric={5} verified=1\n",
                     a.out, ext(fmt_), data.size(), data.dim(), queries.size(), data.metric().name());
}

void write_pair(const std::string& path, std::size_t first, std::size_t second, double value) {
  write_output(path, fmt::format("first,second,distance\n{},{},{:.17g}\n", first, second, value));
}

std::string gen_pair(const GenArgs& a, FileFormat fmt_) {
  const bool hamming = a.mode == "pair-hamming";
  PlantedPair inst = hamming ? planted_pair_hamming(a.n, a.d, integral(a.r, "r"), a.c, a.seed)
                             : planted_pair_sphere(a.n, a.d, a.r, a.c, a.seed);
  Dataset data(to_f32(inst.data.points()), inst.data.metric());
  const double slack = rounding_slack(data, {});
  const double limit = a.r * (1.0 + kRoundTol) + slack;
  const double far = a.c * a.r * (1.0 - kRoundTol) - slack;
  double planted = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = i + 1; j < data.size(); ++j) {
      const double dist = distance(data.metric(), data[i], data[j]);
      const bool is_planted = i == std::min(inst.first, inst.second) && j == std::max(inst.first, inst.second);
      if (is_planted) {
        planted = dist;
        if (dist > limit) throw InvariantViolation("planted pair failed verification");
      } else if (dist <= far) {
        throw InvariantViolation(fmt::format("background pair ({}, {}) within c*r", i, j));
      }
    }
  }
  save_points(a.out + ".data" + ext(fmt_), data.points(), data.metric(), fmt_);
  write_pair(a.out + ".pair.csv", inst.first, inst.second, planted);
  return fmt::format("wrote {0}.data{1} {0}.pair.csv\nn={2} d={3} pair={4},{5} distance={6} verified=1\n", a.out,
                     ext(fmt_), data.size(), data.dim(), inst.first, inst.second, num(planted));
}

std::string gen_caps(const GenArgs& a, FileFormat fmt_) {
  auto inst = planted_caps(a.n, a.d, a.caps, a.cap_fraction, a.cap_cos, a.seed);
  Dataset data(to_f32(inst.data.points()), inst.data.metric());
  std::vector<std::size_t> sizes(a.caps, 0);
  std::string labels = "point_id,label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int l = inst.labels[i];
    labels += fmt::format("{},{}\n", i, l);
    if (l < 0) continue;
    ++sizes[static_cast<std::size_t>(l)];
    const double cosv = kernels::dot(data[i].coords(), inst.centers[static_cast<std::size_t>(l)]);
    if (std::abs(cosv - a.cap_cos) > 1e-5) throw InvariantViolation(fmt::format("cap member {} off its cap", i));
  }
  save_points(a.out + ".data" + ext(fmt_), data.points(), data.metric(), fmt_);
  write_output(a.out + ".labels.csv", labels);
  std::string out = fmt::format("wrote {0}.data{1} {0}.labels.csv\nn={2} d={3} caps={4}", a.out, ext(fmt_),
                                data.size(), data.dim(), a.caps);
  for (auto s : sizes) out += fmt::format(" {}", s);
  return out + " verified=1\n";
}

std::string gen_sign(const GenArgs& a, FileFormat fmt_) {
  const auto flips = static_cast<std::size_t>(std::llround((1.0 - a.ip) * static_cast<double>(a.d) / 2.0));
  auto inst = planted_sign_ip(a.n, a.d, flips, a.theta, a.seed);
  double background = 0.0, planted = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t j = i + 1; j < a.n; ++j) {
      const double ip = sign_ip(inst.signs[i], inst.signs[j]);
      if (i == std::min(inst.first, inst.second) && j == std::max(inst.first, inst.second)) {
        planted = ip;
      } else {
        background = std::max(background, std::abs(ip));
      }
    }
  }
  if (planted != inst.planted_ip || background > a.theta) throw InvariantViolation("sign instance failed verification");
  std::vector<Point> pts;
  for (const auto& s : inst.signs) pts.push_back(Point::bits(s));
  save_points(a.out + ".data" + ext(fmt_), pts, Metric::hamming(), fmt_);
  write_pair(a.out + ".pair.csv", inst.first, inst.second, planted);
  return fmt::format("wrote {0}.data{1} {0}.pair.csv\nn={2} d={3} pair={4},{5} ip={6} max_background={7} verified=1\n",
                     a.out, ext(fmt_), a.n, a.d, inst.first, inst.second, num(planted), num(background));
}

std::string run_gen(const GenArgs& a) {
  if (a.n == 0 || a.d == 0) throw InvalidArgument("n and d must be positive");
  const auto f = parse_format(a.format);
  std::string body;
  if (a.mode == "hamming" || a.mode == "sphere" || a.mode == "linf" || a.mode == "l1") {
    body = gen_neighbors(a, f);
  } else if (a.mode == "pair-hamming" || a.mode == "pair-sphere") {
    body = gen_pair(a, f);
  } else if (a.mode == "caps") {
    body = gen_caps(a, f);
  } else if (a.mode == "sign-ip") {
    body = gen_sign(a, f);
  } else {
    throw InvalidArgument(fmt::format("unknown gen mode '{}'", a.mode));
  }
  return header("gen", a.to_config()) + body;
}

// ------------------------------------------------------------ index commands

void add_index_options(CLI::App* sub, IndexSpec& s) {
  sub->add_option("--index", s.kind, "brute, lsh-bitsampling, lsh-pstable, lsh-spherical, dd-forest, dd-l2, cube, hamming-lookup, linf, l1-linf");
  sub->add_option("--r", s.r, "Near radius");
  sub->add_option("--c", s.c, "Approximation factor");
  sub->add_option("--k", s.k, "Hashes per table or cube dimension (0 = default)");
  sub->add_option("--L", s.L, "Number of tables (0 = derived)");
  sub->add_option("--c-rep", s.c_rep, "Table repetition constant");
  sub->add_option("--eta", s.eta, "Spherical cap threshold");
  sub->add_option("--w", s.w, "p-stable bucket width (0 = optimal)");
  sub->add_option("--eps", s.eps, "Accuracy / l-infinity exponent");
  sub->add_option("--trees", s.trees, "Forest size");
  sub->add_option("--jl-dim", s.jl_dim, "JL target dimension (0 = none)");
  sub->add_option("--structs", s.structs, "Embedded structures for l1-linf");
  sub->add_option("--seed", s.seed, "Seed");
}

std::optional<Metric> metric_arg(const std::string& name) {
  if (name.empty()) return std::nullopt;
  return Metric::parse(name);
}

struct DataArgs {
  std::string data, queries, truth, metric;
};

struct BenchArgs {
  std::string bench = "hamming";
  std::size_t n = 10000, d = 128, queries = 200;
  double side = 100.0;
  std::uint64_t data_seed = 1;
};

std::string recall_header(const std::string& cmd, const IndexSpec& spec, const Config& extra, const AnnIndex& index) {
  Config cfg = spec.to_config();
  merge(cfg, extra);
  cfg.set("limit", num(index.limit()));
  return header(cmd, cfg);
}

std::string comment(const std::string& text) {
  std::string out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out += "# " + line + "\n";
  return out;
}

// ------------------------------------------------------------ cp

struct CpArgs {
  std::string mode = "ann";
  std::size_t n = 0, d = 0, runs = 0, g = 0, k = 3, jl_dim = 0;
  double r = 0.0, c = 2.0, eps = 1.0, theta = 0.05, ip = 0.5;
  std::string backend = "blocked";
  bool timing = false;
  std::uint64_t seed = 1;
};

std::string run_cp(const CpArgs& a) {
  Config cfg;
  cfg.set("mode", a.mode);
  cfg.set("seed", std::to_string(a.seed));
  cfg.set("timing", a.timing ? "1" : "0");
  std::vector<CpRow> rows;
  auto pick = [](std::size_t v, std::size_t dflt) { return v ? v : dflt; };
  if (a.mode == "ann") {
    CpAnnSpec s;
    s.n = pick(a.n, s.n);
    s.d = pick(a.d, s.d);
    s.r = a.r > 0.0 ? integral(a.r, "r") : s.r;
    s.c = a.c;
    s.instances = pick(a.runs, s.instances);
    s.seed = a.seed;
    s.timing = a.timing;
    cfg.set("n", std::to_string(s.n));
    cfg.set("d", std::to_string(s.d));
    cfg.set("r", std::to_string(s.r));
    cfg.set("c", num(s.c));
    cfg.set("runs", std::to_string(s.instances));
    rows = cp_ann_experiment(s);
  } else if (a.mode == "grouped") {
    IpGroupedSpec s;
    s.n = pick(a.n, s.n);
    s.d = pick(a.d, s.d);
    s.g = pick(a.g, s.g);
    s.theta = a.theta;
    s.planted_ip = a.ip;
    s.seeds = pick(a.runs, s.seeds);
    s.backend = parse_backend(a.backend);
    s.seed = a.seed;
    s.timing = a.timing;
    cfg.set("n", std::to_string(s.n));
    cfg.set("d", std::to_string(s.d));
    cfg.set("g", std::to_string(s.g));
    cfg.set("theta", num(s.theta));
    cfg.set("ip", num(s.planted_ip));
    cfg.set("runs", std::to_string(s.seeds));
    cfg.set("backend", backend_name(s.backend));
    rows = ip_grouped_experiment(s);
  } else if (a.mode == "tensor" || a.mode == "chebyshev" || a.mode == "both") {
    CpPipelineSpec s;
    s.n = pick(a.n, s.n);
    s.d = pick(a.d, s.d);
    s.k = a.k;
    s.g = pick(a.g, s.g);
    s.jl_dim = a.jl_dim;
    s.r = a.r > 0.0 ? a.r : s.r;
    s.eps = a.eps;
    s.seeds = pick(a.runs, s.seeds);
    s.seed = a.seed;
    s.timing = a.timing;
    if (a.mode != "both") s.modes = {parse_cp_mode(a.mode)};
    cfg.set("n", std::to_string(s.n));
    cfg.set("d", std::to_string(s.d));
    cfg.set("k", std::to_string(s.k));
    cfg.set("g", std::to_string(s.g));
    cfg.set("jl_dim", std::to_string(s.jl_dim));
    cfg.set("r", num(s.r));
    cfg.set("eps", num(s.eps));
    cfg.set("runs", std::to_string(s.seeds));
    rows = cp_pipeline_experiment(s);
  } else {
    throw InvalidArgument(fmt::format("unknown cp mode '{}'", a.mode));
  }
  for (const auto& r : rows) {
    if (!r.verified) {
      throw InvariantViolation(fmt::format("cp run {} returned a pair that failed verification", r.seed));
    }
  }
  return header("cp", cfg) + cp_csv(rows);
}

// ------------------------------------------------------------ argv handling

/// Inserts "--key=value" for each config entry right after the subcommand
/// name, so flags given on the command line (parsed later) win.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  std::size_t at = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[i + 1];
      at = i;
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      at = i;
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  if (at < 2) throw UsageError("--config goes after the subcommand");
  const Config cfg = Config::load(path);
  std::vector<std::string> injected;
  for (const auto& [key, v] : cfg.values()) {
    std::string k = key;
    std::replace(k.begin(), k.end(), '_', '-');
    injected.push_back(fmt::format("--{}={}", k, v));
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"annlab: approximate near neighbor toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);

  std::string out_path;
  std::string report;
  int status = kOk;

  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_path, "Report path (default stdout)"); };

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a planted dataset with verified ground truth");
  gen_cmd->add_option("--mode", gen.mode, "hamming, sphere, linf, l1, pair-hamming, pair-sphere, caps, sign-ip");
  gen_cmd->add_option("--n", gen.n, "Data points");
  gen_cmd->add_option("--d", gen.d, "Dimension");
  gen_cmd->add_option("--queries", gen.queries, "Queries");
  gen_cmd->add_option("--r", gen.r, "Planted distance");
  gen_cmd->add_option("--c", gen.c, "Separation factor");
  gen_cmd->add_option("--side", gen.side, "Box side for linf / l1");
  gen_cmd->add_option("--caps", gen.caps, "Number of caps");
  gen_cmd->add_option("--cap-fraction", gen.cap_fraction, "Fraction of points in caps");
  gen_cmd->add_option("--cap-cos", gen.cap_cos, "Cosine to the cap center");
  gen_cmd->add_option("--ip", gen.ip, "Planted inner product (sign-ip)");
  gen_cmd->add_option("--theta", gen.theta, "Background inner product bound (sign-ip)");
  gen_cmd->add_option("--format", gen.format, "annb or text");
  gen_cmd->add_option("--prefix", gen.out, "Output file prefix");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  std::string gen_report;
  gen_cmd->add_option("--report", gen_report, "Summary path (default stdout)");

  IndexSpec build_spec;
  DataArgs build_data;
  auto* build_cmd = app.add_subcommand("build", "Build an index and report its structure");
  build_cmd->add_option("--data", build_data.data, "Dataset file")->required();
  build_cmd->add_option("--metric", build_data.metric, "Metric override");
  add_index_options(build_cmd, build_spec);
  add_out(build_cmd);

  IndexSpec query_spec;
  DataArgs query_data;
  auto* query_cmd = app.add_subcommand("query", "Run queries against an index and report recall");
  query_cmd->add_option("--data", query_data.data, "Dataset file")->required();
  query_cmd->add_option("--queries", query_data.queries, "Query file")->required();
  query_cmd->add_option("--truth", query_data.truth, "Ground-truth CSV");
  query_cmd->add_option("--metric", query_data.metric, "Metric override");
  add_index_options(query_cmd, query_spec);
  add_out(query_cmd);

  IndexSpec bench_spec;
  BenchArgs bench;
  bench_spec.kind = "lsh-bitsampling";
  bench_spec.r = 8.0;
  auto* bench_cmd = app.add_subcommand("bench", "Generate a planted benchmark and measure an index on it");
  bench_cmd->add_option("--bench", bench.bench, "hamming, sphere, linf, l1");
  bench_cmd->add_option("--n", bench.n, "Data points");
  bench_cmd->add_option("--d", bench.d, "Dimension");
  bench_cmd->add_option("--queries", bench.queries, "Queries");
  bench_cmd->add_option("--side", bench.side, "Box side for linf / l1");
  bench_cmd->add_option("--data-seed", bench.data_seed, "Seed of the planted instance");
  add_index_options(bench_cmd, bench_spec);
  add_out(bench_cmd);

  RhoSpec rho;
  std::string rho_grid = "1024,2048,4096,8192,16384";
  auto* rho_cmd = app.add_subcommand("rho", "Fit the candidate-count exponent over an n grid");
  rho_cmd->add_option("--family", rho.family, "bitsampling, pstable, spherical, brute");
  rho_cmd->add_option("--n-grid", rho_grid, "Comma-separated n values");
  rho_cmd->add_option("--seeds", rho.seeds, "Instances per grid point");
  rho_cmd->add_option("--d", rho.d, "Dimension (0 = family default)");
  rho_cmd->add_option("--c", rho.c, "Approximation factor");
  rho_cmd->add_option("--r", rho.r, "Near radius (0 = family default)");
  rho_cmd->add_option("--eta", rho.eta, "Spherical cap threshold");
  rho_cmd->add_option("--c-rep", rho.c_rep, "Table repetition constant");
  rho_cmd->add_option("--seed", rho.seed, "Seed");
  add_out(rho_cmd);

  std::string trade_cs = "2";
  std::size_t trade_samples = 50;
  auto* trade_cmd = app.add_subcommand("tradeoff", "Sample the space/query exponent frontier");
  trade_cmd->add_option("--c", trade_cs, "Comma-separated approximation factors");
  trade_cmd->add_option("--samples", trade_samples, "Samples per c");
  add_out(trade_cmd);

  CpArgs cp;
  auto* cp_cmd = app.add_subcommand("cp", "Closest-pair experiments");
  cp_cmd->add_option("--mode", cp.mode, "ann, grouped, tensor, chebyshev, both");
  cp_cmd->add_option("--n", cp.n, "Points (0 = mode default)");
  cp_cmd->add_option("--d", cp.d, "Dimension (0 = mode default)");
  cp_cmd->add_option("--runs", cp.runs, "Instances or seeds (0 = mode default)");
  cp_cmd->add_option("--g", cp.g, "Groups (0 = mode default)");
  cp_cmd->add_option("--k", cp.k, "Embedding degree");
  cp_cmd->add_option("--jl-dim", cp.jl_dim, "JL target dimension (0 = none)");
  cp_cmd->add_option("--r", cp.r, "Near distance (0 = mode default)");
  cp_cmd->add_option("--c", cp.c, "Approximation factor (ann)");
  cp_cmd->add_option("--eps", cp.eps, "Accuracy (tensor, chebyshev)");
  cp_cmd->add_option("--theta", cp.theta, "Background inner product bound (grouped)");
  cp_cmd->add_option("--ip", cp.ip, "Planted inner product (grouped)");
  cp_cmd->add_option("--backend", cp.backend, "naive or blocked");
  cp_cmd->add_flag("--timing", cp.timing, "Record wall times");
  cp_cmd->add_option("--seed", cp.seed, "Seed");
  add_out(cp_cmd);

  CalibrationSpec cal;
  auto* cal_cmd = app.add_subcommand("embed-calibrate", "Measure embedding distortion quantiles");
  cal_cmd->add_option("--embedding", cal.embedding, "l1, lp, orlicz, topk");
  cal_cmd->add_option("--d", cal.d, "Dimension");
  cal_cmd->add_option("--p", cal.p, "Exponent for lp");
  cal_cmd->add_option("--psi", cal.psi, "Orlicz function: pow:<p> or exp");
  cal_cmd->add_option("--k", cal.k, "k for topk");
  cal_cmd->add_option("--tau", cal.tau, "Top-k truncation (0 = default)");
  cal_cmd->add_option("--inputs", cal.inputs, "Random inputs");
  cal_cmd->add_option("--seeds", cal.seeds, "Embedding seeds per input");
  cal_cmd->add_option("--seed", cal.seed, "Seed");
  add_out(cal_cmd);

  LinfSpec linf;
  auto* linf_cmd = app.add_subcommand("linf", "Build the l-infinity tree on the uniform benchmark and audit it");
  linf_cmd->add_option("--n", linf.n, "Data points");
  linf_cmd->add_option("--d", linf.d, "Dimension");
  linf_cmd->add_option("--queries", linf.queries, "Queries");
  linf_cmd->add_option("--side", linf.side, "Box side");
  linf_cmd->add_option("--eps", linf.eps, "Space exponent");
  linf_cmd->add_option("--seed", linf.seed, "Seed");
  add_out(linf_cmd);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << "\n";
      return kOk;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    if (*gen_cmd) {
      report = run_gen(gen);
      out_path = gen_report;
    } else if (*build_cmd) {
      Dataset data = load_dataset(build_data.data, metric_arg(build_data.metric));
      auto index = make_index(build_spec, data);
      Config extra;
      extra.set("data", build_data.data);
      extra.set("metric", data.metric().name());
      report = recall_header("build", build_spec, extra, *index) +
               fmt::format("n={} d={}\n", data.size(), data.dim()) + index->build_report();
    } else if (*query_cmd) {
      Dataset data = load_dataset(query_data.data, metric_arg(query_data.metric));
      Dataset queries = load_dataset(query_data.queries, data.metric());
      std::vector<TruthRow> truth;
      if (!query_data.truth.empty()) truth = load_truth(query_data.truth);
      for (const auto& q : queries.points()) data.check_query(q);
      auto index = make_index(query_spec, data);
      const auto rep = run_recall(*index, data, {queries.points().begin(), queries.points().end()}, truth);
      Config extra;
      extra.set("data", query_data.data);
      extra.set("queries", query_data.queries);
      extra.set("truth", query_data.truth);
      extra.set("metric", data.metric().name());
      report = recall_header("query", query_spec, extra, *index) + rep.to_csv();
      if (rep.violations) status = kInvariant;
    } else if (*bench_cmd) {
      if (bench.n == 0 || bench.d == 0 || bench.queries == 0) throw InvalidArgument("n, d and queries must be positive");
      const double r = bench_spec.r;
      PlantedNeighbors inst = [&] {
        if (bench.bench == "hamming") return planted_hamming(bench.n, bench.d, integral(r, "r"), bench.queries, bench.data_seed);
        if (bench.bench == "sphere") return planted_sphere(bench.n, bench.d, r, bench.queries, 0, 0.0, 0.0, bench.data_seed);
        if (bench.bench == "linf") return planted_linf(bench.n, bench.d, bench.side, r, bench.queries, bench.data_seed);
        if (bench.bench == "l1") return planted_l1(bench.n, bench.d, bench.side, r, bench_spec.c, bench.queries, bench.data_seed);
        throw InvalidArgument(fmt::format("unknown bench '{}'", bench.bench));
      }();
      std::vector<TruthRow> truth;
      for (std::size_t j = 0; j < inst.truth.size(); ++j) truth.push_back({j, inst.truth[j].index, inst.truth[j].distance});
      auto index = make_index(bench_spec, inst.data);
      const auto rep = run_recall(*index, inst.data, inst.queries, truth);
      Config extra;
      extra.set("bench", bench.bench);
      extra.set("n", std::to_string(bench.n));
      extra.set("d", std::to_string(bench.d));
      extra.set("queries", std::to_string(bench.queries));
      extra.set("side", num(bench.side));
      extra.set("data_seed", std::to_string(bench.data_seed));
      report = recall_header("bench", bench_spec, extra, *index) + comment(index->build_report()) + rep.to_csv();
      if (rep.violations) status = kInvariant;
    } else if (*rho_cmd) {
      rho.n_grid = parse_list<std::size_t>(rho_grid, "n-grid");
      report = header("rho", rho.to_config()) + estimate_rho(rho).to_text();
    } else if (*trade_cmd) {
      const auto cs = parse_list<double>(trade_cs, "c");
      Config cfg;
      cfg.set("c", trade_cs);
      cfg.set("samples", std::to_string(trade_samples));
      report = header("tradeoff", cfg) + tradeoff_csv(cs, trade_samples);
    } else if (*cp_cmd) {
      report = run_cp(cp);
    } else if (*cal_cmd) {
      report = header("embed-calibrate", cal.to_config()) + embed_calibration(cal).to_text();
    } else if (*linf_cmd) {
      const auto res = linf_experiment(linf);
      report = header("linf", linf.to_config()) + res.to_text();
      const auto& au = res.audit;
      if (au.cut_failures || au.dense_failures || res.within_bound != res.queries) status = kInvariant;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceLimit& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::ios_base::failure& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }

  try {
    if (out_path.empty() || out_path == "-") {
      out << report;
    } else {
      write_output(out_path, report);
    }
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return status;
}

}  // namespace annlab::bench
