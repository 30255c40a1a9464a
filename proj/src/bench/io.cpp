#include "annlab/bench/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

namespace annlab::bench {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'N', 'N', 'B'};

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> b{};
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw DataError("truncated ANNB header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void write_annb(std::ostream& out, std::span<const Point> points) {
  if (points.empty()) throw InvalidArgument("cannot write an empty point set");
  const bool bits = points.front().is_bits();
  const std::size_t d = points.front().dim();
  if (points.size() > 0xffffffffULL || d > 0xffffffffULL) throw InvalidArgument("ANNB size overflow");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, 1);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(bits ? AnnbType::Bits : AnnbType::F32));
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(points.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  std::vector<char> row;
  for (const auto& p : points) {
    if (p.is_bits() != bits || p.dim() != d) throw DimensionMismatch("ANNB rows must be uniform");
    if (bits) {
      row.assign((d + 7) / 8, 0);
      const auto& bv = p.bit_vector();
      for (std::size_t i = 0; i < d; ++i) {
        if (bv.get(i)) row[i / 8] = static_cast<char>(row[i / 8] | (0x80 >> (i % 8)));
      }
    } else {
      row.resize(4 * d);
      const auto x = p.coords();
      for (std::size_t i = 0; i < d; ++i) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(x[i]));
        for (int b = 0; b < 4; ++b) row[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xff);
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("failed writing ANNB payload");
}

Dataset read_annb(std::istream& in, std::optional<Metric> metric) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("not an ANNB file");
  const auto version = get_le<std::uint8_t>(in);
  if (version != 1) throw DataError(fmt::format("unsupported ANNB version {}", version));
  const auto dtype = get_le<std::uint8_t>(in);
  const auto reserved = get_le<std::uint16_t>(in);
  if (reserved != 0) throw DataError("ANNB reserved field must be zero");
  const std::size_t n = get_le<std::uint32_t>(in);
  const std::size_t d = get_le<std::uint32_t>(in);
  if (n == 0 || d == 0) throw DataError("ANNB file with n = 0 or d = 0");
  if (dtype > 1) throw DataError(fmt::format("unknown ANNB dtype {}", dtype));
  const bool bits = dtype == static_cast<std::uint8_t>(AnnbType::Bits);
  std::vector<Point> pts;
  pts.reserve(n);
  std::vector<unsigned char> row(bits ? (d + 7) / 8 : 4 * d);
  for (std::size_t j = 0; j < n; ++j) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw DataError("truncated ANNB payload");
    if (bits) {
      BitVector bv(d);
      for (std::size_t i = 0; i < d; ++i) {
        if (row[i / 8] & (0x80 >> (i % 8))) bv.set(i, true);
      }
      if (d % 8 != 0 && (row.back() & (0xff >> (d % 8))) != 0) {
        throw DataError("ANNB padding bits must be zero");
      }
      pts.push_back(Point::bits(std::move(bv)));
    } else {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(row[4 * i + b]) << (8 * b);
        x[i] = std::bit_cast<float>(u);
      }
      try {
        pts.push_back(Point::dense(std::move(x)));
      } catch (const InvalidArgument& e) {
        throw DataError(fmt::format("ANNB row {}: {}", j, e.what()));
      }
    }
  }
  Metric m = metric ? *metric : (bits ? Metric::hamming() : Metric::l2());
  if (m.wants_bits() != bits) throw RepresentationMismatch("metric does not match ANNB dtype");
  return Dataset(std::move(pts), m);
}

void write_text(std::ostream& out, std::span<const Point> points, const Metric& metric) {
  if (points.empty()) throw InvalidArgument("cannot write an empty point set");
  const std::size_t d = points.front().dim();
  out << points.size() << ' ' << d << ' ' << metric.name() << '\n';
  std::string line;
  for (const auto& p : points) {
    if (p.dim() != d) throw DimensionMismatch("text rows must be uniform");
    line.clear();
    for (std::size_t i = 0; i < d; ++i) {
      if (i) line += ' ';
      line += p.is_bits() ? (p.bit_vector().get(i) ? "1" : "0") : fmt::format("{}", p.coords()[i]);
    }
    out << line << '\n';
  }
}

Dataset read_text(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty text dataset");
  std::istringstream hs(header);
  long long n = 0, d = 0;
  std::string metric_name;
  if (!(hs >> n >> d >> metric_name)) throw DataError("text header must be 'n d metric'");
  if (n <= 0 || d <= 0) throw DataError("text dataset with n or d <= 0");
  Metric metric = [&] {
    try {
      return Metric::parse(metric_name);
    } catch (const InvalidArgument& e) {
      throw DataError(e.what());
    }
  }();
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long long j = 0; j < n; ++j) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) {
      if (!(in >> v)) throw DataError(fmt::format("text dataset row {} is short", j));
    }
    if (metric.wants_bits()) {
      BitVector bv(static_cast<std::size_t>(d));
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0 && x[i] != 1.0) throw DataError("bit rows must contain 0 or 1");
        bv.set(i, x[i] == 1.0);
      }
      pts.push_back(Point::bits(std::move(bv)));
    } else {
      try {
        pts.push_back(Point::dense(std::move(x)));
      } catch (const InvalidArgument& e) {
        throw DataError(e.what());
      }
    }
  }
  std::string extra;
  if (in >> extra) throw DataError("text dataset has trailing values");
  return Dataset(std::move(pts), metric);
}

FileFormat parse_format(std::string_view name) {
  if (name == "annb") return FileFormat::Annb;
  if (name == "text") return FileFormat::Text;
  throw InvalidArgument(fmt::format("unknown format '{}'", name));
}

void save_points(const std::string& path, std::span<const Point> points, const Metric& metric,
                 FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  if (format == FileFormat::Annb) {
    write_annb(out, points);
  } else {
    write_text(out, points, metric);
  }
  if (!out) throw DataError(fmt::format("failed writing '{}'", path));
}

Dataset load_dataset(const std::string& path, std::optional<Metric> metric) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  const bool annb = in && magic == kMagic;
  in.clear();
  in.seekg(0);
  if (annb) return read_annb(in, metric);
  auto ds = read_text(in);
  if (metric && metric->name() != ds.metric().name()) {
    if (metric->wants_bits() != ds.is_bits()) throw RepresentationMismatch("metric override changes representation");
    return Dataset(std::vector<Point>(ds.points().begin(), ds.points().end()), *metric);
  }
  return ds;
}

Point to_f32(const Point& p) {
  if (p.is_bits()) return p;
  std::vector<double> x(p.coords().begin(), p.coords().end());
  for (auto& v : x) v = static_cast<float>(v);
  return Point::dense(std::move(x));
}

std::vector<Point> to_f32(std::span<const Point> points) {
  std::vector<Point> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(to_f32(p));
  return out;
}

void write_truth(std::ostream& out, const std::vector<TruthRow>& rows) {
  out << "query_id,point_id,distance\n";
  for (const auto& r : rows) out << fmt::format("{},{},{:.17g}\n", r.query_id, r.point_id, r.distance);
}

std::vector<TruthRow> read_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "query_id,point_id,distance") {
    throw DataError("truth CSV must start with 'query_id,point_id,distance'");
  }
  std::vector<TruthRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TruthRow r;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> r.query_id >> c1 >> r.point_id >> c2 >> r.distance) || c1 != ',' || c2 != ',') {
      throw DataError(fmt::format("bad truth row '{}'", line));
    }
    rows.push_back(r);
  }
  return rows;
}

void save_truth(const std::string& path, const std::vector<TruthRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  write_truth(out, rows);
}

std::vector<TruthRow> load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  return read_truth(in);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path));
  out << content;
  if (!out) throw DataError(fmt::format("failed writing '{}'", path));
}

}  // namespace annlab::bench
