#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "annlab/core.hpp"

namespace annlab::bench {

/// ANNB v1: "ANNB", u8 version = 1, u8 dtype (0 = f32 dense, 1 = bits),
/// u16 reserved = 0, u32 n, u32 d, then row-major payload. Multi-byte
/// fields are little-endian; bit rows take ceil(d / 8) bytes, MSB first.
enum class AnnbType : std::uint8_t { F32 = 0, Bits = 1 };

void write_annb(std::ostream& out, std::span<const Point> points);
/// Dense rows are read as f32 and widened; `metric` defaults to hamming for
/// bit payloads and l2 for dense ones.
Dataset read_annb(std::istream& in, std::optional<Metric> metric = std::nullopt);

/// Header line "n d metric", then one whitespace-separated row per point.
void write_text(std::ostream& out, std::span<const Point> points, const Metric& metric);
Dataset read_text(std::istream& in);

enum class FileFormat { Annb, Text };
FileFormat parse_format(std::string_view name);

void save_points(const std::string& path, std::span<const Point> points, const Metric& metric,
                 FileFormat format);
/// Detects the format from the magic bytes. For ANNB files the metric comes
/// from `metric`; a text header names its own metric unless overridden.
Dataset load_dataset(const std::string& path, std::optional<Metric> metric = std::nullopt);

/// Rounds dense coordinates to f32 so that files round-trip exactly.
Point to_f32(const Point& p);
std::vector<Point> to_f32(std::span<const Point> points);

struct TruthRow {
  std::size_t query_id = 0;
  std::size_t point_id = 0;
  double distance = 0.0;
};

/// CSV with header query_id,point_id,distance; distances printed with 17
/// significant digits.
void write_truth(std::ostream& out, const std::vector<TruthRow>& rows);
std::vector<TruthRow> read_truth(std::istream& in);
void save_truth(const std::string& path, const std::vector<TruthRow>& rows);
std::vector<TruthRow> load_truth(const std::string& path);

/// Writes to `path`, or to stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& content);

}  // namespace annlab::bench
