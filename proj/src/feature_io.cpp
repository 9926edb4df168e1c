#include "keyframe_dpc/feature_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "keyframe_dpc/error.hpp"

namespace kfdpc::features {
namespace {

constexpr std::array<char, 4> kMagic{'F', 'M', 'T', 'X'};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError(std::string("truncated ") + what);
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument(std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

FeatureMatrix read_features_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    std::size_t row_cols = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = text.find(',', pos);
      const std::string_view field = trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
      double v = 0.0;
      const char* first = field.data();
      if (!field.empty() && field.front() == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) throw FormatError("line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
      ++row_cols;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                        " columns, found " + std::to_string(row_cols));
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("feature CSV has no rows");
  return {rows, cols, std::move(values), "csv"};
}

void write_features_csv(std::ostream& out, const FeatureMatrix& features) {
  std::array<char, 64> buf{};
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out.put(',');
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), row[j]);
      out.write(buf.data(), ptr - buf.data());
    }
    out.put('\n');
  }
}

FeatureMatrix read_features_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw FormatError("missing FMTX magic");
  const std::uint32_t rows = read_u32(in, "row count");
  const std::uint32_t cols = read_u32(in, "column count");
  if (rows == 0 || cols == 0) throw FormatError("feature binary declares an empty matrix");
  const std::size_t count = std::size_t{rows} * cols;
  std::vector<double> values;
  values.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const float f = std::bit_cast<float>(read_u32(in, "feature payload"));
    if (!std::isfinite(f)) throw FormatError("non-finite value at entry " + std::to_string(k));
    values.push_back(f);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after feature payload");
  return {rows, cols, std::move(values), "binary"};
}

void write_features_binary(std::ostream& out, const FeatureMatrix& features) {
  out.write(kMagic.data(), 4);
  write_u32(out, checked_u32(features.rows(), "row count"));
  write_u32(out, checked_u32(features.cols(), "column count"));
  for (double v : features.values()) write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

FeatureMatrix import_features(const std::filesystem::path& path, FeatureFormat format) {
  auto in = open_in(path);
  return format == FeatureFormat::csv ? read_features_csv(in) : read_features_binary(in);
}

void export_features(const std::filesystem::path& path, const FeatureMatrix& features,
                     FeatureFormat format) {
  auto out = open_out(path);
  if (format == FeatureFormat::csv) {
    write_features_csv(out, features);
  } else {
    write_features_binary(out, features);
  }
  if (!out) throw Error("write failed for " + path.string());
}

FeatureFormat sniff_feature_format(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  return in.gcount() == 4 && head == kMagic ? FeatureFormat::binary : FeatureFormat::csv;
}

}  // namespace kfdpc::features
