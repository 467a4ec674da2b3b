#include "owcluster/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace owcluster {
namespace {

template <typename T>
T read_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(static_cast<T>(p[b]) << (8 * b));
  return v;
}

template <typename T>
void write_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

EmbeddingData read_binary(const std::string& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "'" + path + "' is not an OWCL file");
  }
  if (bytes.size() < kEmbeddingHeaderBytes) {
    throw Error(ErrorCode::TruncatedFile, "header needs 24 bytes, file has " + std::to_string(bytes.size()));
  }
  const auto version = read_le<std::uint16_t>(bytes.data() + 4);
  if (version != kEmbeddingVersion) {
    throw Error(ErrorCode::VersionUnsupported, "version " + std::to_string(version));
  }
  const auto flags = read_le<std::uint16_t>(bytes.data() + 6);
  const auto n = read_le<std::uint64_t>(bytes.data() + 8);
  const auto d = read_le<std::uint64_t>(bytes.data() + 16);
  const bool has_labels = (flags & kFlagLabels) != 0;
  // guard the size formula against overflow from hostile headers
  if (d != 0 && n > (bytes.size() / 4) / d + 1) {
    throw Error(ErrorCode::TruncatedFile, "header claims " + std::to_string(n) + "x" + std::to_string(d));
  }
  const std::uint64_t expected = kEmbeddingHeaderBytes + 4 * n * d + (has_labels ? 4 * n : 0);
  if (bytes.size() < expected) {
    throw Error(ErrorCode::TruncatedFile, "expected " + std::to_string(expected) + " bytes, found " +
                                              std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::InvalidArgument, std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  std::vector<float> values(n * d);
  const unsigned char* p = bytes.data() + kEmbeddingHeaderBytes;
  for (std::size_t i = 0; i < values.size(); ++i, p += 4) {
    values[i] = std::bit_cast<float>(read_le<std::uint32_t>(p));
  }
  EmbeddingData data{EmbeddingMatrix(n, d, std::move(values)), std::nullopt};
  if (has_labels) {
    LabelVector labels(n);
    for (std::size_t i = 0; i < n; ++i, p += 4) labels[i] = read_le<std::uint32_t>(p);
    data.labels = std::move(labels);
  }
  return data;
}

EmbeddingData read_csv(const std::string& path, bool label_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<float> values;
  LabelVector labels;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const std::size_t feature_cells = label_column ? cells.size() - 1 : cells.size();
    if (feature_cells == 0) throw Error(ErrorCode::CsvParse, "(" + std::to_string(rows) + ", 0): no values");
    if (rows == 0) cols = feature_cells;
    if (feature_cells != cols) {
      throw Error(ErrorCode::CsvParse, "(" + std::to_string(rows) + ", " + std::to_string(feature_cells) +
                                           "): expected " + std::to_string(cols) + " values");
    }
    for (std::size_t c = 0; c < feature_cells; ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorCode::CsvParse, "(" + std::to_string(rows) + ", " + std::to_string(c) +
                                             "): '" + std::string(cell) + "'");
      }
      values.push_back(static_cast<float>(v));
    }
    if (label_column) {
      const auto cell = cells.back();
      std::uint32_t label = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorCode::CsvParse, "(" + std::to_string(rows) + ", " +
                                             std::to_string(feature_cells) + "): bad label '" +
                                             std::string(cell) + "'");
      }
      labels.push_back(label);
    }
    ++rows;
  }
  EmbeddingData data{EmbeddingMatrix(rows, cols, std::move(values)), std::nullopt};
  if (label_column) data.labels = std::move(labels);
  return data;
}

}  // namespace

FileFormat parse_format(const std::string& text) {
  if (text == "owcl") return FileFormat::Owcl;
  if (text == "csv") return FileFormat::Csv;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + text + "'");
}

FileFormat format_from_path(const std::string& path) {
  const std::string ext = ".csv";
  if (path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
    return FileFormat::Csv;
  }
  return FileFormat::Owcl;
}

EmbeddingData read_embedding_file(const std::string& path, FileFormat format, bool csv_label_column) {
  EmbeddingData data = format == FileFormat::Owcl ? read_binary(path) : read_csv(path, csv_label_column);
  validate(data.matrix);
  return data;
}

EmbeddingData read_embedding_file(const std::string& path) {
  return read_embedding_file(path, format_from_path(path));
}

void write_embedding_file(const std::string& path, const EmbeddingMatrix& matrix,
                          const std::optional<LabelVector>& labels) {
  if (labels && labels->size() != matrix.rows()) {
    throw Error(ErrorCode::LengthMismatch, "labels do not match the row count");
  }
  std::vector<unsigned char> out(kEmbeddingMagic, kEmbeddingMagic + 4);
  write_le<std::uint16_t>(out, kEmbeddingVersion);
  write_le<std::uint16_t>(out, labels ? kFlagLabels : 0);
  write_le<std::uint64_t>(out, matrix.rows());
  write_le<std::uint64_t>(out, matrix.cols());
  for (float v : matrix.values()) write_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  if (labels) {
    for (auto l : *labels) write_le<std::uint32_t>(out, l);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::Io, "short write to '" + path + "'");
}

void write_embedding_csv(const std::string& path, const EmbeddingMatrix& matrix,
                         const std::optional<LabelVector>& labels) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  char buf[64];
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      // shortest representation that round-trips the float
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), matrix(i, c));
      if (c) file << ',';
      file.write(buf, ptr - buf);
    }
    if (labels) file << ',' << (*labels)[i];
    file << '\n';
  }
  if (!file) throw Error(ErrorCode::Io, "short write to '" + path + "'");
}

LabelVector read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  LabelVector labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto cell = trim(line);
    if (cell.empty()) continue;
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::CsvParse, "(" + std::to_string(labels.size()) + ", 0): '" +
                                           std::string(cell) + "'");
    }
    labels.push_back(v);
  }
  return labels;
}

}  // namespace owcluster
