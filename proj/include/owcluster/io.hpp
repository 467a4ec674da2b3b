#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "owcluster/core.hpp"

namespace owcluster {

// Binary embedding file, little-endian throughout:
//   bytes 0-3   magic "OWCL"
//   bytes 4-5   version (1)
//   bytes 6-7   flags, bit 0 = labels section present
//   bytes 8-15  n (rows)
//   bytes 16-23 d (columns)
//   then n*d float32 values row-major, then n uint32 labels if flagged.
inline constexpr char kEmbeddingMagic[4] = {'O', 'W', 'C', 'L'};
inline constexpr std::uint16_t kEmbeddingVersion = 1;
inline constexpr std::uint16_t kFlagLabels = 0x1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 24;

enum class FileFormat { Owcl, Csv };

FileFormat parse_format(const std::string& text);
// "owcl" unless the path ends in ".csv".
FileFormat format_from_path(const std::string& path);

struct EmbeddingData {
  EmbeddingMatrix matrix;
  std::optional<LabelVector> labels;
};

// CSV: one instance per line, numeric cells; with `csv_label_column` the last
// cell of each line is a non-negative integer label.
EmbeddingData read_embedding_file(const std::string& path, FileFormat format,
                                  bool csv_label_column = false);
EmbeddingData read_embedding_file(const std::string& path);

void write_embedding_file(const std::string& path, const EmbeddingMatrix& matrix,
                          const std::optional<LabelVector>& labels = std::nullopt);
void write_embedding_csv(const std::string& path, const EmbeddingMatrix& matrix,
                         const std::optional<LabelVector>& labels = std::nullopt);

// One non-negative integer per line; blank lines are skipped.
LabelVector read_label_file(const std::string& path);

}  // namespace owcluster
