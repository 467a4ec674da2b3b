#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace owcluster {

enum class ErrorCode {
  NonFiniteValue,
  EmptyMatrix,
  DimensionMismatch,
  GeodesicNotPointwise,
  KTooLarge,
  ZeroRow,
  DimsTooLarge,
  PerplexityTooLarge,
  KOutOfRange,
  SingleCluster,
  DegenerateAllPoints,
  CoincidentCentroids,
  LengthMismatch,
  BadRange,
  BudgetTooSmall,
  BadPercentile,
  BadMagic,
  VersionUnsupported,
  TruncatedFile,
  CsvParse,
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace owcluster
