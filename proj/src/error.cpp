#include "owcluster/error.hpp"

namespace owcluster {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::GeodesicNotPointwise: return "GeodesicNotPointwise";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::DimsTooLarge: return "DimsTooLarge";
    case ErrorCode::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::DegenerateAllPoints: return "DegenerateAllPoints";
    case ErrorCode::CoincidentCentroids: return "CoincidentCentroids";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::BadPercentile: return "BadPercentile";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::CsvParse: return "CsvParse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace owcluster
