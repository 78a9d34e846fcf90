#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace burnscan {

// Every recoverable failure in the library throws Error with one of these
// codes. The CLI maps them to exit code 2 (data error); anything else that
// escapes is an internal error (exit 3).
enum class Errc {
  invalid_grid,
  rotated_grid_unsupported,
  invalid_polygon,
  crs_mismatch,
  empty_catalog,
  read_failure,
  write_failure,
  wrong_band,
  odd_dimensions,
  grid_mismatch,
  missing_fire_date,
  corrupt_store,
  invalid_config,
  shape_error,
  diverged_training,
  version_mismatch,
  corrupt_file,
  shape_mismatch,
  empty_scores,
  no_coverage,
  no_overlap,
  parse_error,
  invalid_argument,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_grid: return "InvalidGrid";
    case Errc::rotated_grid_unsupported: return "RotatedGridUnsupported";
    case Errc::invalid_polygon: return "InvalidPolygon";
    case Errc::crs_mismatch: return "CRSMismatch";
    case Errc::empty_catalog: return "EmptyCatalog";
    case Errc::read_failure: return "ReadFailure";
    case Errc::write_failure: return "WriteFailure";
    case Errc::wrong_band: return "WrongBand";
    case Errc::odd_dimensions: return "OddDimensions";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::missing_fire_date: return "MissingFireDate";
    case Errc::corrupt_store: return "CorruptStore";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::shape_error: return "ShapeError";
    case Errc::diverged_training: return "DivergedTraining";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::corrupt_file: return "CorruptFile";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_scores: return "EmptyScores";
    case Errc::no_coverage: return "NoCoverage";
    case Errc::no_overlap: return "NoOverlap";
    case Errc::parse_error: return "ParseError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace burnscan
