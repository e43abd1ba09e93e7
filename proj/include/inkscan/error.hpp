#ifndef INKSCAN_ERROR_HPP
#define INKSCAN_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace inkscan {

enum class ErrorKind {
  InvalidArgument,
  IoFailure,
  UnsupportedFormat,
  MissingBandFile,
  InvalidManifest,
  DimensionMismatch,
  EmptyCube,
  BandOutOfRange,
  DegenerateHistogram,
  EmptyForeground,
  ZeroSpectrum,
  TooFewSamples,
  EmptyInput,
  CountMismatch,
  PaletteTooSmall,
  TooManyClusters,
  InvalidSpec,
  TooManyClustersForExhaustive,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::MissingBandFile: return "MissingBandFile";
    case ErrorKind::InvalidManifest: return "InvalidManifest";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyCube: return "EmptyCube";
    case ErrorKind::BandOutOfRange: return "BandOutOfRange";
    case ErrorKind::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorKind::EmptyForeground: return "EmptyForeground";
    case ErrorKind::ZeroSpectrum: return "ZeroSpectrum";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::PaletteTooSmall: return "PaletteTooSmall";
    case ErrorKind::TooManyClusters: return "TooManyClusters";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::TooManyClustersForExhaustive: return "TooManyClustersForExhaustive";
  }
  return "Unknown";
}

/// All library failures are reported through this type. `kind()` lets callers
/// branch on the failure family; `what()` is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace inkscan

#endif  // INKSCAN_ERROR_HPP
