#ifndef GAITSEG_TYPES_HPP
#define GAITSEG_TYPES_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitseg {

enum class ErrorCode {
  EmptyRecording,
  NonMonotonicTimestamps,
  UpsampleRequested,
  TooShort,
  WindowTooShort,
  SeriesTooShort,
  FrequencyOutOfRange,
  NonStationary,
  AllBurnedIn,
  SingleClassCorpus,
  DimensionMismatch,
  BandOutOfRange,
  LagRangeInvalid,
  LengthMismatch,
  EmptyGrid,
  DegenerateCoefficients,
  EmptyWindow,
  InvalidSpec,
  ConfigInvalid,
  StageFailed,
  MissingArtifacts,
  TruncationTooSmall,
  IoError,
};

/// All recoverable failures carry a code so callers can branch without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

using Vec3 = std::array<double, 3>;

/// Raw 3-axis accelerometer stream, non-uniformly sampled.
struct RawRecording {
  std::vector<double> timestamps;  // seconds, strictly increasing
  std::vector<Vec3> samples;       // m/s^2
  std::string source_id;

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

/// Uniformly sampled 3-channel series.
struct UniformSeries {
  double start_time = 0.0;
  double rate = 0.0;  // Hz
  std::array<std::vector<double>, 3> channels;

  std::size_t size() const { return channels[0].size(); }
  void validate() const;
};

/// 1-D dynamic-component amplitude at the working rate. `boundaries`
/// lists segment start indices (always containing 0 when non-empty data);
/// AR dependence and transitions do not cross segment starts.
struct AmplitudeSeries {
  std::vector<double> values;  // >= 0
  double rate = 0.0;
  std::string origin;
  std::vector<std::size_t> boundaries;

  std::size_t size() const { return values.size(); }
  bool is_boundary(std::size_t t) const;
  /// Index of the segment start governing point t.
  std::size_t segment_start(std::size_t t) const;
  void validate() const;
};

}  // namespace gaitseg

#endif
