#ifndef GAITSEG_INGEST_HPP
#define GAITSEG_INGEST_HPP

#include <vector>

#include "gaitseg/types.hpp"

namespace gaitseg {

/// Linear interpolation of a raw recording onto a uniform grid covering its
/// span; never extrapolates past the last raw timestamp.
UniformSeries interpolate_uniform(const RawRecording& rec, double rate);

/// Centered moving-average smoothing (window = round(rate/target), edges
/// shrink) followed by decimation to target_rate.
UniformSeries downsample_antialias(const UniformSeries& s, double target_rate);

/// Split a recording wherever consecutive timestamps differ by more than
/// gap_seconds; exact-duplicate timestamps are dropped first.
std::vector<RawRecording> split_on_gaps(const RawRecording& rec,
                                        double gap_seconds);

/// Full ingest: split on gaps, interpolate each segment to an intermediate
/// uniform rate, downsample to the working rate.
std::vector<UniformSeries> ingest_recording(const RawRecording& rec,
                                            double working_rate,
                                            double gap_seconds = 2.0);

}  // namespace gaitseg

#endif
