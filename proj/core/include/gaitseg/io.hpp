#ifndef GAITSEG_IO_HPP
#define GAITSEG_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gaitseg/segmenter.hpp"
#include "gaitseg/synth.hpp"
#include "gaitseg/types.hpp"

namespace gaitseg {

/// Consistent numeric formatting for all artifacts (%.12g).
std::string format_double(double v);

/// Reads `t,ax,ay,az` CSV (comment lines starting with '#' skipped).
RawRecording read_recording_csv(const std::string& path);
void write_recording_csv(const std::string& path, const RawRecording& rec,
                         const std::string& header_comment = "");

/// `t,amp` CSV; boundaries are encoded as `# boundary` marker lines.
AmplitudeSeries read_amplitude_csv(const std::string& path);
void write_amplitude_csv(const std::string& path, const AmplitudeSeries& amp,
                         const std::string& header_comment = "");

/// `t,label` CSV with 0/1 labels.
struct LabelSeries {
  std::vector<double> times;
  std::vector<int> labels;
};
LabelSeries read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const LabelSeries& labels,
                      const std::string& header_comment = "");

/// Align labels to a uniform grid by nearest timestamp.
std::vector<int> align_labels(const LabelSeries& labels,
                              const std::vector<double>& grid_times);

/// Newline-delimited JSON, one snapshot per line; labels run-length encoded.
void write_snapshots_ndjson(std::ostream& os,
                            const std::vector<ModelSnapshot>& snaps,
                            const std::string& header_comment = "");
void write_snapshot_ndjson_line(std::ostream& os, const ModelSnapshot& snap);
std::vector<ModelSnapshot> read_snapshots_ndjson(const std::string& path);

std::string ar_state_to_json(const ArState& state);
ArState ar_state_from_json(const std::string& json_text);

/// Load a synthetic-generator spec from JSON; `default_seed` applies when the
/// file does not pin one.
SynthSpec load_synth_spec_json(const std::string& path,
                               std::uint64_t default_seed);

/// FNV-1a hash of a canonical string, hex-encoded; used to stamp artifacts
/// with the producing config.
std::string fnv1a_hex(const std::string& text);

}  // namespace gaitseg

#endif
