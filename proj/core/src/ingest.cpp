#include "gaitseg/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gaitseg {

void RawRecording::validate() const {
  if (timestamps.size() < 2)
    throw Error(ErrorCode::EmptyRecording, "recording needs >= 2 samples");
  if (timestamps.size() != samples.size())
    throw Error(ErrorCode::LengthMismatch, "timestamps/samples length mismatch");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      throw Error(ErrorCode::NonMonotonicTimestamps,
                  "timestamps must be strictly increasing");
  for (const auto& s : samples)
    for (double v : s)
      if (!std::isfinite(v))
        throw Error(ErrorCode::EmptyRecording, "non-finite sample value");
}

void UniformSeries::validate() const {
  if (rate <= 0) throw Error(ErrorCode::ConfigInvalid, "rate must be positive");
  const std::size_t n = channels[0].size();
  if (n < 1) throw Error(ErrorCode::EmptyRecording, "empty series");
  for (const auto& ch : channels) {
    if (ch.size() != n)
      throw Error(ErrorCode::LengthMismatch, "unequal channel lengths");
    for (double v : ch)
      if (!std::isfinite(v))
        throw Error(ErrorCode::EmptyRecording, "non-finite value");
  }
}

bool AmplitudeSeries::is_boundary(std::size_t t) const {
  return std::find(boundaries.begin(), boundaries.end(), t) != boundaries.end();
}

std::size_t AmplitudeSeries::segment_start(std::size_t t) const {
  std::size_t best = 0;
  for (std::size_t b : boundaries)
    if (b <= t && b > best) best = b;
  return best;
}

void AmplitudeSeries::validate() const {
  if (rate <= 0) throw Error(ErrorCode::ConfigInvalid, "rate must be positive");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::ConfigInvalid, "amplitude values must be >= 0 and finite");
}

UniformSeries interpolate_uniform(const RawRecording& rec, double rate) {
  rec.validate();
  if (rate <= 0) throw Error(ErrorCode::ConfigInvalid, "rate must be positive");
  const double t0 = rec.timestamps.front();
  const double t1 = rec.timestamps.back();
  if (t1 - t0 < 2.0 / rate)
    throw Error(ErrorCode::EmptyRecording, "recording span shorter than 2/rate");

  // grid t0 + k/rate, never past t1
  const std::size_t T =
      static_cast<std::size_t>(std::floor((t1 - t0) * rate + 1e-9)) + 1;

  UniformSeries out;
  out.start_time = t0;
  out.rate = rate;
  for (auto& ch : out.channels) ch.resize(T);

  std::size_t j = 0;  // rec.timestamps[j] <= t < rec.timestamps[j+1]
  for (std::size_t k = 0; k < T; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    while (j + 2 < rec.timestamps.size() && rec.timestamps[j + 1] <= t) ++j;
    const double ta = rec.timestamps[j], tb = rec.timestamps[j + 1];
    const double w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    for (int c = 0; c < 3; ++c)
      out.channels[c][k] =
          rec.samples[j][c] + w * (rec.samples[j + 1][c] - rec.samples[j][c]);
  }
  return out;
}

UniformSeries downsample_antialias(const UniformSeries& s, double target_rate) {
  s.validate();
  if (target_rate > s.rate + 1e-12)
    throw Error(ErrorCode::UpsampleRequested,
                "target rate exceeds input rate");

  const int win = std::max(1, static_cast<int>(std::lround(s.rate / target_rate)));
  const std::size_t n = s.size();

  UniformSeries out;
  out.start_time = s.start_time;
  out.rate = target_rate;

  const double step = s.rate / target_rate;
  const int half = (win - 1) / 2;
  for (int c = 0; c < 3; ++c) {
    const auto& x = s.channels[c];
    std::vector<double> smoothed(n);
    for (std::size_t i = 0; i < n; ++i) {
      // centered window, shrinking at the edges
      long lo = std::max<long>(0, static_cast<long>(i) - half);
      long hi = std::min<long>(static_cast<long>(n) - 1,
                               static_cast<long>(i) + (win - 1 - half));
      double acc = 0.0;
      for (long k = lo; k <= hi; ++k) acc += x[static_cast<std::size_t>(k)];
      smoothed[i] = acc / static_cast<double>(hi - lo + 1);
    }
    std::vector<double>& och = out.channels[c];
    for (double pos = 0.0; pos < static_cast<double>(n) - 0.5; pos += step) {
      std::size_t idx = static_cast<std::size_t>(std::lround(pos));
      if (idx >= n) break;
      och.push_back(smoothed[idx]);
    }
  }
  return out;
}

std::vector<RawRecording> split_on_gaps(const RawRecording& rec,
                                        double gap_seconds) {
  if (rec.timestamps.size() != rec.samples.size())
    throw Error(ErrorCode::LengthMismatch, "timestamps/samples length mismatch");

  // drop exact-duplicate timestamps first
  RawRecording dedup;
  dedup.source_id = rec.source_id;
  for (std::size_t i = 0; i < rec.timestamps.size(); ++i) {
    if (!dedup.timestamps.empty() && rec.timestamps[i] == dedup.timestamps.back())
      continue;
    dedup.timestamps.push_back(rec.timestamps[i]);
    dedup.samples.push_back(rec.samples[i]);
  }
  dedup.validate();

  std::vector<RawRecording> segments;
  RawRecording cur;
  int seg_index = 0;
  auto flush = [&] {
    if (cur.timestamps.size() >= 2) {
      std::ostringstream id;
      id << dedup.source_id << "/" << seg_index;
      cur.source_id = id.str();
      segments.push_back(std::move(cur));
      ++seg_index;
    }
    cur = RawRecording{};
  };
  for (std::size_t i = 0; i < dedup.timestamps.size(); ++i) {
    if (!cur.timestamps.empty() &&
        dedup.timestamps[i] - cur.timestamps.back() > gap_seconds)
      flush();
    cur.timestamps.push_back(dedup.timestamps[i]);
    cur.samples.push_back(dedup.samples[i]);
  }
  flush();
  if (segments.empty())
    throw Error(ErrorCode::EmptyRecording, "no usable segment after gap split");
  return segments;
}

std::vector<UniformSeries> ingest_recording(const RawRecording& rec,
                                            double working_rate,
                                            double gap_seconds) {
  std::vector<UniformSeries> out;
  for (const auto& seg : split_on_gaps(rec, gap_seconds)) {
    // interpolate near the native rate, then anti-alias down
    std::vector<double> dts;
    for (std::size_t i = 1; i < seg.timestamps.size(); ++i)
      dts.push_back(seg.timestamps[i] - seg.timestamps[i - 1]);
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    const double median_dt = dts[dts.size() / 2];
    double native = median_dt > 0 ? 1.0 / median_dt : working_rate;
    double interm = std::max(working_rate, native);
    try {
      UniformSeries u = interpolate_uniform(seg, interm);
      out.push_back(downsample_antialias(u, working_rate));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyRecording) throw;
      // segment too short for the working rate: skip
    }
  }
  if (out.empty())
    throw Error(ErrorCode::EmptyRecording, "no segment long enough to ingest");
  return out;
}

}  // namespace gaitseg
