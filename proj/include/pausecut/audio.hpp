#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pausecut/common.hpp"

namespace pausecut {

// Mono audio, samples in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  bool operator==(const AudioClip&) const = default;
};

// The one time-to-sample convention used everywhere (slicing, gaps, frames).
inline std::size_t sample_index(double t_seconds, int sample_rate) {
  const long long idx = std::llround(t_seconds * sample_rate);
  return idx < 0 ? 0 : static_cast<std::size_t>(idx);
}

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a RIFF/WAVE stream. Only PCM, 16-bit, mono is accepted; samples are
// scaled to [-1, 1] by /32768.
inline AudioClip read_wav(std::istream& in) {
  unsigned char hdr[12];
  if (!in.read(reinterpret_cast<char*>(hdr), 12)) throw ParseError("truncated WAV: no RIFF header");
  if (std::memcmp(hdr, "RIFF", 4) != 0 || std::memcmp(hdr + 8, "WAVE", 4) != 0)
    throw ParseError("not a RIFF/WAVE stream");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  AudioClip clip;

  unsigned char chunk[8];
  while (in.read(reinterpret_cast<char*>(chunk), 8)) {
    const std::uint32_t size = detail::read_u32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError("fmt chunk too small");
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size))
        throw ParseError("truncated WAV: fmt chunk");
      format = detail::read_u16(fmt.data());
      channels = detail::read_u16(fmt.data() + 2);
      rate = detail::read_u32(fmt.data() + 4);
      bits = detail::read_u16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("WAV data chunk precedes fmt chunk");
      if (format != 1) throw ValidationError("unsupported WAV: PCM required");
      if (channels != 1) throw ValidationError("unsupported WAV: mono required");
      if (bits != 16) throw ValidationError("unsupported WAV: 16-bit samples required");
      if (rate == 0) throw ParseError("WAV sample rate is zero");
      if (size % 2 != 0) throw ParseError("WAV data chunk has odd byte count");
      std::vector<unsigned char> data(size);
      if (!in.read(reinterpret_cast<char*>(data.data()), size))
        throw ParseError("truncated WAV: data chunk");
      clip.sample_rate = static_cast<int>(rate);
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        auto v = static_cast<std::int16_t>(detail::read_u16(data.data() + 2 * i));
        clip.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return clip;
    } else {
      // Skip unknown chunks (LIST, fact, ...), honoring RIFF word alignment.
      in.ignore(size + (size % 2));
      if (!in) throw ParseError("truncated WAV: chunk body");
    }
  }
  throw ParseError("WAV stream has no data chunk");
}

// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] and quantized by
// rounding, so write->read round-trips 16-bit-representable clips exactly.
// Returns the number of bytes written.
inline std::size_t write_wav(const AudioClip& clip, std::ostream& out) {
  if (clip.sample_rate <= 0) throw ValidationError("clip sample_rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  detail::put_u32(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  detail::put_u32(buf, 16);
  detail::put_u16(buf, 1);  // PCM
  detail::put_u16(buf, 1);  // mono
  detail::put_u32(buf, static_cast<std::uint32_t>(clip.sample_rate));
  detail::put_u32(buf, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  detail::put_u16(buf, 2);   // block align
  detail::put_u16(buf, 16);  // bits per sample
  buf += "data";
  detail::put_u32(buf, data_bytes);
  for (float s : clip.samples) {
    if (!std::isfinite(s)) throw ValidationError("clip contains a non-finite sample");
    long q = std::lround(std::clamp(s, -1.0f, 1.0f) * 32768.0f);
    q = std::clamp(q, -32768L, 32767L);
    detail::put_u16(buf, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing WAV");
  return buf.size();
}

// Returns samples [round(t0*sr), round(t1*sr)). Empty result allowed.
inline AudioClip slice(const AudioClip& clip, double t0, double t1) {
  if (clip.sample_rate <= 0) throw ValidationError("clip sample_rate must be positive");
  if (t0 > t1) throw ValidationError("slice: t0 > t1");
  const long long i0 = std::llround(t0 * clip.sample_rate);
  const long long i1 = std::llround(t1 * clip.sample_rate);
  const auto n = static_cast<long long>(clip.samples.size());
  if (i0 < 0 || i1 > n)
    throw ValidationError("slice: [" + format_double(t0) + ", " + format_double(t1) +
                          "] outside clip of " + format_double(clip.duration()) + " s");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + i0, clip.samples.begin() + i1);
  return out;
}

// clip1 + gap + clip2 + ... All clips must share one sample rate; the output
// has sum(len_i) + (n-1)*round(gap*sr) samples.
inline AudioClip concat_with_gaps(const std::vector<AudioClip>& clips, double gap) {
  if (clips.empty()) throw ValidationError("concat: empty clip list");
  if (gap < 0) throw ValidationError("concat: negative gap");
  const int sr = clips.front().sample_rate;
  if (sr <= 0) throw ValidationError("clip sample_rate must be positive");
  std::size_t total = 0;
  for (const auto& c : clips) {
    if (c.sample_rate != sr)
      throw ValidationError("concat: mixed sample rates (" + std::to_string(sr) + " vs " +
                            std::to_string(c.sample_rate) +
                            "); no resampler here, prepare the corpus at one rate "
                            "(22.05 kHz is the usual TTS convention)");
    total += c.samples.size();
  }
  const std::size_t gap_len = sample_index(gap, sr);
  total += gap_len * (clips.size() - 1);
  AudioClip out;
  out.sample_rate = sr;
  out.samples.reserve(total);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (i) out.samples.insert(out.samples.end(), gap_len, 0.0f);
    out.samples.insert(out.samples.end(), clips[i].samples.begin(), clips[i].samples.end());
  }
  return out;
}

struct SilenceRegion {
  double t_start = 0;
  double t_end = 0;
  bool operator==(const SilenceRegion&) const = default;
};

// Maximal runs of analysis frames whose RMS falls below threshold_db,
// merged and filtered to at least min_dur seconds. Alignment-free fallback
// for corpora that ship without pause labels.
inline std::vector<SilenceRegion> detect_silences_energy(const AudioClip& clip, double frame,
                                                         double hop, double threshold_db,
                                                         double min_dur) {
  if (!(hop > 0) || frame < hop) throw ValidationError("silence detection needs frame >= hop > 0");
  if (min_dur < 0) throw ValidationError("min_dur must be non-negative");
  if (clip.sample_rate <= 0) throw ValidationError("clip sample_rate must be positive");

  const std::size_t n = clip.samples.size();
  const std::size_t frame_len = std::max<std::size_t>(1, sample_index(frame, clip.sample_rate));
  const std::size_t hop_len = std::max<std::size_t>(1, sample_index(hop, clip.sample_rate));
  if (n == 0) return {};

  std::size_t n_frames = n <= frame_len ? 1 : (n - frame_len) / hop_len + 1;
  std::vector<bool> silent(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t b = k * hop_len;
    const std::size_t e = std::min(b + frame_len, n);
    double acc = 0;
    for (std::size_t i = b; i < e; ++i) acc += double(clip.samples[i]) * clip.samples[i];
    const double rms = std::sqrt(acc / static_cast<double>(e - b));
    const double db = 20.0 * std::log10(std::max(rms, 1e-10));  // -200 dB floor
    silent[k] = db < threshold_db;
  }

  std::vector<SilenceRegion> out;
  const double duration = clip.duration();
  std::size_t k = 0;
  while (k < n_frames) {
    if (!silent[k]) {
      ++k;
      continue;
    }
    std::size_t first = k;
    while (k < n_frames && silent[k]) ++k;
    const std::size_t last = k - 1;
    const double t0 = static_cast<double>(first * hop_len) / clip.sample_rate;
    double t1 = static_cast<double>(last * hop_len + frame_len) / clip.sample_rate;
    if (last == n_frames - 1 || t1 > duration) t1 = duration;
    if (t1 - t0 >= min_dur) out.push_back({t0, t1});
  }
  return out;
}

// Per-frame F0 values; unvoiced frames carry no value.
struct F0Track {
  double frame_hop = 0;  // seconds between frames
  std::vector<std::optional<double>> values;

  std::size_t voiced_count() const {
    std::size_t c = 0;
    for (const auto& v : values) c += v.has_value();
    return c;
  }
};

struct F0Stats {
  double mean = 0;
  double stddev = 0;
  std::size_t voiced_frames = 0;
};

struct F0Result {
  F0Track track;
  // Absent when no frame is voiced; never reported as zeros.
  std::optional<F0Stats> summary;
};

// Normalized-autocorrelation pitch tracker. A frame is voiced iff the best
// peak in the lag window [sr/f0_max, sr/f0_min] reaches voicing_threshold;
// the peak lag is refined by parabolic interpolation.
inline F0Result estimate_f0(const AudioClip& clip, double f0_min, double f0_max, double frame,
                            double hop, double voicing_threshold) {
  if (!(f0_min > 0 && f0_min < f0_max)) throw ValidationError("need 0 < f0_min < f0_max");
  if (!(hop > 0) || !(frame > 0)) throw ValidationError("frame and hop must be positive");
  if (frame < 2.0 / f0_min)
    throw ValidationError("frame too short: need at least two periods of f0_min (" +
                          format_double(2.0 / f0_min) + " s)");
  if (clip.sample_rate <= 0) throw ValidationError("clip sample_rate must be positive");

  const int sr = clip.sample_rate;
  const std::size_t n = clip.samples.size();
  const std::size_t frame_len = sample_index(frame, sr);
  const std::size_t hop_len = std::max<std::size_t>(1, sample_index(hop, sr));
  const auto lag_min = static_cast<std::size_t>(std::max(2.0, std::ceil(sr / f0_max)));
  const auto lag_max = static_cast<std::size_t>(std::floor(sr / f0_min));

  F0Result res;
  res.track.frame_hop = static_cast<double>(hop_len) / sr;
  if (n < frame_len || lag_max + 1 >= frame_len) {
    if (lag_max + 1 >= frame_len)
      throw ValidationError("frame too short for the requested f0_min at this sample rate");
    return res;
  }

  std::vector<double> x(frame_len);
  const std::size_t n_frames = (n - frame_len) / hop_len + 1;
  double sum = 0, sumsq = 0;
  std::size_t voiced = 0;

  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t b = k * hop_len;
    double mean = 0;
    for (std::size_t i = 0; i < frame_len; ++i) mean += clip.samples[b + i];
    mean /= static_cast<double>(frame_len);
    double energy = 0;
    for (std::size_t i = 0; i < frame_len; ++i) {
      x[i] = clip.samples[b + i] - mean;
      energy += x[i] * x[i];
    }
    if (energy < 1e-12) {
      res.track.values.emplace_back(std::nullopt);
      continue;
    }

    double best_r = -1;
    std::size_t best_lag = 0;
    std::vector<double> r(lag_max + 2, 0.0);
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      double num = 0, e0 = 0, e1 = 0;
      const std::size_t m = frame_len - lag;
      for (std::size_t i = 0; i < m; ++i) {
        num += x[i] * x[i + lag];
        e0 += x[i] * x[i];
        e1 += x[i + lag] * x[i + lag];
      }
      const double denom = std::sqrt(e0 * e1);
      r[lag] = denom > 0 ? num / denom : 0.0;
      if (r[lag] > best_r) {
        best_r = r[lag];
        best_lag = lag;
      }
    }

    if (best_lag == 0 || best_r < voicing_threshold) {
      res.track.values.emplace_back(std::nullopt);
      continue;
    }
    // Sub-harmonic guard: a lag near 2x the true period can edge out the
    // fundamental by discretization alone, so take the shortest lag whose
    // peak is within 1% of the best.
    for (std::size_t lag = lag_min; lag < best_lag; ++lag) {
      const bool is_peak = r[lag] >= r[lag - 1] && (lag + 1 > lag_max || r[lag] >= r[lag + 1]);
      if (is_peak && r[lag] >= 0.99 * best_r) {
        best_lag = lag;
        break;
      }
    }
    // Parabolic refinement of the peak lag.
    double lag_refined = static_cast<double>(best_lag);
    if (best_lag > lag_min && best_lag < lag_max) {
      const double a = r[best_lag - 1], b2 = r[best_lag], c = r[best_lag + 1];
      const double denom = a - 2 * b2 + c;
      if (std::abs(denom) > 1e-12) {
        double delta = 0.5 * (a - c) / denom;
        if (std::abs(delta) <= 1.0) lag_refined += delta;
      }
    }
    double f0 = std::clamp(sr / lag_refined, f0_min, f0_max);
    res.track.values.emplace_back(f0);
    sum += f0;
    sumsq += f0 * f0;
    ++voiced;
  }

  if (voiced > 0) {
    const double mean = sum / static_cast<double>(voiced);
    const double var = std::max(0.0, sumsq / static_cast<double>(voiced) - mean * mean);
    res.summary = F0Stats{mean, std::sqrt(var), voiced};
  }
  return res;
}

}  // namespace pausecut
