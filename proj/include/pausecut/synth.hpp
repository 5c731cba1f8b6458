#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pausecut/audio.hpp"
#include "pausecut/common.hpp"
#include "pausecut/phrase.hpp"

namespace pausecut {

struct SynthRequest {
  std::string text;
  std::optional<std::string> voice;
  std::optional<int> sample_rate_hint;

  void validate() const {
    if (trim(text).empty()) throw ValidationError("synthesis request has empty text");
  }
};

struct SynthCapabilities {
  int sample_rate = 0;  // 0 = unknown until the first response
  std::size_t max_text_len = 0;
  int max_concurrency = 1;  // 0 = unbounded
};

// A synthesis error that carries the backend's HTTP-ish status when known.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& msg, int status = 0) : Error(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Contract for pluggable synthesizers. Implementations must either be safe
// for concurrent synthesize() calls or advertise max_concurrency = 1.
class SynthBackend {
 public:
  virtual ~SynthBackend() = default;
  virtual AudioClip synthesize(const SynthRequest& req) = 0;
  virtual SynthCapabilities capabilities() const = 0;
};

inline constexpr int kMockSampleRate = 22050;
inline constexpr double kMockToneSeconds = 0.150;
inline constexpr double kMockBlockSeconds = 0.200;

// Deterministic test voice: each whitespace token becomes a 0.150 s sine at
// 110 + (fnv1a64(token) mod 440) Hz followed by silence padding the block to
// 0.200 s, all at 22 050 Hz. Total duration is exactly n_tokens * 0.200 s.
inline AudioClip mock_synthesize(const SynthRequest& req) {
  req.validate();
  const int sr = kMockSampleRate;
  const std::size_t block_len = sample_index(kMockBlockSeconds, sr);
  const std::size_t tone_len = sample_index(kMockToneSeconds, sr);
  const auto tokens = tokenize(req.text);

  AudioClip clip;
  clip.sample_rate = sr;
  clip.samples.reserve(tokens.size() * block_len);
  for (const auto& tok : tokens) {
    const double freq = 110.0 + static_cast<double>(fnv1a64(tok) % 440);
    for (std::size_t i = 0; i < tone_len; ++i) {
      const double t = static_cast<double>(i) / sr;
      clip.samples.push_back(
          static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * freq * t)));
    }
    clip.samples.insert(clip.samples.end(), block_len - tone_len, 0.0f);
  }
  return clip;
}

class MockBackend final : public SynthBackend {
 public:
  AudioClip synthesize(const SynthRequest& req) override { return mock_synthesize(req); }
  SynthCapabilities capabilities() const override {
    return {kMockSampleRate, std::size_t(1) << 20, 0};
  }
};

struct SegmentTrace {
  std::size_t index = 0;
  std::string text;
  double duration = 0;  // seconds

  json to_json() const { return json{{"index", index}, {"text", text}, {"duration", duration}}; }
};

struct SynthOptions {
  std::optional<std::string> voice;
  std::size_t min_words = 3;
  double gap = 0.100;  // silence between concatenated IPUs
  bool honor_punctuation = true;
  int max_concurrency = 4;
};

struct LongSynthResult {
  AudioClip audio;
  std::vector<SegmentTrace> trace;  // segmentation order, not completion order

  json trace_json() const {
    json arr = json::array();
    for (const auto& t : trace) arr.push_back(t.to_json());
    return arr;
  }
};

// Long-text synthesis: segment the token stream into IPUs, synthesize each
// segment, and concatenate in order with `gap` seconds of silence between.
// Any backend failure aborts the whole call, naming the failing segment.
inline LongSynthResult synthesize_long(SynthBackend& backend,
                                       const std::vector<std::string>& tokens,
                                       const BreakLexicon& lexicon,
                                       const SynthOptions& opts = {}) {
  if (tokens.empty()) throw ValidationError("synthesize_long needs a non-empty token list");
  if (opts.gap < 0) throw ValidationError("gap must be non-negative");

  const auto segments =
      segment_text(tokens, lexicon, opts.min_words, opts.honor_punctuation);
  if (segments.empty()) throw ValidationError("no synthesizable text after segmentation");

  const SynthCapabilities caps = backend.capabilities();
  int limit = opts.max_concurrency < 1 ? 1 : opts.max_concurrency;
  if (caps.max_concurrency > 0) limit = std::min(limit, caps.max_concurrency);

  const std::size_t n = segments.size();
  std::vector<std::string> texts(n);
  for (std::size_t i = 0; i < n; ++i) texts[i] = join(segments[i]);
  if (caps.max_text_len > 0)
    for (std::size_t i = 0; i < n; ++i)
      if (texts[i].size() > caps.max_text_len)
        throw ValidationError("segment " + std::to_string(i + 1) + " exceeds the backend's " +
                              std::to_string(caps.max_text_len) + "-byte text limit");

  std::vector<AudioClip> clips(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<bool> failed{false};

  auto run_one = [&](std::size_t i) {
    try {
      SynthRequest req;
      req.text = texts[i];
      req.voice = opts.voice;
      AudioClip clip = backend.synthesize(req);
      if (caps.sample_rate > 0 && clip.sample_rate != caps.sample_rate)
        throw BackendError("backend returned " + std::to_string(clip.sample_rate) +
                           " Hz but advertises " + std::to_string(caps.sample_rate) + " Hz");
      clips[i] = std::move(clip);
    } catch (...) {
      failures[i] = std::current_exception();
      failed.store(true);
    }
  };

  if (limit <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n && !failed.load(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(limit), n);
    for (std::size_t w = 0; w < n_workers; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          if (failed.load()) break;
          run_one(i);
        }
      });
    for (auto& w : workers) w.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      throw BackendError("segment " + std::to_string(i + 1) + " of " + std::to_string(n) +
                         " (\"" + texts[i] + "\") failed: " + e.what());
    }
  }

  LongSynthResult result;
  result.audio = concat_with_gaps(clips, opts.gap);
  for (std::size_t i = 0; i < n; ++i)
    result.trace.push_back({i, texts[i], clips[i].duration()});
  return result;
}

}  // namespace pausecut
