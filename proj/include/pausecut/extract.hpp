#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pausecut/align.hpp"
#include "pausecut/audio.hpp"
#include "pausecut/common.hpp"
#include "pausecut/corpus.hpp"
#include "pausecut/phrase.hpp"
#include "pausecut/stats.hpp"

namespace pausecut {

// Where inside a boundary pause the audio is cut.
struct SplitPoint {
  enum class Mode {
    silence_midpoint,  // cut at the pause midpoint; gap-0 concat is lossless
    trim_to_pad,       // keep at most `pad` seconds of silence on each side
  };
  Mode mode = Mode::silence_midpoint;
  double pad = 0;

  static SplitPoint midpoint() { return {}; }
  static SplitPoint trim(double pad) { return {Mode::trim_to_pad, pad}; }
};

struct ExtractConfig {
  double t_sil = 0.100;   // boundary threshold T(sil)
  double min_sp = 0.020;  // pauses shorter than this are spurious and eliminated
  SplitPoint split_point = SplitPoint::midpoint();
  std::optional<std::size_t> min_ipu_words;  // training-side merge, off by default

  void validate() const {
    if (!(t_sil > 0)) throw ValidationError("t_sil must be positive");
    if (!(min_sp > 0)) throw ValidationError("min_sp must be positive");
    if (split_point.pad < 0) throw ValidationError("trim pad must be non-negative");
    if (min_ipu_words && *min_ipu_words < 1)
      throw ValidationError("min_ipu_words must be at least 1");
  }
};

// A maximal stretch of non-speech between two spoken words.
struct PauseInterval {
  double t_start = 0;
  double t_end = 0;
  std::size_t words_before = 0;  // number of word tokens preceding the pause

  double duration() const { return t_end - t_start; }
};

// Pause segments promoted to IPU boundaries, in time order.
struct BoundarySet {
  std::vector<PauseInterval> boundaries;

  std::size_t size() const { return boundaries.size(); }
};

// All intra-utterance pauses of a word-level track: gaps between consecutive
// word segments, whether marked with a pause label, left implicit, or both.
// Utterance-initial and -final silences are not included.
inline std::vector<PauseInterval> collect_pauses(const AlignmentTrack& track) {
  std::vector<PauseInterval> pauses;
  double last_word_end = 0;
  std::size_t words_seen = 0;
  for (const auto& seg : track.segments) {
    if (track.is_pause(seg.label)) continue;
    if (words_seen > 0 && seg.t_start > last_word_end)
      pauses.push_back({last_word_end, seg.t_start, words_seen});
    last_word_end = seg.t_end;
    ++words_seen;
  }
  return pauses;
}

// Sub-sample slop for duration-vs-threshold comparisons, so that times read
// from decimal label files ("0.5 0.6 sp" is 99.999... ms in binary) still
// compare as intended.
inline constexpr double kTimeEps = 1e-9;

// Boundary rule: spurious pauses (< min_sp) are eliminated; a surviving
// pause becomes a boundary iff its duration >= t_sil.
inline BoundarySet find_ipu_boundaries(const AlignmentTrack& track, const ExtractConfig& cfg) {
  cfg.validate();
  track.validate();
  BoundarySet set;
  for (const auto& p : collect_pauses(track)) {
    if (p.duration() < cfg.min_sp - kTimeEps) continue;  // eliminated
    if (p.duration() >= cfg.t_sil - kTimeEps) set.boundaries.push_back(p);
  }
  return set;
}

struct IpuExtraction {
  std::vector<IpuRecord> records;
  std::vector<AudioClip> clips;  // parallel to records
};

namespace detail {

inline AudioClip slice_by_index(const AudioClip& clip, std::size_t i0, std::size_t i1) {
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(i0),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(i1));
  return out;
}

inline IpuPosition position_of(std::size_t index, std::size_t count) {
  if (count == 1) return IpuPosition::only;
  if (index == 0) return IpuPosition::first;
  if (index + 1 == count) return IpuPosition::last;
  return IpuPosition::middle;
}

}  // namespace detail

// Splits one utterance at its IPU boundaries. In silence_midpoint mode the
// slices tile the clip exactly, so a gap-0 concatenation reproduces it
// sample for sample.
inline IpuExtraction extract_ipus(const Utterance& utt, const AudioClip& clip,
                                  const AlignmentTrack& track, const ExtractConfig& cfg,
                                  double tolerance = 0.1) {
  cfg.validate();
  utt.validate();
  validate_alignment(track, utt, tolerance);
  if (clip.sample_rate <= 0) throw ValidationError("clip sample_rate must be positive");
  if (utt.sample_rate != clip.sample_rate)
    throw ValidationError("utterance '" + utt.id + "' declares " +
                          std::to_string(utt.sample_rate) + " Hz but clip is " +
                          std::to_string(clip.sample_rate) + " Hz");
  if (std::abs(clip.duration() - track.end_time()) > tolerance)
    throw ValidationError("clip of " + format_double(clip.duration()) +
                          " s does not match alignment ending at " +
                          format_double(track.end_time()) + " s");

  std::vector<PauseInterval> boundaries = find_ipu_boundaries(track, cfg).boundaries;
  const std::size_t n_tokens = utt.tokens.size();

  // Optional training-side merge of too-short IPUs.
  if (cfg.min_ipu_words && !boundaries.empty()) {
    std::vector<std::size_t> sizes;
    std::size_t prev = 0;
    for (const auto& b : boundaries) {
      sizes.push_back(b.words_before - prev);
      prev = b.words_before;
    }
    sizes.push_back(n_tokens - prev);
    const auto merged = merge_short_counts(sizes, *cfg.min_ipu_words);
    std::set<std::size_t> keep_positions;
    std::size_t cum = 0;
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
      cum += merged[i];
      keep_positions.insert(cum);
    }
    std::erase_if(boundaries,
                  [&](const PauseInterval& b) { return !keep_positions.count(b.words_before); });
  }

  // Word spans, for trim mode and for token grouping.
  std::vector<Segment> words;
  for (const auto& seg : track.segments)
    if (!track.is_pause(seg.label)) words.push_back(seg);

  const std::size_t n_ipus = boundaries.size() + 1;
  const std::size_t total_samples = clip.samples.size();
  const int sr = clip.sample_rate;

  IpuExtraction out;
  std::size_t token_begin = 0;
  std::size_t prev_cut = 0;
  for (std::size_t i = 0; i < n_ipus; ++i) {
    const bool last = i + 1 == n_ipus;
    const std::size_t token_end = last ? n_tokens : boundaries[i].words_before;

    std::size_t i0, i1;
    if (cfg.split_point.mode == SplitPoint::Mode::silence_midpoint) {
      i0 = prev_cut;
      if (last) {
        i1 = total_samples;
      } else {
        const auto& b = boundaries[i];
        i1 = std::min(total_samples, sample_index((b.t_start + b.t_end) / 2.0, sr));
        i1 = std::max(i1, i0);
      }
      prev_cut = i1;
    } else {
      const double pad = cfg.split_point.pad;
      const double word_start = words[token_begin].t_start;
      const double word_end = words[token_end - 1].t_end;
      const double left_limit = token_begin == 0 ? 0.0 : words[token_begin - 1].t_end;
      const double right_limit = last ? clip.duration() : words[token_end].t_start;
      i0 = sample_index(std::max(word_start - pad, left_limit), sr);
      i1 = std::min(total_samples, sample_index(std::min(word_end + pad, right_limit), sr));
    }
    if (i0 >= i1)
      throw ValidationError("utterance '" + utt.id + "': degenerate cut for IPU " +
                            std::to_string(i));

    IpuRecord rec;
    rec.parent_id = utt.id;
    rec.index = i;
    rec.position = detail::position_of(i, n_ipus);
    rec.tokens.assign(utt.tokens.begin() + static_cast<std::ptrdiff_t>(token_begin),
                      utt.tokens.begin() + static_cast<std::ptrdiff_t>(token_end));
    rec.t_start = static_cast<double>(i0) / sr;
    rec.t_end = static_cast<double>(i1) / sr;
    out.records.push_back(std::move(rec));
    out.clips.push_back(detail::slice_by_index(clip, i0, i1));
    token_begin = token_end;
  }
  return out;
}

// Fixed-bin histogram: [0, 2.0) seconds in 0.05 s bins plus an overflow bin.
struct DurationHistogram {
  static constexpr double kBinWidth = 0.05;
  static constexpr std::size_t kBins = 40;
  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(kBins, 0);
  std::uint64_t overflow = 0;

  void add(double seconds) {
    // Same sub-sample slop as the threshold tests: a duration sitting a few
    // ulps under a bin edge belongs to the upper bin.
    const auto bin = static_cast<std::size_t>(std::floor(seconds / kBinWidth + 1e-9));
    if (seconds >= 0 && bin < kBins)
      ++counts[bin];
    else
      ++overflow;
  }
  void merge(const DurationHistogram& o) {
    for (std::size_t i = 0; i < kBins; ++i) counts[i] += o.counts[i];
    overflow += o.overflow;
  }
  json to_json() const {
    return json{{"bin_width", kBinWidth}, {"n_bins", kBins}, {"counts", counts}, {"overflow", overflow}};
  }
};

struct SkippedUtterance {
  std::string id;
  std::string reason;
};

struct ExtractionReport {
  std::size_t n_utterances = 0;
  std::size_t n_processed = 0;
  std::size_t n_ipus = 0;
  std::size_t n_boundaries = 0;
  std::vector<SkippedUtterance> skipped;
  DurationHistogram boundary_durations;
  DurationHistogram pause_durations;  // all surviving (>= min_sp) intra-utterance pauses
  std::optional<DurationSummary> sentence_durations;
  std::optional<DurationSummary> ipu_durations;
  // Input order; one entry per processed utterance.
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> boundaries_by_utterance;

  json to_json() const {
    json j;
    j["n_utterances"] = n_utterances;
    j["n_processed"] = n_processed;
    j["n_skipped"] = skipped.size();
    j["n_ipus"] = n_ipus;
    j["n_boundaries"] = n_boundaries;
    json sk = json::array();
    for (const auto& s : skipped) sk.push_back({{"id", s.id}, {"reason", s.reason}});
    j["skipped"] = sk;
    j["boundary_duration_histogram"] = boundary_durations.to_json();
    j["pause_duration_histogram"] = pause_durations.to_json();
    j["sentence_durations"] = sentence_durations ? sentence_durations->to_json() : json(nullptr);
    j["ipu_durations"] = ipu_durations ? ipu_durations->to_json() : json(nullptr);
    json per = json::object();
    for (const auto& [id, bs] : boundaries_by_utterance) {
      json arr = json::array();
      for (const auto& [s, e] : bs) arr.push_back({s, e});
      per[id] = arr;
    }
    j["boundaries"] = per;
    return j;
  }
};

struct CorpusExtraction {
  Manifest ipu_manifest;  // kind == ipu
  ExtractionReport report;
};

// Loads the audio of one utterance.
using AudioLoader = std::function<AudioClip(const Utterance&)>;
// Stores one spliced clip and returns the path recorded in the manifest.
// Called from worker threads (distinct records only) when jobs > 1.
using ClipSink = std::function<std::string(const IpuRecord&, const AudioClip&)>;

// Whole-corpus extraction. Utterances without an alignment (or failing
// validation) are listed in the report and skipped; the rest are processed,
// concurrently when jobs > 1. Output order follows the input manifest.
inline CorpusExtraction extract_corpus(const Manifest& sentences,
                                       const std::map<std::string, AlignmentTrack>& aligns,
                                       const ExtractConfig& cfg, const AudioLoader& load_audio,
                                       const ClipSink& store_clip, unsigned jobs = 1) {
  cfg.validate();
  if (sentences.kind != ManifestKind::sentence)
    throw ValidationError("extract_corpus needs a sentence manifest");
  sentences.validate();

  struct PerUtterance {
    bool ok = false;
    std::string skip_reason;
    std::vector<IpuRecord> records;
    std::vector<std::pair<double, double>> boundaries;
    std::vector<double> pause_durs;
    double sentence_duration = 0;
  };
  const std::size_t n = sentences.sentences.size();
  std::vector<PerUtterance> results(n);

  auto process = [&](std::size_t idx) {
    const Utterance& utt = sentences.sentences[idx];
    PerUtterance& r = results[idx];
    auto it = aligns.find(utt.id);
    if (it == aligns.end()) {
      r.skip_reason = "missing alignment";
      return;
    }
    try {
      const AudioClip clip = load_audio(utt);
      IpuExtraction ex = extract_ipus(utt, clip, it->second, cfg);
      for (std::size_t k = 0; k < ex.records.size(); ++k) {
        ex.records[k].audio_path = store_clip(ex.records[k], ex.clips[k]);
        ex.records[k].validate();
      }
      for (const auto& b : find_ipu_boundaries(it->second, cfg).boundaries)
        r.boundaries.emplace_back(b.t_start, b.t_end);
      for (const auto& p : collect_pauses(it->second))
        if (p.duration() >= cfg.min_sp - kTimeEps) r.pause_durs.push_back(p.duration());
      r.records = std::move(ex.records);
      r.sentence_duration = utt.duration;
      r.ok = true;
    } catch (const std::exception& e) {
      r.skip_reason = e.what();
    }
  };

  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned n_workers = std::min<unsigned>(jobs, static_cast<unsigned>(n));
    workers.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) process(i);
      });
    for (auto& w : workers) w.join();
  }

  CorpusExtraction out;
  out.ipu_manifest.kind = ManifestKind::ipu;
  out.report.n_utterances = n;
  std::vector<double> sentence_durs, ipu_durs;
  for (std::size_t i = 0; i < n; ++i) {
    PerUtterance& r = results[i];
    const std::string& id = sentences.sentences[i].id;
    if (!r.ok) {
      out.report.skipped.push_back({id, r.skip_reason});
      continue;
    }
    ++out.report.n_processed;
    out.report.n_boundaries += r.boundaries.size();
    for (const auto& [s, e] : r.boundaries) out.report.boundary_durations.add(e - s);
    for (double d : r.pause_durs) out.report.pause_durations.add(d);
    out.report.boundaries_by_utterance.emplace_back(id, std::move(r.boundaries));
    sentence_durs.push_back(r.sentence_duration);
    for (auto& rec : r.records) {
      ipu_durs.push_back(rec.t_end - rec.t_start);
      out.ipu_manifest.ipus.push_back(std::move(rec));
    }
  }
  out.report.n_ipus = out.ipu_manifest.ipus.size();
  if (!sentence_durs.empty()) out.report.sentence_durations = duration_summary(sentence_durs);
  if (!ipu_durs.empty()) out.report.ipu_durations = duration_summary(ipu_durs);
  return out;
}

}  // namespace pausecut
