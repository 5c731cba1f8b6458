#pragma once

#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pausecut/common.hpp"
#include "pausecut/corpus.hpp"

namespace pausecut {

// One labelled stretch of the waveform: a word or a pause.
struct Segment {
  std::string label;
  double t_start = 0;
  double t_end = 0;

  bool operator==(const Segment&) const = default;
};

inline const std::set<std::string>& default_pause_labels() {
  static const std::set<std::string> labels = {"sp", "sil", "pau", ""};
  return labels;
}

// Time-ordered, non-overlapping labelled segments covering an utterance.
// Gaps between consecutive segments are legal and treated as implicit pauses
// downstream (some aligners omit silence intervals).
struct AlignmentTrack {
  std::vector<Segment> segments;
  std::set<std::string> pause_labels = default_pause_labels();

  bool is_pause(const std::string& label) const { return pause_labels.count(label) > 0; }

  // Word labels in order, pauses skipped.
  std::vector<std::string> word_labels() const {
    std::vector<std::string> out;
    for (const auto& s : segments)
      if (!is_pause(s.label)) out.push_back(s.label);
    return out;
  }

  double end_time() const { return segments.empty() ? 0.0 : segments.back().t_end; }

  void validate() const {
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      if (!(s.t_start >= 0))
        throw ValidationError("segment " + std::to_string(i) + " has negative start time");
      if (!(s.t_start <= s.t_end))
        throw ValidationError("segment " + std::to_string(i) + " has t_start > t_end");
      if (trim(s.label).empty() && !is_pause(s.label))
        throw ValidationError("segment " + std::to_string(i) + " has a blank non-pause label");
      if (i > 0 && segments[i - 1].t_end > s.t_start)
        throw ValidationError("segment " + std::to_string(i) + " overlaps its predecessor");
    }
  }

  bool operator==(const AlignmentTrack& o) const { return segments == o.segments; }
};

enum class TimeUnit { seconds, htk_100ns };

// HTK time unit: 100 ns ticks, 10^7 per second.
inline constexpr double kHtkTicksPerSecond = 1e7;

// Parses an HTK-style label file: one "start end label" triple per non-blank
// line. Times are converted to seconds and monotonicity is validated.
inline AlignmentTrack parse_lab(std::istream& in, TimeUnit unit) {
  AlignmentTrack track;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    std::istringstream fields{std::string(t)};
    std::string start_s, end_s;
    if (!(fields >> start_s >> end_s))
      throw ParseError("expected 'start end label'", lineno);
    std::string label;
    std::getline(fields, label);
    label = std::string(trim(label));
    if (label.empty()) throw ParseError("expected 'start end label'", lineno);
    double t0 = parse_double(start_s, lineno);
    double t1 = parse_double(end_s, lineno);
    if (unit == TimeUnit::htk_100ns) {
      t0 /= kHtkTicksPerSecond;
      t1 /= kHtkTicksPerSecond;
    }
    if (t0 < 0 || t1 < 0) throw ParseError("negative time", lineno);
    if (t0 > t1) throw ParseError("start time after end time", lineno);
    if (!track.segments.empty() && track.segments.back().t_end > t0)
      throw ParseError("overlap with previous segment", lineno);
    track.segments.push_back({std::move(label), t0, t1});
  }
  if (in.bad()) throw IoError("failed reading label file");
  return track;
}

// Canonical .lab form of a track; parse_lab(format_lab(t)) == t in seconds
// mode. HTK mode writes integer tick counts.
inline void format_lab(const AlignmentTrack& track, std::ostream& out,
                       TimeUnit unit = TimeUnit::seconds) {
  for (const auto& s : track.segments) {
    if (unit == TimeUnit::seconds)
      out << format_double(s.t_start) << ' ' << format_double(s.t_end) << ' ' << s.label << '\n';
    else
      out << static_cast<long long>(std::llround(s.t_start * kHtkTicksPerSecond)) << ' '
          << static_cast<long long>(std::llround(s.t_end * kHtkTicksPerSecond)) << ' '
          << s.label << '\n';
  }
  if (!out) throw IoError("failed writing label file");
}

namespace detail {

// "key = value" on a long-format TextGrid line; returns false if the line
// has no '='.
inline bool textgrid_kv(std::string_view line, std::string& key, std::string& value) {
  auto eq = line.find('=');
  if (eq == std::string_view::npos) return false;
  key = std::string(trim(line.substr(0, eq)));
  value = std::string(trim(line.substr(eq + 1)));
  return true;
}

// Strips the surrounding quotes of a Praat string and undoubles "" escapes.
inline std::string textgrid_unquote(const std::string& v, std::size_t lineno) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    throw ParseError("expected a quoted string, got '" + v + "'", lineno);
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '"' && i + 2 < v.size() && v[i + 1] == '"') ++i;
    out += v[i];
  }
  return out;
}

}  // namespace detail

// Parses the named interval tier of a long-format (UTF-8) TextGrid into a
// track. Empty-text intervals become the empty-string pause marker.
inline AlignmentTrack parse_textgrid(std::istream& in, const std::string& tier_name) {
  std::vector<std::string> lines;
  std::string raw;
  while (std::getline(in, raw)) lines.push_back(raw);
  if (in.bad()) throw IoError("failed reading TextGrid");

  // Strip a UTF-8 BOM if present.
  if (!lines.empty() && lines[0].size() >= 3 && lines[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    lines[0].erase(0, 3);

  std::size_t i = 0;
  auto next_nonblank = [&]() -> std::string_view {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    return i < lines.size() ? trim(lines[i]) : std::string_view{};
  };
  auto header = next_nonblank();
  if (header.find("ooTextFile") == std::string_view::npos)
    throw ParseError("not an ooTextFile TextGrid", i + 1);
  ++i;
  auto objclass = next_nonblank();
  if (objclass.find("TextGrid") == std::string_view::npos)
    throw ParseError("object class is not TextGrid", i + 1);
  ++i;

  std::string key, value;
  std::string cur_class, cur_name;
  bool in_wanted_tier = false;
  long declared = -1;
  std::vector<Segment> segments;
  bool found = false;
  double xmin = 0, xmax = 0;
  bool have_xmin = false, have_xmax = false;

  auto flush_interval = [&](std::size_t lineno) {
    if (!have_xmin || !have_xmax) throw ParseError("interval missing xmin/xmax", lineno);
    have_xmin = have_xmax = false;
  };

  for (; i < lines.size(); ++i) {
    auto t = trim(lines[i]);
    if (t.empty()) continue;
    const std::size_t lineno = i + 1;
    if (t.rfind("item", 0) == 0 && t.find('[') != std::string_view::npos &&
        t.find("[]") == std::string_view::npos) {
      // New tier block begins.
      if (in_wanted_tier) break;
      cur_class.clear();
      cur_name.clear();
      continue;
    }
    if (t.rfind("intervals [", 0) == 0) {
      if (in_wanted_tier && have_xmin && have_xmax)
        throw ParseError("interval missing text", lineno);
      continue;
    }
    if (t.rfind("points [", 0) == 0) continue;
    if (!detail::textgrid_kv(t, key, value)) continue;

    if (key == "class") {
      cur_class = detail::textgrid_unquote(value, lineno);
    } else if (key == "name") {
      cur_name = detail::textgrid_unquote(value, lineno);
      if (cur_name == tier_name) {
        if (cur_class != "IntervalTier")
          throw ParseError("tier '" + tier_name + "' is a point tier", lineno);
        in_wanted_tier = true;
        found = true;
      }
    } else if (key == "intervals: size" || key == "points: size") {
      if (in_wanted_tier) {
        if (key == "points: size")
          throw ParseError("tier '" + tier_name + "' is a point tier", lineno);
        declared = std::lround(parse_double(value, lineno));
        if (declared < 0) throw ParseError("negative interval count", lineno);
      }
    } else if (in_wanted_tier && key == "xmin" && declared >= 0) {
      xmin = parse_double(value, lineno);
      have_xmin = true;
    } else if (in_wanted_tier && key == "xmax" && declared >= 0) {
      xmax = parse_double(value, lineno);
      have_xmax = true;
    } else if (in_wanted_tier && key == "text") {
      if (!have_xmin || !have_xmax) throw ParseError("text outside an interval", lineno);
      segments.push_back({detail::textgrid_unquote(value, lineno), xmin, xmax});
      flush_interval(lineno);
    }
  }

  if (!found) throw ParseError("tier not found: '" + tier_name + "'");
  if (declared < 0) throw ParseError("tier '" + tier_name + "' has no interval count");
  if (static_cast<long>(segments.size()) != declared)
    throw ParseError("tier '" + tier_name + "' declares " + std::to_string(declared) +
                     " intervals but " + std::to_string(segments.size()) + " are present");

  AlignmentTrack track;
  track.segments = std::move(segments);
  track.validate();
  return track;
}

// Checks that the track's word labels equal the utterance tokens and that the
// track ends within `tolerance` seconds of the utterance duration. Returns
// the track untouched so calls can be chained.
inline const AlignmentTrack& validate_alignment(const AlignmentTrack& track,
                                                const Utterance& utt,
                                                double tolerance) {
  track.validate();
  const auto words = track.word_labels();
  const std::size_t n = std::min(words.size(), utt.tokens.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (words[i] != utt.tokens[i])
      throw ValidationError("token mismatch at index " + std::to_string(i) + ": expected '" +
                            utt.tokens[i] + "', aligned '" + words[i] + "'");
  }
  if (words.size() != utt.tokens.size())
    throw ValidationError("token mismatch at index " + std::to_string(n) + ": " +
                          std::to_string(utt.tokens.size()) + " tokens vs " +
                          std::to_string(words.size()) + " aligned words");
  const double end = track.end_time();
  if (std::abs(end - utt.duration) > tolerance)
    throw ValidationError("duration mismatch: track ends at " + format_double(end) +
                          " s, utterance lasts " + format_double(utt.duration) + " s");
  return track;
}

}  // namespace pausecut
