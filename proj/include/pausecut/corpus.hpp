#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pausecut/common.hpp"

namespace pausecut {

// One corpus item: the sentence-level <text, audio> training pair.
struct Utterance {
  std::string id;
  std::vector<std::string> tokens;
  std::string audio_path;
  int sample_rate = 0;  // Hz
  double duration = 0;  // seconds

  void validate() const {
    if (id.empty()) throw ValidationError("utterance has empty id");
    if (tokens.empty()) throw ValidationError("utterance '" + id + "' has no tokens");
    if (sample_rate <= 0) throw ValidationError("utterance '" + id + "' has non-positive sample_rate");
    if (!(duration >= 0)) throw ValidationError("utterance '" + id + "' has negative duration");
  }
  bool operator==(const Utterance&) const = default;
};

enum class IpuPosition { first, middle, last, only };

inline std::string to_string(IpuPosition p) {
  switch (p) {
    case IpuPosition::first: return "first";
    case IpuPosition::middle: return "middle";
    case IpuPosition::last: return "last";
    case IpuPosition::only: return "only";
  }
  throw Error("bad IpuPosition");
}

inline IpuPosition ipu_position_from_string(std::string_view s) {
  if (s == "first") return IpuPosition::first;
  if (s == "middle") return IpuPosition::middle;
  if (s == "last") return IpuPosition::last;
  if (s == "only") return IpuPosition::only;
  throw ValidationError("unknown position '" + std::string(s) + "'");
}

// One extracted inter-pausal unit of a parent utterance.
struct IpuRecord {
  std::string parent_id;
  std::size_t index = 0;  // 0-based ordinal within the parent
  IpuPosition position = IpuPosition::only;
  std::vector<std::string> tokens;
  double t_start = 0;  // seconds within parent audio
  double t_end = 0;
  std::string audio_path;  // spliced clip

  // Stable identifier used in map files and default clip names.
  std::string id() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_ipu%03zu", index);
    return parent_id + buf;
  }

  void validate() const {
    if (parent_id.empty()) throw ValidationError("ipu record has empty parent_id");
    if (tokens.empty()) throw ValidationError("ipu '" + id() + "' has no tokens");
    if (!(t_start < t_end)) throw ValidationError("ipu '" + id() + "' has t_start >= t_end");
  }
  bool operator==(const IpuRecord&) const = default;
};

enum class ManifestKind { sentence, ipu };

// Homogeneous, ordered listing of corpus records. Exactly one of the two
// record vectors is populated, selected by `kind`.
struct Manifest {
  ManifestKind kind = ManifestKind::sentence;
  std::vector<Utterance> sentences;
  std::vector<IpuRecord> ipus;

  std::size_t size() const {
    return kind == ManifestKind::sentence ? sentences.size() : ipus.size();
  }
  bool empty() const { return size() == 0; }

  static Manifest of_sentences(std::vector<Utterance> utts) {
    Manifest m;
    m.kind = ManifestKind::sentence;
    m.sentences = std::move(utts);
    return m;
  }
  static Manifest of_ipus(std::vector<IpuRecord> records) {
    Manifest m;
    m.kind = ManifestKind::ipu;
    m.ipus = std::move(records);
    return m;
  }

  // Checks per-record invariants plus the cross-record ones: unique ids for
  // sentence manifests, per-parent index contiguity for ipu manifests.
  void validate() const {
    if (kind == ManifestKind::sentence) {
      if (!ipus.empty()) throw ValidationError("sentence manifest carries ipu records");
      std::set<std::string> seen;
      for (const auto& u : sentences) {
        u.validate();
        if (!seen.insert(u.id).second)
          throw ValidationError("duplicate id '" + u.id + "'");
      }
    } else {
      if (!sentences.empty()) throw ValidationError("ipu manifest carries sentence records");
      std::unordered_map<std::string, std::size_t> next;  // parent -> expected next index
      for (const auto& r : ipus) {
        r.validate();
        auto [it, inserted] = next.try_emplace(r.parent_id, 0);
        if (r.index != it->second)
          throw ValidationError("ipu indices of parent '" + r.parent_id +
                                "' are not contiguous: expected " + std::to_string(it->second) +
                                ", got " + std::to_string(r.index));
        it->second = r.index + 1;
      }
    }
  }

  bool operator==(const Manifest&) const = default;
};

namespace detail {

inline json utterance_to_json(const Utterance& u) {
  json j;
  j["kind"] = "sentence";
  j["id"] = u.id;
  j["tokens"] = u.tokens;
  j["audio_path"] = u.audio_path;
  j["sample_rate"] = u.sample_rate;
  j["duration"] = u.duration;
  return j;
}

inline json ipu_to_json(const IpuRecord& r) {
  json j;
  j["kind"] = "ipu";
  j["parent_id"] = r.parent_id;
  j["index"] = r.index;
  j["position"] = to_string(r.position);
  j["tokens"] = r.tokens;
  j["t_start"] = r.t_start;
  j["t_end"] = r.t_end;
  j["audio_path"] = r.audio_path;
  return j;
}

inline const json& require_field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("missing field \"") + key + "\"", line);
  return *it;
}

inline Utterance utterance_from_json(const json& j, std::size_t line) {
  Utterance u;
  u.id = require_field(j, "id", line).get<std::string>();
  u.tokens = require_field(j, "tokens", line).get<std::vector<std::string>>();
  u.audio_path = require_field(j, "audio_path", line).get<std::string>();
  u.sample_rate = require_field(j, "sample_rate", line).get<int>();
  u.duration = require_field(j, "duration", line).get<double>();
  return u;
}

inline IpuRecord ipu_from_json(const json& j, std::size_t line) {
  IpuRecord r;
  r.parent_id = require_field(j, "parent_id", line).get<std::string>();
  r.index = require_field(j, "index", line).get<std::size_t>();
  r.position = ipu_position_from_string(require_field(j, "position", line).get<std::string>());
  r.tokens = require_field(j, "tokens", line).get<std::vector<std::string>>();
  r.t_start = require_field(j, "t_start", line).get<double>();
  r.t_end = require_field(j, "t_end", line).get<double>();
  r.audio_path = require_field(j, "audio_path", line).get<std::string>();
  return r;
}

}  // namespace detail

// Emits the manifest as JSON Lines, one record per line, keys in the schema
// order documented in the README. Returns the number of bytes written.
inline std::size_t write_manifest(const Manifest& m, std::ostream& out) {
  m.validate();
  std::size_t bytes = 0;
  auto emit = [&](const json& j) {
    std::string line = j.dump();
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    bytes += line.size();
  };
  if (m.kind == ManifestKind::sentence)
    for (const auto& u : m.sentences) emit(detail::utterance_to_json(u));
  else
    for (const auto& r : m.ipus) emit(detail::ipu_to_json(r));
  if (!out) throw IoError("failed writing manifest");
  return bytes;
}

// Reads a JSON Lines manifest. Rejects malformed lines (reporting the line
// number), mixed kinds, unknown kinds and duplicate ids.
inline Manifest read_manifest(std::istream& in) {
  Manifest m;
  bool kind_set = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", lineno);
    std::string kind = detail::require_field(j, "kind", lineno).get<std::string>();
    ManifestKind k;
    if (kind == "sentence")
      k = ManifestKind::sentence;
    else if (kind == "ipu")
      k = ManifestKind::ipu;
    else
      throw ParseError("unknown kind '" + kind + "'", lineno);
    if (!kind_set) {
      m.kind = k;
      kind_set = true;
    } else if (k != m.kind) {
      throw ParseError("mixed record kinds in one manifest", lineno);
    }
    try {
      if (k == ManifestKind::sentence)
        m.sentences.push_back(detail::utterance_from_json(j, lineno));
      else
        m.ipus.push_back(detail::ipu_from_json(j, lineno));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad field value: ") + e.what(), lineno);
    }
  }
  if (in.bad()) throw IoError("failed reading manifest");
  m.validate();
  return m;
}

// Deterministic shuffled split: a seeded Fisher-Yates permutation of the
// records, train = first round(fraction * N), val = the rest. The same
// (manifest, fraction, seed) always yields the same pair.
inline std::pair<Manifest, Manifest> split_train_val(const Manifest& m,
                                                     double train_fraction,
                                                     std::uint64_t seed) {
  if (m.empty()) throw ValidationError("cannot split an empty manifest");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ValidationError("train_fraction must be in (0, 1]");
  const std::size_t n = m.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Hand-rolled Fisher-Yates: std::shuffle's draw sequence is
  // implementation-defined, this one is reproducible everywhere.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Manifest train, val;
  train.kind = val.kind = m.kind;
  for (std::size_t i = 0; i < n; ++i) {
    Manifest& dst = i < n_train ? train : val;
    if (m.kind == ManifestKind::sentence)
      dst.sentences.push_back(m.sentences[order[i]]);
    else
      dst.ipus.push_back(m.ipus[order[i]]);
  }
  return {std::move(train), std::move(val)};
}

// Plain-text interop maps for common TTS training recipes:
// audio map lines are "<id> <audio_path>", text map lines are
// "<id> <space-joined tokens>".
inline void write_map_files(const Manifest& m, std::ostream& audio_map, std::ostream& text_map) {
  m.validate();
  auto emit = [&](const std::string& id, const std::string& path,
                  const std::vector<std::string>& tokens) {
    audio_map << id << ' ' << path << '\n';
    text_map << id << ' ' << join(tokens) << '\n';
  };
  if (m.kind == ManifestKind::sentence)
    for (const auto& u : m.sentences) emit(u.id, u.audio_path, u.tokens);
  else
    for (const auto& r : m.ipus) emit(r.id(), r.audio_path, r.tokens);
  if (!audio_map || !text_map) throw IoError("failed writing map files");
}

}  // namespace pausecut
