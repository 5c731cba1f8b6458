#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pausecut/common.hpp"
#include "pausecut/corpus.hpp"

namespace pausecut {

// Ranked list of words after which an IPU boundary is predicted; the first
// k entries are the active set.
struct BreakLexicon {
  std::vector<std::pair<std::string, std::uint64_t>> entries;  // count desc, word asc
  std::size_t k = 0;

  std::set<std::string> active_words() const {
    std::set<std::string> out;
    for (std::size_t i = 0; i < std::min(k, entries.size()); ++i)
      out.insert(entries[i].first);
    return out;
  }

  json to_json() const {
    json arr = json::array();
    for (std::size_t i = 0; i < std::min(k, entries.size()); ++i)
      arr.push_back({{"word", entries[i].first}, {"count", entries[i].second}});
    return arr;
  }

  static BreakLexicon from_json(const json& arr) {
    if (!arr.is_array()) throw ParseError("lexicon must be a JSON array of {word, count}");
    BreakLexicon lex;
    for (const auto& e : arr) {
      if (!e.contains("word") || !e.contains("count"))
        throw ParseError("lexicon entry missing \"word\" or \"count\"");
      lex.entries.emplace_back(e["word"].get<std::string>(), e["count"].get<std::uint64_t>());
    }
    lex.k = lex.entries.size();
    return lex;
  }
};

// Counts the final word of each non-terminal IPU (positions first/middle) and
// ranks by frequency. Sentence-final words are evidence of sentence ends, not
// internal breaks; pass include_terminal to count them anyway.
inline BreakLexicon build_break_lexicon(const Manifest& ipu_manifest, std::size_t k,
                                        bool include_terminal = false) {
  if (ipu_manifest.kind != ManifestKind::ipu)
    throw ValidationError("break lexicon needs an ipu manifest");
  if (ipu_manifest.empty()) throw ValidationError("break lexicon needs a non-empty manifest");
  if (k < 1) throw ValidationError("lexicon k must be at least 1");

  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : ipu_manifest.ipus) {
    const bool internal = r.position == IpuPosition::first || r.position == IpuPosition::middle;
    if (!internal && !include_terminal) continue;
    if (!r.tokens.empty()) ++counts[r.tokens.back()];
  }

  BreakLexicon lex;
  lex.entries.assign(counts.begin(), counts.end());
  std::sort(lex.entries.begin(), lex.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  lex.k = std::min(k, lex.entries.size());
  return lex;
}

// Punctuation that ends a synthesis unit; the Devanagari danda included.
inline const std::vector<std::string>& break_punctuation() {
  static const std::vector<std::string> marks = {",", ";", ":", ".", "?", "!", "\xE0\xA5\xA4"};
  return marks;
}

namespace detail {

// Strips trailing break punctuation; returns true if anything was removed.
inline bool strip_trailing_punct(std::string& token) {
  bool stripped = false;
  bool changed = true;
  while (changed && !token.empty()) {
    changed = false;
    for (const auto& mark : break_punctuation()) {
      if (token.size() >= mark.size() &&
          token.compare(token.size() - mark.size(), mark.size(), mark) == 0) {
        token.erase(token.size() - mark.size());
        stripped = changed = true;
        break;
      }
    }
  }
  return stripped;
}

}  // namespace detail

// Left-to-right merge of short groups: a group with fewer than min_words
// tokens joins the following group; a short final group joins backward.
inline std::vector<std::vector<std::string>> merge_short_groups(
    std::vector<std::vector<std::string>> groups, std::size_t min_words) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> acc;
  for (auto& g : groups) {
    acc.insert(acc.end(), g.begin(), g.end());
    if (acc.size() >= min_words) {
      out.push_back(std::move(acc));
      acc.clear();
    }
  }
  if (!acc.empty()) {
    if (out.empty())
      out.push_back(std::move(acc));
    else
      out.back().insert(out.back().end(), acc.begin(), acc.end());
  }
  return out;
}

// Same merge rule expressed on group sizes; used by the extraction side.
inline std::vector<std::size_t> merge_short_counts(const std::vector<std::size_t>& sizes,
                                                   std::size_t min_words) {
  std::vector<std::size_t> out;
  std::size_t acc = 0;
  for (std::size_t s : sizes) {
    acc += s;
    if (acc >= min_words) {
      out.push_back(acc);
      acc = 0;
    }
  }
  if (acc > 0) {
    if (out.empty())
      out.push_back(acc);
    else
      out.back() += acc;
  }
  return out;
}

// Splits tokens into synthesis units: first at punctuation (stripping the
// marks), then after active lexicon words, then merging units shorter than
// min_words into their successors.
inline std::vector<std::vector<std::string>> segment_text(const std::vector<std::string>& tokens,
                                                          const BreakLexicon& lexicon,
                                                          std::size_t min_words,
                                                          bool honor_punctuation) {
  if (tokens.empty()) throw ValidationError("segment_text needs a non-empty token list");
  if (min_words < 1) throw ValidationError("min_words must be at least 1");

  // Pass 1: punctuation splits.
  std::vector<std::vector<std::string>> pieces;
  std::vector<std::string> cur;
  for (const auto& raw : tokens) {
    std::string tok = raw;
    bool split_here = false;
    if (honor_punctuation) split_here = detail::strip_trailing_punct(tok);
    if (!tok.empty()) cur.push_back(std::move(tok));
    if (split_here && !cur.empty()) {
      pieces.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) pieces.push_back(std::move(cur));

  // Pass 2: lexicon splits within each piece.
  const auto active = lexicon.active_words();
  std::vector<std::vector<std::string>> segments;
  for (auto& piece : pieces) {
    std::vector<std::string> seg;
    for (auto& tok : piece) {
      const bool is_break = active.count(tok) > 0;
      seg.push_back(std::move(tok));
      if (is_break) {
        segments.push_back(std::move(seg));
        seg.clear();
      }
    }
    if (!seg.empty()) segments.push_back(std::move(seg));
  }

  // Pass 3: merge short units.
  return merge_short_groups(std::move(segments), min_words);
}

}  // namespace pausecut
