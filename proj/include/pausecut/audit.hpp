#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pausecut/common.hpp"

namespace pausecut {

enum class EditKind { match, substitute, insert, erase };

// One step of a reference/hypothesis alignment. ref_index indexes the
// reference token consumed (match/substitute/erase), hyp_index the
// hypothesis token emitted (match/substitute/insert).
struct EditOp {
  EditKind kind = EditKind::match;
  std::size_t ref_index = 0;
  std::size_t hyp_index = 0;
  bool operator==(const EditOp&) const = default;
};

struct EditScript {
  std::vector<EditOp> ops;

  std::size_t cost() const {
    std::size_t c = 0;
    for (const auto& op : ops) c += op.kind != EditKind::match;
    return c;
  }
};

// Minimal-cost (unit-cost Levenshtein) alignment of hypothesis to reference.
// Ties break deterministically: match > substitute > delete > insert.
inline EditScript align_tokens(const std::vector<std::string>& ref,
                               const std::vector<std::string>& hyp) {
  const std::size_t nr = ref.size(), nh = hyp.size();
  // dp[i][j] = cost of aligning ref[i..] with hyp[j..].
  std::vector<std::vector<std::size_t>> dp(nr + 1, std::vector<std::size_t>(nh + 1));
  for (std::size_t i = 0; i <= nr; ++i) dp[i][nh] = nr - i;
  for (std::size_t j = 0; j <= nh; ++j) dp[nr][j] = nh - j;
  for (std::size_t i = nr; i-- > 0;) {
    for (std::size_t j = nh; j-- > 0;) {
      const std::size_t diag = dp[i + 1][j + 1] + (ref[i] == hyp[j] ? 0 : 1);
      dp[i][j] = std::min({diag, dp[i + 1][j] + 1, dp[i][j + 1] + 1});
    }
  }

  EditScript script;
  std::size_t i = 0, j = 0;
  while (i < nr || j < nh) {
    if (i < nr && j < nh && ref[i] == hyp[j] && dp[i][j] == dp[i + 1][j + 1]) {
      script.ops.push_back({EditKind::match, i, j});
      ++i, ++j;
    } else if (i < nr && j < nh && dp[i][j] == dp[i + 1][j + 1] + 1) {
      script.ops.push_back({EditKind::substitute, i, j});
      ++i, ++j;
    } else if (i < nr && dp[i][j] == dp[i + 1][j] + 1) {
      script.ops.push_back({EditKind::erase, i, 0});
      ++i;
    } else {
      script.ops.push_back({EditKind::insert, 0, j});
      ++j;
    }
  }
  return script;
}

// Category totals in the Table-III sense; aggregate over a test set by +=.
struct ErrorCounts {
  std::uint64_t repetitions = 0;
  std::uint64_t skips = 0;
  std::uint64_t other_insertions = 0;
  std::uint64_t substitutions = 0;
  std::uint64_t n_utterances = 0;

  ErrorCounts& operator+=(const ErrorCounts& o) {
    repetitions += o.repetitions;
    skips += o.skips;
    other_insertions += o.other_insertions;
    substitutions += o.substitutions;
    n_utterances += o.n_utterances;
    return *this;
  }
};

// Classifies one utterance's edit script: an inserted token equal to the
// hypothesis token emitted just before it is a repetition (a run of k
// duplicate inserts counts k); every deletion is a skip.
inline ErrorCounts count_errors(const EditScript& script, const std::vector<std::string>& ref,
                                const std::vector<std::string>& hyp) {
  ErrorCounts counts;
  counts.n_utterances = 1;
  std::size_t i = 0, j = 0;
  for (const auto& op : script.ops) {
    switch (op.kind) {
      case EditKind::match:
        if (op.ref_index != i || op.hyp_index != j || i >= ref.size() || j >= hyp.size() ||
            ref[i] != hyp[j])
          throw ValidationError("edit script does not match the token pair");
        ++i, ++j;
        break;
      case EditKind::substitute:
        if (op.ref_index != i || op.hyp_index != j || i >= ref.size() || j >= hyp.size())
          throw ValidationError("edit script does not match the token pair");
        ++counts.substitutions;
        ++i, ++j;
        break;
      case EditKind::erase:
        if (op.ref_index != i || i >= ref.size())
          throw ValidationError("edit script does not match the token pair");
        ++counts.skips;
        ++i;
        break;
      case EditKind::insert:
        if (op.hyp_index != j || j >= hyp.size())
          throw ValidationError("edit script does not match the token pair");
        if (j > 0 && hyp[j] == hyp[j - 1])
          ++counts.repetitions;
        else
          ++counts.other_insertions;
        ++j;
        break;
    }
  }
  if (i != ref.size() || j != hyp.size())
    throw ValidationError("edit script does not cover the token pair");
  return counts;
}

// Per-category percentages: category totals over utterance count.
struct ErrorRates {
  double repetitions_pct = 0;
  double skips_pct = 0;
  double other_insertions_pct = 0;
  double substitutions_pct = 0;
  // Share of utterances budgeted to wrong end-of-utterance behavior,
  // computed as (repetitions + skips) / n.
  double incorrect_eou_pct = 0;

  json to_json() const {
    return json{{"repetitions_pct", repetitions_pct},
                {"skips_pct", skips_pct},
                {"other_insertions_pct", other_insertions_pct},
                {"substitutions_pct", substitutions_pct},
                {"incorrect_eou_pct", incorrect_eou_pct}};
  }
};

inline ErrorRates error_rates(const ErrorCounts& counts) {
  if (counts.n_utterances == 0) throw ValidationError("error_rates needs n_utterances > 0");
  const auto n = static_cast<double>(counts.n_utterances);
  ErrorRates r;
  r.repetitions_pct = round2(100.0 * static_cast<double>(counts.repetitions) / n);
  r.skips_pct = round2(100.0 * static_cast<double>(counts.skips) / n);
  r.other_insertions_pct = round2(100.0 * static_cast<double>(counts.other_insertions) / n);
  r.substitutions_pct = round2(100.0 * static_cast<double>(counts.substitutions) / n);
  r.incorrect_eou_pct =
      round2(100.0 * static_cast<double>(counts.repetitions + counts.skips) / n);
  return r;
}

enum class EouStatus { on_time, early, late, no_eou };

inline std::string to_string(EouStatus s) {
  switch (s) {
    case EouStatus::on_time: return "on_time";
    case EouStatus::early: return "early";
    case EouStatus::late: return "late";
    case EouStatus::no_eou: return "no_eou";
  }
  throw Error("bad EouStatus");
}

struct EouVerdict {
  EouStatus status = EouStatus::no_eou;
  std::optional<std::size_t> crossing_frame;
  // Signed crossing - expected distance in frames; 0 when no crossing.
  long offset_frames = 0;

  json to_json() const {
    json j{{"status", to_string(status)}, {"offset_frames", offset_frames}};
    j["crossing_frame"] = crossing_frame ? json(*crossing_frame) : json(nullptr);
    return j;
  }
};

// Audits a decoder stop-probability trace: the first frame at or above
// `threshold` is the end-of-utterance prediction, judged against
// expected_frame with a +-tolerance band.
inline EouVerdict eou_audit(const std::vector<double>& stop_probs, std::size_t expected_frame,
                            double threshold, std::size_t tolerance) {
  if (stop_probs.empty()) throw ValidationError("eou_audit needs a non-empty trace");
  if (!(threshold > 0 && threshold < 1)) throw ValidationError("threshold must be in (0, 1)");
  for (double p : stop_probs)
    if (!(p >= 0 && p <= 1)) throw ValidationError("stop probabilities must be in [0, 1]");

  EouVerdict v;
  for (std::size_t f = 0; f < stop_probs.size(); ++f) {
    if (stop_probs[f] >= threshold) {
      v.crossing_frame = f;
      v.offset_frames = static_cast<long>(f) - static_cast<long>(expected_frame);
      if (std::llabs(v.offset_frames) <= static_cast<long long>(tolerance))
        v.status = EouStatus::on_time;
      else
        v.status = v.offset_frames < 0 ? EouStatus::early : EouStatus::late;
      return v;
    }
  }
  v.status = EouStatus::no_eou;
  return v;
}

}  // namespace pausecut
