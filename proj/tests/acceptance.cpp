// Acceptance suite: runs every project acceptance criterion at its stated
// tolerance and prints one [PASS]/[FAIL] line per criterion. Exits nonzero
// if any criterion fails.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "pausecut/audio.hpp"
#include "pausecut/audit.hpp"
#include "pausecut/corpus.hpp"
#include "pausecut/extract.hpp"
#include "pausecut/phrase.hpp"
#include "pausecut/stats.hpp"
#include "pausecut/synth.hpp"

using namespace pausecut;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

// --- criterion bodies -------------------------------------------------------

// 1. Reference training times (5.36 -> 2.18, 6.23 -> 2.50 min/epoch): the
//    mean relative reduction is 59.60%.
void c1_reduction_autoregressive() {
  const auto t0 = Clock::now();
  const double pct = relative_reduction({{5.36, 2.18}, {6.23, 2.50}});
  const double elapsed = seconds_since(t0);
  require(std::llround(pct * 100) == 5960, "expected 59.60, got " + fmt(pct));
  require(elapsed < 1e-3, "took " + fmt(elapsed) + " s, budget 1 ms");
}

// 2. Reference training times (3.41 -> 3.13, 3.75 -> 3.29): 10.24%.
void c2_reduction_duration_informed() {
  const double pct = relative_reduction({{3.41, 3.13}, {3.75, 3.29}});
  require(std::llround(pct * 100) == 1024, "expected 10.24, got " + fmt(pct));
}

// 3. Per-category error rates: 28.25% / 2.50% / 1.50%, incorrect-EOU 30.75%.
void c3_error_rates() {
  ErrorCounts sentence;
  sentence.repetitions = 113;
  sentence.skips = 10;
  sentence.n_utterances = 400;
  const auto r = error_rates(sentence);
  require(r.repetitions_pct == 28.25, "repetitions: got " + fmt(r.repetitions_pct));
  require(r.skips_pct == 2.50, "skips: got " + fmt(r.skips_pct));
  require(r.incorrect_eou_pct == 30.75, "incorrect eou: got " + fmt(r.incorrect_eou_pct));

  ErrorCounts ipu;
  ipu.skips = 6;
  ipu.n_utterances = 400;
  require(error_rates(ipu).skips_pct == 1.50, "ipu skips: got " + fmt(error_rates(ipu).skips_pct));
}

// 4. Lossless splicing through real WAV files on a 50-utterance corpus.
void c4_lossless_splicing() {
  const auto t0 = Clock::now();
  testutil::TempDir dir("lossless");
  std::mt19937_64 rng(20250810);

  std::vector<Utterance> utts;
  std::map<std::string, AlignmentTrack> aligns;
  for (int i = 0; i < 50; ++i) {
    auto s = testutil::random_utterance("utt" + std::to_string(i), rng, 2, 14);
    auto out = std::ofstream(dir.path() / s.utt.audio_path, std::ios::binary);
    write_wav(s.clip, out);
    aligns[s.utt.id] = std::move(s.track);
    utts.push_back(std::move(s.utt));
  }
  const auto manifest = Manifest::of_sentences(std::move(utts));

  AudioLoader loader = [&](const Utterance& u) {
    std::ifstream in(dir.path() / u.audio_path, std::ios::binary);
    return read_wav(in);
  };
  ClipSink sink = [&](const IpuRecord& rec, const AudioClip& clip) {
    const auto p = dir.path() / (rec.id() + ".wav");
    std::ofstream out(p, std::ios::binary);
    write_wav(clip, out);
    return p.string();
  };

  ExtractConfig cfg;  // midpoint mode, T(sil) = 100 ms
  const auto result = extract_corpus(manifest, aligns, cfg, loader, sink, 4);
  require(result.report.skipped.empty(), "unexpected skips");

  for (const auto& utt : manifest.sentences) {
    std::ifstream oin(dir.path() / utt.audio_path, std::ios::binary);
    const auto original = read_wav(oin);
    std::vector<AudioClip> pieces;
    for (const auto& rec : result.ipu_manifest.ipus) {
      if (rec.parent_id != utt.id) continue;
      std::ifstream cin_(rec.audio_path, std::ios::binary);
      pieces.push_back(read_wav(cin_));
    }
    require(!pieces.empty(), utt.id + ": no IPU clips");
    const auto glued = concat_with_gaps(pieces, 0.0);
    require(glued.samples == original.samples, utt.id + ": reconstruction differs");
  }
  const double elapsed = seconds_since(t0);
  require(elapsed < 10.0, "took " + fmt(elapsed) + " s, budget 10 s");
}

// 5. T(sil) sweep: boundaries non-increasing, mean IPU duration non-decreasing,
//    and a pause of exactly T(sil) counts as a boundary.
void c5_threshold_sweep() {
  std::mt19937_64 rng(77);
  std::vector<testutil::SyntheticUtterance> corpus;
  for (int i = 0; i < 40; ++i)
    corpus.push_back(testutil::random_utterance("u" + std::to_string(i), rng, 2, 14));

  std::size_t prev_boundaries = SIZE_MAX;
  double prev_mean = 0.0;
  for (double t_sil : {0.1, 0.2, 0.3}) {
    ExtractConfig cfg;
    cfg.t_sil = t_sil;
    std::size_t boundaries = 0;
    std::vector<double> durs;
    for (const auto& s : corpus) {
      const auto ex = extract_ipus(s.utt, s.clip, s.track, cfg);
      boundaries += ex.records.size() - 1;
      for (const auto& r : ex.records) durs.push_back(r.t_end - r.t_start);
    }
    const double mean = duration_summary(durs).mean;
    require(boundaries <= prev_boundaries,
            "boundary count rose from " + std::to_string(prev_boundaries) + " to " +
                std::to_string(boundaries) + " at T(sil) = " + fmt(t_sil));
    require(prev_boundaries == SIZE_MAX || mean >= prev_mean - 1e-9,
            "mean IPU duration fell at T(sil) = " + fmt(t_sil));
    prev_boundaries = boundaries;
    prev_mean = mean;
  }

  // Exactly-at-threshold inclusion, with times that are not exactly
  // representable in binary (0.6 - 0.5 < 0.1 as raw doubles).
  AlignmentTrack track;
  track.segments = {{"w1", 0.0, 0.5}, {"sp", 0.5, 0.6}, {"w2", 0.6, 1.0}};
  ExtractConfig cfg;
  cfg.t_sil = 0.1;
  require(find_ipu_boundaries(track, cfg).size() == 1, "boundary at exactly T(sil) missed");
}

// 6. Token conservation: 1000 random utterances and 1000 random segmentations.
void c6_token_conservation() {
  std::mt19937_64 rng(606060);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = testutil::random_utterance("u", rng, 1, 12);
    ExtractConfig cfg;
    cfg.t_sil = 0.05 + static_cast<double>(rng() % 250) / 1000.0;
    if (rng() % 4 == 0) cfg.min_ipu_words = 1 + rng() % 3;
    const auto ex = extract_ipus(s.utt, s.clip, s.track, cfg);
    std::vector<std::string> flat;
    for (const auto& r : ex.records) flat.insert(flat.end(), r.tokens.begin(), r.tokens.end());
    require(flat == s.utt.tokens, "IPU tokens diverged on trial " + std::to_string(trial));
  }

  const std::vector<std::string> vocab{"ka", "se", "hai", "aur", "to", "me"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t n = 1 + rng() % 18;
    for (std::size_t i = 0; i < n; ++i) {
      std::string tok = vocab[rng() % vocab.size()];
      if (rng() % 6 == 0) tok += ",";
      tokens.push_back(std::move(tok));
    }
    BreakLexicon lex;
    lex.entries.emplace_back(vocab[rng() % vocab.size()], 1);
    lex.k = 1;
    const bool punct = rng() % 2 == 0;
    const auto segments = segment_text(tokens, lex, 1 + rng() % 4, punct);
    std::vector<std::string> expected;
    for (auto tok : tokens) {
      if (punct) detail::strip_trailing_punct(tok);
      if (!tok.empty()) expected.push_back(tok);
    }
    std::vector<std::string> flat;
    for (const auto& seg : segments) flat.insert(flat.end(), seg.begin(), seg.end());
    require(flat == expected, "segment tokens diverged on trial " + std::to_string(trial));
  }
}

// 7. The min-words merge rule, worked examples and the no-short-internal-
//    segment property.
void c7_min_word_merge() {
  BreakLexicon hai;
  hai.entries.emplace_back("hai", 1);
  hai.k = 1;

  auto seg1 = segment_text({"w1", "w2", "w3", "hai", "w4", "w5", "w6"}, hai, 3, true);
  require(seg1.size() == 2 && seg1[0].size() == 4 && seg1[1].size() == 3,
          "expected a 4/3 split");
  auto seg2 = segment_text({"w1", "hai", "w2", "w3", "w4"}, hai, 3, true);
  require(seg2.size() == 1 && seg2[0].size() == 5, "short first unit must merge forward");

  std::mt19937_64 rng(7007);
  const std::vector<std::string> vocab{"a", "b", "hai", "c"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t n = 1 + rng() % 16;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back(vocab[rng() % vocab.size()]);
    const std::size_t min_words = 1 + rng() % 4;
    const auto segments = segment_text(tokens, hai, min_words, true);
    for (std::size_t i = 0; i + 1 < segments.size(); ++i)
      require(segments[i].size() >= min_words, "internal segment under min_words");
    if (!segments.empty() && tokens.size() >= min_words)
      require(segments.back().size() >= min_words, "final segment under min_words");
  }
}

// 8. Gamma recovery within 3% for k in {0.5, 1, 2, 5} at n = 1e5.
void c8_gamma_recovery() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(888);
  for (double k : {0.5, 1.0, 2.0, 5.0}) {
    std::vector<double> xs(100000);
    for (auto& x : xs) x = testutil::sample_gamma(k, 1.7, rng);
    const auto fit = fit_gamma(xs);
    require(std::abs(fit.shape - k) / k <= 0.03,
            "k = " + fmt(k) + " recovered as " + fmt(fit.shape));
  }
  const double elapsed = seconds_since(t0);
  require(elapsed < 5.0, "took " + fmt(elapsed) + " s, budget 5 s");
}

// 9. Edit-script oracle: align_tokens cost equals exhaustive branch-and-bound
//    search on every pair of sequences of length <= 6 over {a, b, c}.
void c9_edit_oracle() {
  const auto t0 = Clock::now();
  std::vector<std::vector<std::string>> seqs;
  std::vector<std::string> cur;
  auto gen = [&](auto&& self, std::size_t depth) -> void {
    seqs.push_back(cur);
    if (depth == 6) return;
    for (const char* sym : {"a", "b", "c"}) {
      cur.emplace_back(sym);
      self(self, depth + 1);
      cur.pop_back();
    }
  };
  gen(gen, 0);
  require(seqs.size() == 1093, "sequence universe should have 1093 members");

  auto brute_cost = [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    std::size_t best = ref.size() + hyp.size();
    auto rec = [&](auto&& self, std::size_t i, std::size_t j, std::size_t cost) -> void {
      if (cost >= best) return;
      if (i == ref.size() && j == hyp.size()) {
        best = cost;
        return;
      }
      if (i < ref.size() && j < hyp.size())
        self(self, i + 1, j + 1, cost + (ref[i] == hyp[j] ? 0 : 1));
      if (i < ref.size()) self(self, i + 1, j, cost + 1);
      if (j < hyp.size()) self(self, i, j + 1, cost + 1);
    };
    rec(rec, 0, 0, 0);
    return best;
  };

  std::atomic<std::size_t> next{0};
  std::atomic<bool> ok{true};
  std::string first_failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < seqs.size() && ok.load();
         i = next.fetch_add(1)) {
      for (const auto& hyp : seqs) {
        const auto script = align_tokens(seqs[i], hyp);
        if (script.cost() != brute_cost(seqs[i], hyp)) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          ok.store(false);
          first_failure = "cost mismatch: ref=" + join(seqs[i]) + " hyp=" + join(hyp);
          return;
        }
      }
    }
  };
  std::vector<std::thread> threads;
  const unsigned n_threads = std::max(2u, std::thread::hardware_concurrency());
  for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  require(ok.load(), first_failure);
  const double elapsed = seconds_since(t0);
  require(elapsed < 30.0, "took " + fmt(elapsed) + " s, budget 30 s");
}

// 10. Sign-test p-values equal exhaustive binomial enumeration for all totals
//     up to 20, and the 9-1 example is significant.
void c10_binomial_oracle() {
  for (std::uint64_t n = 1; n <= 20; ++n) {
    std::vector<std::vector<double>> binom(n + 1);
    for (std::uint64_t r = 0; r <= n; ++r) {
      binom[r].assign(r + 1, 1.0);
      for (std::uint64_t c = 1; c < r; ++c) binom[r][c] = binom[r - 1][c - 1] + binom[r - 1][c];
    }
    for (std::uint64_t a = 0; a <= n; ++a) {
      const double lopsided = std::abs(2.0 * static_cast<double>(a) - static_cast<double>(n));
      double count = 0;
      for (std::uint64_t i = 0; i <= n; ++i)
        if (std::abs(2.0 * static_cast<double>(i) - static_cast<double>(n)) >= lopsided)
          count += binom[n][i];
      const double enumerated = count / std::exp2(static_cast<double>(n));
      const double computed = pc_tally(a, n - a, 1).p_value;
      require(computed == enumerated, "p mismatch at a=" + std::to_string(a) +
                                          " b=" + std::to_string(n - a));
    }
  }
  const auto nine_one = pc_tally(9, 1, 0);
  require(std::abs(nine_one.p_value - 0.021484375) < 1e-9,
          "(9,1) p = " + fmt(nine_one.p_value));
  require(nine_one.p_value < 0.05, "(9,1) should be significant at 0.05");
}

// 11. Hand-computed Laplace example scores -2.708 +- 1e-3; context
//     distributions sum to 1 +- 1e-9.
void c11_language_model() {
  const auto model = ngram_train({{"a", "b", "a", "b"}}, 2);
  const double ll = ngram_loglik(model, {"a", "b"});
  require(std::abs(ll - (-2.708)) < 1e-3, "loglik = " + fmt(ll));

  auto sum_for = [&](const std::vector<std::string>& ctx) {
    double s = 0;
    for (const auto& w : model.vocabulary()) s += model.prob(ctx, w);
    return s;
  };
  for (const auto& ctx : {std::vector<std::string>{NgramModel::kPad},
                          std::vector<std::string>{"a"},
                          std::vector<std::string>{"b"},
                          std::vector<std::string>{"unseen"}})
    require(std::abs(sum_for(ctx) - 1.0) <= 1e-9, "context distribution does not sum to 1");
}

// 12. End-to-end mock pipeline through the CLI: a 7-token sentence with a
//     1-word lexicon and gap 0.1 yields a 1.500 s WAV, byte-identical across
//     runs.
void c12_cli_pipeline() {
  testutil::TempDir dir("cli");
  const auto lex_path = dir.path() / "lexicon.json";
  {
    std::ofstream lex(lex_path);
    lex << R"([{"word":"brk","count":5}])";
  }
  auto wav_path = [&](int run) { return (dir.path() / ("out" + std::to_string(run) + ".wav")).string(); };
  for (int run = 1; run <= 2; ++run) {
    const std::string cmd = std::string(PAUSECUT_CLI_PATH) +
                            " synth --mock --text 'w1 w2 w3 brk w4 w5 w6' --lexicon " +
                            lex_path.string() + " --min-words 3 --gap 0.1 --output " +
                            wav_path(run) + " 2>/dev/null";
    require(std::system(cmd.c_str()) == 0, "synth run " + std::to_string(run) + " failed");
  }
  std::ifstream f1(wav_path(1), std::ios::binary), f2(wav_path(2), std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  require(b1.str().size() > 44, "first run produced no audio");
  require(b1.str() == b2.str(), "runs are not byte-identical");

  std::istringstream wav_in(b1.str());
  const auto clip = read_wav(wav_in);
  require(clip.samples.size() == 33075,
          "expected 33075 samples (1.500 s), got " + std::to_string(clip.samples.size()));
}

// 13. F0 sanity on pure tones: 220 Hz within 2 Hz, 100 Hz within 1 Hz.
void c13_f0_sanity() {
  const auto r220 = estimate_f0(testutil::sine_clip(220.0, 1.0), 60, 400, 0.040, 0.010, 0.30);
  require(r220.summary.has_value(), "220 Hz tone produced no voiced frames");
  require(std::abs(r220.summary->mean - 220.0) <= 2.0, "220 Hz read as " + fmt(r220.summary->mean));

  const auto r100 = estimate_f0(testutil::sine_clip(100.0, 1.0), 60, 400, 0.040, 0.010, 0.30);
  require(r100.summary.has_value(), "100 Hz tone produced no voiced frames");
  require(std::abs(r100.summary->mean - 100.0) <= 1.0, "100 Hz read as " + fmt(r100.summary->mean));
}

// 14. End-of-utterance traces: crossing at the expected frame is on_time,
//     crossing 22 frames past it is late(22).
void c14_eou_traces() {
  auto trace_at = [](std::size_t frame) {
    std::vector<double> t(300, 0.02);
    for (std::size_t f = frame; f < t.size(); ++f) t[f] = 0.97;
    return t;
  };
  const auto good = eou_audit(trace_at(230), 230, 0.5, 10);
  require(good.status == EouStatus::on_time, "expected on_time");
  const auto late = eou_audit(trace_at(252), 230, 0.5, 10);
  require(late.status == EouStatus::late, "expected late");
  require(late.offset_frames == 22, "expected late(22), got offset " +
                                        std::to_string(late.offset_frames));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "training-time reduction arithmetic: 59.60% on reference pairs", c1_reduction_autoregressive},
      {2, "training-time reduction arithmetic: 10.24% on reference pairs", c2_reduction_duration_informed},
      {3, "error rates 28.25% / 2.50% / 1.50%, incorrect-EOU 30.75%", c3_error_rates},
      {4, "lossless midpoint splicing across a 50-utterance corpus", c4_lossless_splicing},
      {5, "T(sil) sweep monotonicity and at-threshold inclusion", c5_threshold_sweep},
      {6, "token conservation on 1000 extractions and 1000 segmentations", c6_token_conservation},
      {7, "min-words merge rule, examples and property", c7_min_word_merge},
      {8, "Gamma shape recovery within 3% for k in {0.5, 1, 2, 5}", c8_gamma_recovery},
      {9, "edit-script cost equals brute force on all pairs up to length 6", c9_edit_oracle},
      {10, "sign-test p-values equal exhaustive enumeration up to n = 20", c10_binomial_oracle},
      {11, "Laplace LM hand example and unit-sum context distributions", c11_language_model},
      {12, "CLI mock synth: 1.500 s WAV, byte-identical across runs", c12_cli_pipeline},
      {13, "F0 on pure tones: 220 +- 2 Hz and 100 +- 1 Hz", c13_f0_sanity},
      {14, "EOU traces judged on_time and late(22)", c14_eou_traces},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    try {
      c.body();
      std::printf("[PASS] criterion %2d: %s (%.2f s)\n", c.id, c.name, seconds_since(t0));
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %2d: %s: %s\n", c.id, c.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
