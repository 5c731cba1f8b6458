// pausecut: IPU-based corpus preparation and segment-wise synthesis front-end.
//
// Subcommands mirror the two pipeline phases plus the measurement tooling:
//   extract      sentence manifest + alignments -> ipu manifest, clips, report
//   split        train/validation split of a manifest
//   lexicon      ipu manifest -> ranked break lexicon
//   segment      unpunctuated text -> synthesis units
//   synth        text -> WAV via a backend, segment by segment
//   stats        durations / gamma / reduction / pc / lm reports
//   audit        transcript error analysis and end-of-utterance traces
//   export-maps  manifest -> id->audio and id->text map files
//
// Exit status: 0 success, 1 partial failure (e.g. skipped utterances),
// 2 usage or input errors. JSON goes to --output (default stdout, "-");
// diagnostics go to stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pausecut/align.hpp"
#include "pausecut/audio.hpp"
#include "pausecut/audit.hpp"
#include "pausecut/corpus.hpp"
#include "pausecut/extract.hpp"
#include "pausecut/phrase.hpp"
#include "pausecut/stats.hpp"
#include "pausecut/synth.hpp"
#include "pausecut/synth_http.hpp"

namespace fs = std::filesystem;
using pausecut::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pausecut::IoError("cannot open " + path);
  return in;
}

std::ofstream open_output_file(const std::string& path) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pausecut::IoError("cannot write " + path);
  return out;
}

// "-" means stdout; everything else is a file path.
void emit_text(const std::string& dest, const std::string& payload) {
  if (dest == "-") {
    std::cout << payload;
    std::cout.flush();
    if (!std::cout) throw pausecut::IoError("failed writing to stdout");
    return;
  }
  auto out = open_output_file(dest);
  out << payload;
  if (!out) throw pausecut::IoError("failed writing " + dest);
}

void emit_json(const std::string& dest, const json& j) { emit_text(dest, j.dump(2) + "\n"); }

std::string slurp(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

pausecut::Manifest load_manifest(const std::string& path) {
  auto in = open_input(path);
  return pausecut::read_manifest(in);
}

std::vector<std::string> gather_tokens(const std::string& text, const std::string& text_file) {
  std::string raw = text;
  if (!text_file.empty()) {
    if (text_file == "-") {
      raw = slurp(std::cin);
    } else {
      auto in = open_input(text_file);
      raw = slurp(in);
    }
  }
  return pausecut::tokenize(raw);
}

pausecut::BreakLexicon load_lexicon(const std::string& path, std::size_t k) {
  pausecut::BreakLexicon lex;
  if (!path.empty()) {
    auto in = open_input(path);
    json j;
    try {
      j = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw pausecut::ParseError(path + ": " + e.what());
    }
    lex = pausecut::BreakLexicon::from_json(j);
  }
  if (k > 0) lex.k = std::min(k, lex.entries.size());
  return lex;
}

pausecut::SplitPoint parse_split_point(const std::string& spec) {
  if (spec == "midpoint") return pausecut::SplitPoint::midpoint();
  if (spec.rfind("trim:", 0) == 0)
    return pausecut::SplitPoint::trim(pausecut::parse_double(spec.substr(5)));
  throw pausecut::ValidationError("--split-point must be 'midpoint' or 'trim:PAD'");
}

std::vector<double> read_numbers(const std::string& path) {
  std::string raw;
  if (path == "-") {
    raw = slurp(std::cin);
  } else {
    auto in = open_input(path);
    raw = slurp(in);
  }
  std::vector<double> out;
  const auto trimmed = pausecut::trim(raw);
  if (!trimmed.empty() && trimmed.front() == '[') {
    for (const auto& v : json::parse(trimmed)) out.push_back(v.get<double>());
    return out;
  }
  std::istringstream in{raw};
  std::string tok;
  while (in >> tok) out.push_back(pausecut::parse_double(tok));
  return out;
}

std::vector<std::vector<std::string>> read_sentences(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = pausecut::tokenize(line);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

// ---------------------------------------------------------------- extract --

struct ExtractArgs {
  std::string manifest;
  std::string align_dir;
  std::string tier = "words";
  std::string time_unit = "seconds";
  std::string out_dir;
  std::string output;  // defaults to <out_dir>/ipus.jsonl
  std::string report;  // defaults to <out_dir>/report.json
  double t_sil = 0.100;
  double min_sp = 0.020;
  std::string split_point = "midpoint";
  std::size_t min_words = 0;  // 0 = no training-side merge
  unsigned jobs = std::thread::hardware_concurrency();
};

int run_extract(const ExtractArgs& args) {
  const auto manifest = load_manifest(args.manifest);
  if (manifest.kind != pausecut::ManifestKind::sentence)
    throw pausecut::ValidationError("extract needs a sentence manifest");

  pausecut::ExtractConfig cfg;
  cfg.t_sil = args.t_sil;
  cfg.min_sp = args.min_sp;
  cfg.split_point = parse_split_point(args.split_point);
  if (args.min_words > 0) cfg.min_ipu_words = args.min_words;
  cfg.validate();

  const auto unit =
      args.time_unit == "htk" ? pausecut::TimeUnit::htk_100ns : pausecut::TimeUnit::seconds;
  std::map<std::string, pausecut::AlignmentTrack> aligns;
  for (const auto& utt : manifest.sentences) {
    const fs::path lab = fs::path(args.align_dir) / (utt.id + ".lab");
    const fs::path grid = fs::path(args.align_dir) / (utt.id + ".TextGrid");
    if (fs::exists(lab)) {
      auto in = open_input(lab.string());
      try {
        aligns[utt.id] = pausecut::parse_lab(in, unit);
      } catch (const pausecut::Error& e) {
        std::cerr << "pausecut: " << lab.string() << ": " << e.what() << "\n";
      }
    } else if (fs::exists(grid)) {
      auto in = open_input(grid.string());
      try {
        aligns[utt.id] = pausecut::parse_textgrid(in, args.tier);
      } catch (const pausecut::Error& e) {
        std::cerr << "pausecut: " << grid.string() << ": " << e.what() << "\n";
      }
    }
  }

  const fs::path manifest_dir = fs::path(args.manifest).parent_path();
  const fs::path clip_dir = fs::path(args.out_dir) / "clips";
  fs::create_directories(clip_dir);

  pausecut::AudioLoader loader = [&](const pausecut::Utterance& utt) {
    fs::path p = utt.audio_path;
    if (p.is_relative()) p = manifest_dir / p;
    auto in = open_input(p.string());
    return pausecut::read_wav(in);
  };
  pausecut::ClipSink sink = [&](const pausecut::IpuRecord& rec, const pausecut::AudioClip& clip) {
    const fs::path p = clip_dir / (rec.id() + ".wav");
    auto out = open_output_file(p.string());
    pausecut::write_wav(clip, out);
    return p.string();
  };

  const auto result =
      pausecut::extract_corpus(manifest, aligns, cfg, loader, sink, std::max(1u, args.jobs));

  const std::string out_path =
      args.output.empty() ? (fs::path(args.out_dir) / "ipus.jsonl").string() : args.output;
  std::ostringstream body;
  pausecut::write_manifest(result.ipu_manifest, body);
  emit_text(out_path, body.str());

  const std::string report_path =
      args.report.empty() ? (fs::path(args.out_dir) / "report.json").string() : args.report;
  json report = result.report.to_json();
  report["config"] = {{"t_sil", cfg.t_sil},
                      {"min_sp", cfg.min_sp},
                      {"split_point", args.split_point},
                      {"min_ipu_words", args.min_words}};
  emit_json(report_path, report);

  for (const auto& s : result.report.skipped)
    std::cerr << "pausecut: skipped " << s.id << ": " << s.reason << "\n";
  std::cerr << "pausecut: " << result.report.n_ipus << " IPUs from " << result.report.n_processed
            << "/" << result.report.n_utterances << " utterances\n";
  return result.report.skipped.empty() ? kExitOk : kExitPartial;
}

// ------------------------------------------------------------------ split --

struct SplitArgs {
  std::string manifest;
  double fraction = 0.9;
  std::uint64_t seed = 0;
  std::string train_out;
  std::string val_out;
};

int run_split(const SplitArgs& args) {
  const auto manifest = load_manifest(args.manifest);
  const auto [train, val] = pausecut::split_train_val(manifest, args.fraction, args.seed);
  std::ostringstream train_body, val_body;
  pausecut::write_manifest(train, train_body);
  pausecut::write_manifest(val, val_body);
  emit_text(args.train_out, train_body.str());
  emit_text(args.val_out, val_body.str());
  std::cerr << "pausecut: " << train.size() << " train / " << val.size() << " val\n";
  return kExitOk;
}

// ---------------------------------------------------------------- lexicon --

struct LexiconArgs {
  std::string manifest;
  std::size_t k = 20;
  bool include_terminal = false;
  std::string output = "-";
};

int run_lexicon(const LexiconArgs& args) {
  const auto manifest = load_manifest(args.manifest);
  const auto lex = pausecut::build_break_lexicon(manifest, args.k, args.include_terminal);
  for (std::size_t i = 0; i < lex.k; ++i)
    std::cerr << (i + 1) << ". " << lex.entries[i].first << " (" << lex.entries[i].second << ")\n";
  emit_json(args.output, lex.to_json());
  return kExitOk;
}

// ---------------------------------------------------------------- segment --

struct SegmentArgs {
  std::string text;
  std::string text_file;
  std::string lexicon;
  std::size_t lexicon_k = 0;
  std::size_t min_words = 3;
  bool no_punctuation = false;
  std::string output;
};

int run_segment(const SegmentArgs& args) {
  const auto tokens = gather_tokens(args.text, args.text_file);
  if (tokens.empty()) throw pausecut::ValidationError("no input text");
  const auto lex = load_lexicon(args.lexicon, args.lexicon_k);
  const auto segments =
      pausecut::segment_text(tokens, lex, args.min_words, !args.no_punctuation);
  if (args.output.empty()) {
    for (const auto& seg : segments) std::cout << pausecut::join(seg) << "\n";
  } else {
    json arr = json::array();
    for (const auto& seg : segments) arr.push_back(seg);
    emit_json(args.output, arr);
  }
  return kExitOk;
}

// ------------------------------------------------------------------ synth --

struct SynthArgs {
  std::string text;
  std::string text_file;
  std::string lexicon;
  std::size_t lexicon_k = 0;
  std::size_t min_words = 3;
  double gap = 0.100;
  bool no_gap = false;
  bool no_punctuation = false;
  bool mock = false;
  std::string endpoint;
  double timeout = 30.0;
  std::string voice;
  unsigned jobs = 4;
  std::string output;
  std::string trace;
};

int run_synth(const SynthArgs& args) {
  const auto tokens = gather_tokens(args.text, args.text_file);
  if (tokens.empty()) throw pausecut::ValidationError("no input text");
  if (args.output.empty()) throw pausecut::ValidationError("--output is required for synth");
  const auto lex = load_lexicon(args.lexicon, args.lexicon_k);

  std::unique_ptr<pausecut::SynthBackend> backend;
  if (args.mock) {
    backend = std::make_unique<pausecut::MockBackend>();
  } else if (!args.endpoint.empty()) {
    backend = std::make_unique<pausecut::HttpBackend>(args.endpoint, args.timeout, 0,
                                                      static_cast<int>(args.jobs));
  } else {
    throw pausecut::ValidationError("pick a backend: --mock or --endpoint/PAUSECUT_ENDPOINT");
  }

  pausecut::SynthOptions opts;
  if (!args.voice.empty()) opts.voice = args.voice;
  opts.min_words = args.min_words;
  opts.gap = args.no_gap ? 0.0 : args.gap;
  opts.honor_punctuation = !args.no_punctuation;
  opts.max_concurrency = static_cast<int>(std::max(1u, args.jobs));

  const auto result = pausecut::synthesize_long(*backend, tokens, lex, opts);

  std::ostringstream wav;
  pausecut::write_wav(result.audio, wav);
  emit_text(args.output, wav.str());
  if (!args.trace.empty()) emit_json(args.trace, result.trace_json());
  std::cerr << "pausecut: synthesized " << result.trace.size() << " segment(s), "
            << pausecut::format_double(result.audio.duration()) << " s\n";
  return kExitOk;
}

// ------------------------------------------------------------------ stats --

int run_stats_durations(const std::string& manifest_path, const std::string& output) {
  const auto manifest = load_manifest(manifest_path);
  std::vector<double> durations;
  if (manifest.kind == pausecut::ManifestKind::sentence)
    for (const auto& u : manifest.sentences) durations.push_back(u.duration);
  else
    for (const auto& r : manifest.ipus) durations.push_back(r.t_end - r.t_start);
  const auto summary = pausecut::duration_summary(durations);
  json j = summary.to_json();
  j["quartile_convention"] = "linear interpolation between closest ranks";
  emit_json(output, j);
  return kExitOk;
}

int run_stats_gamma(const std::string& values_path, const std::string& output) {
  const auto values = read_numbers(values_path);
  const auto fit = pausecut::fit_gamma(values);
  emit_json(output, json{{"n", values.size()},
                         {"shape", fit.shape},
                         {"scale", fit.scale},
                         {"log_likelihood", fit.log_likelihood}});
  return kExitOk;
}

int run_stats_reduction(const std::string& pairs_path, const std::string& output) {
  auto in = open_input(pairs_path);
  std::vector<std::pair<double, double>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (pausecut::trim(line).empty()) continue;
    std::istringstream fields{line};
    std::string b, t;
    if (!(fields >> b >> t))
      throw pausecut::ParseError("expected 'baseline treatment'", lineno);
    pairs.emplace_back(pausecut::parse_double(b, lineno), pausecut::parse_double(t, lineno));
  }
  const double pct = pausecut::relative_reduction(pairs);
  std::fprintf(stderr, "%-8s %12s %12s\n", "Pair", "Baseline", "Treatment");
  for (std::size_t i = 0; i < pairs.size(); ++i)
    std::fprintf(stderr, "%-8zu %12.2f %12.2f\n", i + 1, pairs[i].first, pairs[i].second);
  std::fprintf(stderr, "average relative reduction: %.2f%%\n", pct);
  emit_json(output, json{{"n_pairs", pairs.size()}, {"relative_reduction_pct", pct}});
  return kExitOk;
}

int run_stats_pc(std::uint64_t a, std::uint64_t b, std::uint64_t equal, const std::string& label_a,
                 const std::string& label_b, const std::string& output) {
  const auto r = pausecut::pc_tally(a, b, equal);
  char row[160];
  std::fprintf(stderr, "%-24s %-24s %-8s\n", label_a.c_str(), label_b.c_str(), "Equal");
  std::snprintf(row, sizeof row, "%-24.2f %-24.2f %-8.2f", r.pct_a, r.pct_b, r.pct_equal);
  std::fprintf(stderr, "%s\n", row);
  std::fprintf(stderr, "two-sided p = %g%s\n", r.p_value,
               r.p_value < 0.05 ? " (statistically significant, p < 0.05)" : "");
  json j = r.to_json();
  j["system_a"] = label_a;
  j["system_b"] = label_b;
  emit_json(output, j);
  return kExitOk;
}

int run_stats_lm(const std::string& train_path, int order, const std::string& score_path,
                 const std::string& output) {
  const auto corpus = read_sentences(train_path);
  const auto model = pausecut::ngram_train(corpus, order);
  json j;
  j["order"] = order;
  j["vocabulary_size"] = model.vocabulary().size();
  j["smoothing"] = "add-one (Laplace)";
  if (!score_path.empty()) {
    const auto sentences = read_sentences(score_path);
    json scores = json::array();
    double total = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const double ll = pausecut::ngram_loglik(model, sentences[i]);
      total += ll;
      scores.push_back({{"line", i + 1}, {"log_likelihood", ll}});
    }
    j["scores"] = scores;
    if (!sentences.empty())
      j["average_log_likelihood"] = total / static_cast<double>(sentences.size());
  }
  emit_json(output, j);
  return kExitOk;
}

// ------------------------------------------------------------------ audit --

int run_audit_errors(const std::string& ref_path, const std::string& hyp_path,
                     const std::string& output) {
  const auto refs = read_sentences(ref_path);
  const auto hyps = read_sentences(hyp_path);
  if (refs.size() != hyps.size())
    throw pausecut::ValidationError("--ref has " + std::to_string(refs.size()) +
                                    " lines but --hyp has " + std::to_string(hyps.size()));
  if (refs.empty()) throw pausecut::ValidationError("no utterances to audit");

  pausecut::ErrorCounts totals;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto script = pausecut::align_tokens(refs[i], hyps[i]);
    totals += pausecut::count_errors(script, refs[i], hyps[i]);
  }
  const auto rates = pausecut::error_rates(totals);
  json j;
  j["n_utterances"] = totals.n_utterances;
  j["counts"] = {{"repetitions", totals.repetitions},
                 {"skips", totals.skips},
                 {"other_insertions", totals.other_insertions},
                 {"substitutions", totals.substitutions}};
  j["rates_pct"] = rates.to_json();
  emit_json(output, j);
  std::fprintf(stderr, "%-18s %8s %8s\n", "Error type", "Count", "Rate");
  std::fprintf(stderr, "%-18s %8llu %7.2f%%\n", "Repetitions",
               static_cast<unsigned long long>(totals.repetitions), rates.repetitions_pct);
  std::fprintf(stderr, "%-18s %8llu %7.2f%%\n", "Skips",
               static_cast<unsigned long long>(totals.skips), rates.skips_pct);
  return kExitOk;
}

int run_audit_eou(const std::string& trace_path, std::size_t expected, double threshold,
                  std::size_t tolerance, const std::string& output) {
  const auto probs = read_numbers(trace_path);
  const auto verdict = pausecut::eou_audit(probs, expected, threshold, tolerance);
  json j = verdict.to_json();
  j["expected_frame"] = expected;
  j["threshold"] = threshold;
  j["tolerance_frames"] = tolerance;
  emit_json(output, j);
  return kExitOk;
}

// --------------------------------------------------------- silences/pitch --

struct SilenceArgs {
  std::string wav;
  double frame = 0.025;
  double hop = 0.010;
  double threshold_db = -40.0;
  double min_dur = 0.0;
  std::string output = "-";
};

int run_silences(const SilenceArgs& args) {
  auto in = open_input(args.wav);
  const auto clip = pausecut::read_wav(in);
  const auto regions = pausecut::detect_silences_energy(clip, args.frame, args.hop,
                                                        args.threshold_db, args.min_dur);
  json arr = json::array();
  for (const auto& r : regions) arr.push_back({r.t_start, r.t_end});
  emit_json(args.output, arr);
  return kExitOk;
}

struct PitchArgs {
  std::vector<std::string> wavs;
  double f0_min = 60.0;
  double f0_max = 400.0;
  double frame = 0.040;
  double hop = 0.010;
  double voicing = 0.30;
  bool per_frame = false;
  std::string output = "-";
};

// Utterance-level pitch statistics per file, plus the distribution of the
// per-utterance means and standard deviations across the set.
int run_pitch(const PitchArgs& args) {
  json files = json::array();
  std::vector<double> means, stds;
  for (const auto& path : args.wavs) {
    auto in = open_input(path);
    const auto clip = pausecut::read_wav(in);
    const auto res = pausecut::estimate_f0(clip, args.f0_min, args.f0_max, args.frame, args.hop,
                                           args.voicing);
    json entry;
    entry["path"] = path;
    entry["voiced_frames"] = res.track.voiced_count();
    if (res.summary) {
      entry["mean_f0_hz"] = res.summary->mean;
      entry["std_f0_hz"] = res.summary->stddev;
      means.push_back(res.summary->mean);
      stds.push_back(res.summary->stddev);
    } else {
      entry["mean_f0_hz"] = nullptr;
      entry["std_f0_hz"] = nullptr;
    }
    if (args.per_frame) {
      json track = json::array();
      for (const auto& v : res.track.values) track.push_back(v ? json(*v) : json(nullptr));
      entry["f0_track"] = track;
      entry["frame_hop"] = res.track.frame_hop;
    }
    files.push_back(std::move(entry));
  }
  json j;
  j["files"] = files;
  j["mean_distribution"] =
      means.empty() ? json(nullptr) : pausecut::duration_summary(means).to_json();
  j["std_distribution"] =
      stds.empty() ? json(nullptr) : pausecut::duration_summary(stds).to_json();
  emit_json(args.output, j);
  return kExitOk;
}

// ------------------------------------------------------------ export-maps --

int run_export_maps(const std::string& manifest_path, const std::string& audio_map,
                    const std::string& text_map) {
  const auto manifest = load_manifest(manifest_path);
  auto audio = open_output_file(audio_map);
  auto text = open_output_file(text_map);
  pausecut::write_map_files(manifest, audio, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IPU-based TTS corpus preparation and synthesis toolkit"};
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.allow_config_extras(CLI::config_extras_mode::ignore_all);
  bool show_config = false;
  app.add_flag("--show-config", show_config, "Print the merged configuration and exit");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Split a corpus into inter-pausal units");
  extract->add_option("--manifest", ex.manifest, "Sentence manifest (JSON Lines)")->required();
  extract->add_option("--align-dir", ex.align_dir, "Directory of <id>.lab / <id>.TextGrid files")
      ->required();
  extract->add_option("--tier", ex.tier, "TextGrid tier name")->capture_default_str();
  extract->add_option("--time-unit", ex.time_unit, "Label file time unit")
      ->check(CLI::IsMember({"seconds", "htk"}))
      ->capture_default_str();
  extract->add_option("--out-dir", ex.out_dir, "Output directory for clips and reports")
      ->required();
  extract->add_option("--output", ex.output, "IPU manifest path ('-' for stdout)");
  extract->add_option("--report", ex.report, "Extraction report path ('-' for stdout)");
  extract->add_option("--t-sil", ex.t_sil, "Boundary threshold T(sil), seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  extract->add_option("--min-sp", ex.min_sp, "Eliminate pauses shorter than this, seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  extract->add_option("--split-point", ex.split_point, "Cut placement: midpoint or trim:PAD")
      ->capture_default_str();
  extract->add_option("--min-words", ex.min_words, "Merge IPUs shorter than this many words (0 = off)")
      ->capture_default_str();
  extract->add_option("--jobs", ex.jobs, "Worker threads")->capture_default_str();

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "Deterministic train/validation split");
  split->add_option("--manifest", sp.manifest, "Input manifest")->required();
  split->add_option("--fraction", sp.fraction, "Train fraction in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split->add_option("--seed", sp.seed, "Shuffle seed")->capture_default_str();
  split->add_option("--train-out", sp.train_out, "Train manifest path")->required();
  split->add_option("--val-out", sp.val_out, "Validation manifest path")->required();

  LexiconArgs lx;
  auto* lexicon = app.add_subcommand("lexicon", "Induce a phrase-break lexicon from IPU data");
  lexicon->add_option("--manifest", lx.manifest, "IPU manifest")->required();
  lexicon->add_option("--lexicon-k", lx.k, "Number of active entries")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  lexicon->add_flag("--include-terminal", lx.include_terminal,
                    "Also count sentence-final IPU words");
  lexicon->add_option("--output", lx.output, "Lexicon JSON path ('-' for stdout)")
      ->capture_default_str();

  SegmentArgs sg;
  auto* segment = app.add_subcommand("segment", "Split text into synthesis units");
  segment->add_option("--text", sg.text, "Text on the command line");
  segment->add_option("--text-file", sg.text_file, "Text file ('-' for stdin)");
  segment->add_option("--lexicon", sg.lexicon, "Break lexicon JSON");
  segment->add_option("--lexicon-k", sg.lexicon_k, "Clamp the lexicon's active entries");
  segment->add_option("--min-words", sg.min_words, "Merge units shorter than this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  segment->add_flag("--no-punctuation", sg.no_punctuation, "Ignore punctuation marks");
  segment->add_option("--output", sg.output, "JSON output path ('-' for stdout); default plain lines");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Synthesize text segment by segment");
  synth->add_option("--text", sy.text, "Text on the command line");
  synth->add_option("--text-file", sy.text_file, "Text file ('-' for stdin)");
  synth->add_option("--lexicon", sy.lexicon, "Break lexicon JSON");
  synth->add_option("--lexicon-k", sy.lexicon_k, "Clamp the lexicon's active entries");
  synth->add_option("--min-words", sy.min_words, "Merge units shorter than this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--gap", sy.gap, "Silence between segments, seconds")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_flag("--no-gap", sy.no_gap, "Concatenate without inserted silence");
  synth->add_flag("--no-punctuation", sy.no_punctuation, "Ignore punctuation marks");
  synth->add_flag("--mock", sy.mock, "Use the deterministic built-in test voice");
  synth->add_option("--endpoint", sy.endpoint, "HTTP backend, http://host:port[/prefix]")
      ->envname("PAUSECUT_ENDPOINT");
  synth->add_option("--timeout", sy.timeout, "HTTP timeout, seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--voice", sy.voice, "Voice name passed to the backend");
  synth->add_option("--jobs", sy.jobs, "Concurrent synthesis requests")->capture_default_str();
  synth->add_option("--output", sy.output, "WAV path ('-' streams WAV bytes to stdout)");
  synth->add_option("--trace", sy.trace, "Segment trace JSON path");

  auto* stats = app.add_subcommand("stats", "Corpus and evaluation statistics");
  stats->require_subcommand(1);
  std::string st_manifest, st_values = "-", st_pairs, st_train, st_score;
  std::string st_out = "-";
  int st_order = 3;
  std::uint64_t st_a = 0, st_b = 0, st_equal = 0;
  std::string st_label_a = "System A", st_label_b = "System B";
  auto* st_dur = stats->add_subcommand("durations", "Box-plot summary of a manifest's durations");
  st_dur->add_option("--manifest", st_manifest, "Manifest (sentence or ipu)")->required();
  st_dur->add_option("--output", st_out, "Report path ('-' for stdout)")->capture_default_str();
  auto* st_gamma = stats->add_subcommand("gamma", "Fit a Gamma distribution to samples");
  st_gamma->add_option("--values", st_values, "Numbers, one per line or JSON array ('-' stdin)")
      ->capture_default_str();
  st_gamma->add_option("--output", st_out, "Report path")->capture_default_str();
  auto* st_red = stats->add_subcommand("reduction", "Mean relative reduction over pairs");
  st_red->add_option("--pairs", st_pairs, "File of 'baseline treatment' lines")->required();
  st_red->add_option("--output", st_out, "Report path")->capture_default_str();
  auto* st_pc = stats->add_subcommand("pc", "Pairwise-comparison tally and sign test");
  st_pc->add_option("--prefer-a", st_a, "Ratings preferring system A")->required();
  st_pc->add_option("--prefer-b", st_b, "Ratings preferring system B")->required();
  st_pc->add_option("--equal", st_equal, "No-preference ratings")->required();
  st_pc->add_option("--label-a", st_label_a, "Name of system A")->capture_default_str();
  st_pc->add_option("--label-b", st_label_b, "Name of system B")->capture_default_str();
  st_pc->add_option("--output", st_out, "Report path")->capture_default_str();
  auto* st_lm = stats->add_subcommand("lm", "Train an n-gram LM and score sentences");
  st_lm->add_option("--train", st_train, "Training corpus, one sentence per line")->required();
  st_lm->add_option("--order", st_order, "Model order")->check(CLI::Range(1, 3))
      ->capture_default_str();
  st_lm->add_option("--score", st_score, "Sentences to score, one per line");
  st_lm->add_option("--output", st_out, "Report path")->capture_default_str();

  auto* audit = app.add_subcommand("audit", "Error and end-of-utterance audits");
  audit->require_subcommand(1);
  std::string au_ref, au_hyp, au_trace, au_out = "-";
  std::size_t au_expected = 0, au_tolerance = 10;
  double au_threshold = 0.5;
  auto* au_err = audit->add_subcommand("errors", "Repetition/skip analysis of transcripts");
  au_err->add_option("--ref", au_ref, "Reference transcripts, one per line")->required();
  au_err->add_option("--hyp", au_hyp, "Hypothesis transcripts, line-paired")->required();
  au_err->add_option("--output", au_out, "Report path")->capture_default_str();
  auto* au_eou = audit->add_subcommand("eou", "Judge a stop-probability trace");
  au_eou->add_option("--trace", au_trace, "Probabilities: JSON array or one per line")->required();
  au_eou->add_option("--expected", au_expected, "Expected crossing frame")->required();
  au_eou->add_option("--threshold", au_threshold, "Crossing threshold in (0, 1)")
      ->capture_default_str();
  au_eou->add_option("--tolerance", au_tolerance, "On-time band, frames")->capture_default_str();
  au_eou->add_option("--output", au_out, "Report path")->capture_default_str();

  SilenceArgs si;
  auto* silences = app.add_subcommand("silences", "Energy-based silence regions of a WAV");
  silences->add_option("--wav", si.wav, "Input WAV (PCM-16 mono)")->required();
  silences->add_option("--frame", si.frame, "Analysis frame, seconds")->capture_default_str();
  silences->add_option("--hop", si.hop, "Frame hop, seconds")->capture_default_str();
  silences->add_option("--threshold-db", si.threshold_db, "Silence threshold, dBFS")
      ->capture_default_str();
  silences->add_option("--min-dur", si.min_dur, "Keep regions at least this long, seconds")
      ->capture_default_str();
  silences->add_option("--output", si.output, "JSON array of [start, end] ('-' for stdout)")
      ->capture_default_str();

  PitchArgs pi;
  auto* pitch = app.add_subcommand("pitch", "Utterance-level F0 statistics of WAV files");
  pitch->add_option("wavs", pi.wavs, "Input WAVs (PCM-16 mono)")->required();
  pitch->add_option("--f0-min", pi.f0_min, "Lowest F0, Hz")->capture_default_str();
  pitch->add_option("--f0-max", pi.f0_max, "Highest F0, Hz")->capture_default_str();
  pitch->add_option("--frame", pi.frame, "Analysis frame, seconds")->capture_default_str();
  pitch->add_option("--hop", pi.hop, "Frame hop, seconds")->capture_default_str();
  pitch->add_option("--voicing", pi.voicing, "Voicing threshold on the peak ratio")
      ->capture_default_str();
  pitch->add_flag("--per-frame", pi.per_frame, "Include the per-frame F0 track");
  pitch->add_option("--output", pi.output, "Report path ('-' for stdout)")->capture_default_str();

  std::string em_manifest, em_audio, em_text;
  auto* maps = app.add_subcommand("export-maps", "Write id->audio and id->text map files");
  maps->add_option("--manifest", em_manifest, "Manifest to export")->required();
  maps->add_option("--audio-map", em_audio, "Output: id and audio path per line")->required();
  maps->add_option("--text-map", em_text, "Output: id and tokens per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "pausecut: " << e.what() << "\n" << app.help() << "\n";
    return kExitUsage;
  }

  if (show_config) {
    std::cout << app.config_to_str(true, true);
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*extract) return run_extract(ex);
    if (*split) return run_split(sp);
    if (*lexicon) return run_lexicon(lx);
    if (*segment) return run_segment(sg);
    if (*synth) return run_synth(sy);
    if (*st_dur) return run_stats_durations(st_manifest, st_out);
    if (*st_gamma) return run_stats_gamma(st_values, st_out);
    if (*st_red) return run_stats_reduction(st_pairs, st_out);
    if (*st_pc) return run_stats_pc(st_a, st_b, st_equal, st_label_a, st_label_b, st_out);
    if (*st_lm) return run_stats_lm(st_train, st_order, st_score, st_out);
    if (*au_err) return run_audit_errors(au_ref, au_hyp, au_out);
    if (*au_eou) return run_audit_eou(au_trace, au_expected, au_threshold, au_tolerance, au_out);
    if (*silences) return run_silences(si);
    if (*pitch) return run_pitch(pi);
    if (*maps) return run_export_maps(em_manifest, em_audio, em_text);
  } catch (const pausecut::Error& e) {
    std::cerr << "pausecut: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pausecut: error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
