#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pausecut/align.hpp"
#include "pausecut/audio.hpp"
#include "pausecut/corpus.hpp"

namespace testutil {

inline pausecut::AudioClip sine_clip(double freq, double seconds, int sr = 22050,
                                     float amplitude = 0.8f) {
  pausecut::AudioClip clip;
  clip.sample_rate = sr;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  clip.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    clip.samples.push_back(
        amplitude * static_cast<float>(std::sin(2.0 * std::numbers::pi * freq * i / sr)));
  return clip;
}

// Random clip on the 16-bit grid, so WAV round trips are sample-exact.
inline pausecut::AudioClip noise_clip(std::size_t n, std::mt19937_64& rng, int sr = 22050) {
  pausecut::AudioClip clip;
  clip.sample_rate = sr;
  clip.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = static_cast<std::int16_t>(rng() % 65536);
    clip.samples.push_back(static_cast<float>(q) / 32768.0f);
  }
  return clip;
}

struct SyntheticUtterance {
  pausecut::Utterance utt;
  pausecut::AlignmentTrack track;
  pausecut::AudioClip clip;
};

// One randomized utterance: words of 80-400 ms separated by pauses of
// 0-450 ms (some zero-length, some labelled, some implicit gaps), with
// optional leading/trailing silence. Audio is 16-bit-grid noise.
inline SyntheticUtterance random_utterance(const std::string& id, std::mt19937_64& rng,
                                           std::size_t min_words = 2, std::size_t max_words = 12,
                                           int sr = 22050) {
  SyntheticUtterance s;
  const std::size_t n_words = min_words + rng() % (max_words - min_words + 1);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() % 10000) / 10000.0);
  };

  double t = uniform(0.0, 0.3);  // leading silence
  if (t > 0.005 && rng() % 2 == 0)
    s.track.segments.push_back({"sil", 0.0, t});  // sometimes labelled, sometimes implicit
  for (std::size_t w = 0; w < n_words; ++w) {
    const std::string word = "w" + std::to_string(w);
    const double dur = uniform(0.08, 0.40);
    s.track.segments.push_back({word, t, t + dur});
    s.utt.tokens.push_back(word);
    t += dur;
    if (w + 1 < n_words) {
      const double pause = uniform(0.0, 0.45);
      if (pause > 0.001 && rng() % 2 == 0) s.track.segments.push_back({"sp", t, t + pause});
      t += pause;
    }
  }
  const double trailing = uniform(0.0, 0.25);
  if (trailing > 0.005 && rng() % 2 == 0) {
    s.track.segments.push_back({"sp", t, t + trailing});
    t += trailing;
  } else {
    t += std::min(trailing, 0.04);  // unlabelled tail must stay within tolerance
  }

  s.utt.id = id;
  s.utt.sample_rate = sr;
  s.utt.audio_path = id + ".wav";
  const auto n_samples = static_cast<std::size_t>(std::llround(t * sr));
  s.utt.duration = static_cast<double>(n_samples) / sr;
  s.clip = noise_clip(n_samples, rng, sr);
  return s;
}

// Deterministic uniform draw in (0, 1]; independent of any library
// distribution so sampled oracles reproduce everywhere.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double sample_exponential(double scale, std::mt19937_64& rng) {
  return -scale * std::log(uniform01(rng));
}

inline double sample_normal(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Gamma(shape, scale) for shape in {0.5, 1, 2, 5, ...}: integer shapes sum
// exponentials, half-integer shapes add chi-square halves (Z^2/2 per half).
inline double sample_gamma(double shape, double scale, std::mt19937_64& rng) {
  double x = 0;
  auto whole = static_cast<unsigned>(shape);
  for (unsigned i = 0; i < whole; ++i) x += sample_exponential(1.0, rng);
  const double frac = shape - whole;
  if (frac > 0.25 && frac < 0.75) {  // shape + 1/2
    const double z = sample_normal(rng);
    x += z * z / 2.0;
  } else if (frac != 0.0) {
    throw std::runtime_error("sample_gamma supports integer and half-integer shapes only");
  }
  return scale * x;
}

// Self-deleting temporary directory for file-based tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pausecut_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace testutil
