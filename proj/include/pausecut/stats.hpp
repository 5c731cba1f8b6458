#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pausecut/common.hpp"

namespace pausecut {

// Box-plot statistics of a duration sample, in seconds.
struct DurationSummary {
  std::size_t n = 0;
  double mean = 0;
  double stddev = 0;  // population standard deviation
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;

  json to_json() const {
    return json{{"n", n},   {"mean", mean},     {"std", stddev}, {"min", min},
                {"q1", q1}, {"median", median}, {"q3", q3},      {"max", max}};
  }
};

namespace detail {

// Quantile by linear interpolation between closest ranks: h = (n-1)*q.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline DurationSummary duration_summary(const std::vector<double>& durations) {
  if (durations.empty()) throw ValidationError("duration_summary needs a non-empty sample");
  for (double d : durations)
    if (!(d >= 0)) throw ValidationError("durations must be non-negative");

  std::vector<double> sorted = durations;
  std::sort(sorted.begin(), sorted.end());
  DurationSummary s;
  s.n = sorted.size();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.n);
  double acc = 0;
  for (double d : sorted) acc += (d - s.mean) * (d - s.mean);
  s.stddev = std::sqrt(acc / static_cast<double>(s.n));
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = detail::quantile_sorted(sorted, 0.25);
  s.median = detail::quantile_sorted(sorted, 0.5);
  s.q3 = detail::quantile_sorted(sorted, 0.75);
  return s;
}

// Digamma for x > 0: recurrence up to the asymptotic region, then the
// standard Bernoulli series.
inline double digamma(double x) {
  if (!(x > 0)) throw ValidationError("digamma defined here for x > 0 only");
  double result = 0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
  return result;
}

inline double trigamma(double x) {
  if (!(x > 0)) throw ValidationError("trigamma defined here for x > 0 only");
  double result = 0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  result += inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 -
                                             inv2 * (1.0 / 30 -
                                                     inv2 * (1.0 / 42 -
                                                             inv2 * (1.0 / 30 - inv2 * 5.0 / 66))))));
  return result;
}

struct GammaFit {
  double shape = 0;  // k
  double scale = 0;  // theta
  double log_likelihood = 0;
};

// Gamma MLE: method-of-moments start k0 = mean^2/var, then Newton iteration
// on ln k - digamma(k) = ln(mean) - mean(ln x); theta = mean/k.
inline GammaFit fit_gamma(const std::vector<double>& samples) {
  if (samples.size() < 2) throw ValidationError("fit_gamma needs at least 2 samples");
  double sum = 0, sum_log = 0;
  for (double x : samples) {
    if (!(x > 0)) throw ValidationError("fit_gamma needs positive samples");
    sum += x;
    sum_log += std::log(x);
  }
  const auto n = static_cast<double>(samples.size());
  const double mean = sum / n;
  const double mean_log = sum_log / n;
  double var = 0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= n;
  if (var <= 0) throw ValidationError("fit_gamma needs a sample with nonzero variance");

  const double s = std::log(mean) - mean_log;  // > 0 by Jensen for non-degenerate samples
  if (!(s > 0)) throw ValidationError("fit_gamma: degenerate sample");

  double k = mean * mean / var;
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(k) - digamma(k) - s;
    const double fp = 1.0 / k - trigamma(k);
    double next = k - f / fp;
    if (next <= 0) next = k / 2;  // keep the iterate in the domain
    const double delta = std::abs(next - k);
    k = next;
    if (delta < 1e-10) break;
  }

  GammaFit fit;
  fit.shape = k;
  fit.scale = mean / k;
  fit.log_likelihood = (k - 1) * sum_log - sum / fit.scale -
                       n * (k * std::log(fit.scale) + std::lgamma(k));
  return fit;
}

// Mean over pairs of (baseline - treatment)/baseline, as a percentage
// rounded to 2 decimals.
inline double relative_reduction(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw ValidationError("relative_reduction needs at least one pair");
  double acc = 0;
  for (const auto& [baseline, treatment] : pairs) {
    if (!(baseline > 0)) throw ValidationError("baseline must be positive");
    acc += (baseline - treatment) / baseline;
  }
  return round2(acc / static_cast<double>(pairs.size()) * 100.0);
}

// Pairwise-comparison tally: preference percentages plus the exact two-sided
// binomial sign test on (prefer_a, prefer_b) with ties excluded.
struct PcResult {
  double pct_a = 0;
  double pct_b = 0;
  double pct_equal = 0;
  double p_value = 1.0;

  json to_json() const {
    return json{{"preference_a_pct", pct_a},
                {"preference_b_pct", pct_b},
                {"equal_pct", pct_equal},
                {"two_sided_p", p_value},
                {"test", "exact two-sided binomial sign test, ties excluded, p0 = 0.5"}};
  }
};

namespace detail {

// Two-sided sign-test p-value at p0 = 0.5: doubled smaller tail, capped at 1.
inline double sign_test_p(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t n = a + b;
  if (n == 0) return 1.0;
  const std::uint64_t k = std::min(a, b);
  if (n <= 52) {
    // Exact: binomial sums below 2^52 are integer-exact in double.
    std::uint64_t tail = 0, c = 1;
    for (std::uint64_t i = 0;; ++i) {
      tail += c;
      if (i == k) break;
      c = c * (n - i) / (i + 1);
    }
    return std::min(1.0, 2.0 * static_cast<double>(tail) / std::exp2(static_cast<double>(n)));
  }
  // Log-space for large tallies.
  auto lchoose = [&](double nn, double kk) {
    return std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1);
  };
  double max_term = -1e300;
  std::vector<double> terms(k + 1);
  for (std::uint64_t i = 0; i <= k; ++i) {
    terms[i] = lchoose(static_cast<double>(n), static_cast<double>(i));
    max_term = std::max(max_term, terms[i]);
  }
  double acc = 0;
  for (double t : terms) acc += std::exp(t - max_term);
  const double log_tail = max_term + std::log(acc) - static_cast<double>(n) * std::log(2.0);
  return std::min(1.0, 2.0 * std::exp(log_tail));
}

}  // namespace detail

inline PcResult pc_tally(std::uint64_t prefer_a, std::uint64_t prefer_b, std::uint64_t equal) {
  const std::uint64_t total = prefer_a + prefer_b + equal;
  if (total == 0) throw ValidationError("pc_tally needs a nonzero total");
  PcResult r;
  r.pct_a = round2(100.0 * static_cast<double>(prefer_a) / static_cast<double>(total));
  r.pct_b = round2(100.0 * static_cast<double>(prefer_b) / static_cast<double>(total));
  r.pct_equal = round2(100.0 * static_cast<double>(equal) / static_cast<double>(total));
  r.p_value = detail::sign_test_p(prefer_a, prefer_b);
  return r;
}

// N-gram model (order <= 3) with sentence padding and add-one smoothing.
// Reserved symbols: "<s>" start pad, "</s>" end marker, "<unk>" unknown.
class NgramModel {
 public:
  static constexpr const char* kPad = "<s>";
  static constexpr const char* kEnd = "</s>";
  static constexpr const char* kUnk = "<unk>";

  int order() const { return order_; }
  const std::set<std::string>& vocabulary() const { return vocab_; }

  // Laplace-smoothed P(word | context); context is the most recent
  // (order-1) tokens, already padded. Unknown tokens map to <unk>.
  double prob(const std::vector<std::string>& context, const std::string& word) const {
    if (context.size() + 1 != static_cast<std::size_t>(order_))
      throw ValidationError("context must have order-1 tokens");
    const std::string ctx = context_key(context);
    const std::string w = map_token(word);
    const double v = static_cast<double>(vocab_.size());
    std::uint64_t total = 0, count = 0;
    auto it = contexts_.find(ctx);
    if (it != contexts_.end()) {
      total = it->second.total;
      auto wit = it->second.words.find(w);
      if (wit != it->second.words.end()) count = wit->second;
    }
    return (static_cast<double>(count) + 1.0) / (static_cast<double>(total) + v);
  }

  // Natural-log likelihood of a sentence, end marker included.
  double loglik(const std::vector<std::string>& sentence) const {
    std::vector<std::string> padded(static_cast<std::size_t>(order_) - 1, kPad);
    for (const auto& t : sentence) padded.push_back(map_token(t));
    padded.emplace_back(kEnd);
    double acc = 0;
    for (std::size_t i = static_cast<std::size_t>(order_) - 1; i < padded.size(); ++i) {
      std::vector<std::string> ctx(padded.begin() + (i - order_ + 1), padded.begin() + i);
      acc += std::log(prob(ctx, padded[i]));
    }
    return acc;
  }

  // Raw count of an exact n-gram (context..., word); for inspection/tests.
  std::uint64_t count(const std::vector<std::string>& context, const std::string& word) const {
    auto it = contexts_.find(context_key(context));
    if (it == contexts_.end()) return 0;
    auto wit = it->second.words.find(word);
    return wit == it->second.words.end() ? 0 : wit->second;
  }

  std::vector<std::string> contexts() const {
    std::vector<std::string> out;
    out.reserve(contexts_.size());
    for (const auto& [ctx, _] : contexts_) out.push_back(ctx);
    return out;
  }

  static NgramModel train(const std::vector<std::vector<std::string>>& sentences, int order) {
    if (order < 1 || order > 3) throw ValidationError("order must be in 1..3");
    if (sentences.empty()) throw ValidationError("ngram training needs a non-empty corpus");
    NgramModel m;
    m.order_ = order;
    m.vocab_.insert(kEnd);
    m.vocab_.insert(kUnk);
    for (const auto& sentence : sentences)
      for (const auto& tok : sentence) m.vocab_.insert(tok);
    for (const auto& sentence : sentences) {
      std::vector<std::string> padded(static_cast<std::size_t>(order) - 1, kPad);
      padded.insert(padded.end(), sentence.begin(), sentence.end());
      padded.emplace_back(kEnd);
      for (std::size_t i = static_cast<std::size_t>(order) - 1; i < padded.size(); ++i) {
        std::vector<std::string> ctx(padded.begin() + (i - order + 1), padded.begin() + i);
        auto& c = m.contexts_[context_key(ctx)];
        ++c.total;
        ++c.words[padded[i]];
      }
    }
    return m;
  }

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::unordered_map<std::string, std::uint64_t> words;
  };

  static std::string context_key(const std::vector<std::string>& ctx) {
    std::string key;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (i) key += '\x1f';
      key += ctx[i];
    }
    return key;
  }

  std::string map_token(const std::string& t) const {
    return (t == kPad || vocab_.count(t)) ? t : std::string(kUnk);
  }

  int order_ = 1;
  std::set<std::string> vocab_;
  std::unordered_map<std::string, ContextCounts> contexts_;
};

inline NgramModel ngram_train(const std::vector<std::vector<std::string>>& sentences, int order) {
  return NgramModel::train(sentences, order);
}

inline double ngram_loglik(const NgramModel& model, const std::vector<std::string>& sentence) {
  return model.loglik(sentence);
}

}  // namespace pausecut
