#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "pausecut/synth.hpp"
#include "pausecut/synth_http.hpp"

using namespace pausecut;

namespace {

BreakLexicon lexicon_of(std::vector<std::string> words) {
  BreakLexicon lex;
  for (auto& w : words) lex.entries.emplace_back(std::move(w), 1);
  lex.k = lex.entries.size();
  return lex;
}

}  // namespace

TEST_CASE("mock synthesis emits exactly 0.2 s per token") {
  SynthRequest req;
  req.text = "t1 t2 t3 t4 t5";
  const auto clip = mock_synthesize(req);
  CHECK(clip.sample_rate == 22050);
  CHECK(clip.samples.size() == 22050);
  CHECK_THAT(clip.duration(), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("mock synthesis is deterministic") {
  SynthRequest req;
  req.text = "same text twice";
  CHECK(mock_synthesize(req).samples == mock_synthesize(req).samples);
}

TEST_CASE("a single token is a 0.15 s tone padded to 0.2 s") {
  SynthRequest req;
  req.text = "hello";
  const auto clip = mock_synthesize(req);
  REQUIRE(clip.samples.size() == 4410);
  const std::size_t tone_len = sample_index(0.150, 22050);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < tone_len; ++i) any_nonzero |= clip.samples[i] != 0.0f;
  CHECK(any_nonzero);
  for (std::size_t i = tone_len; i < clip.samples.size(); ++i) REQUIRE(clip.samples[i] == 0.0f);
}

TEST_CASE("mock synthesis rejects blank text") {
  SynthRequest req;
  req.text = "   ";
  CHECK_THROWS_AS(mock_synthesize(req), ValidationError);
}

TEST_CASE("synthesize_long: 7 tokens split 4/3 with a 0.1 s gap last 1.5 s") {
  MockBackend backend;
  SynthOptions opts;
  opts.gap = 0.1;
  opts.min_words = 3;
  const std::vector<std::string> tokens{"w1", "w2", "w3", "brk", "w4", "w5", "w6"};
  const auto result = synthesize_long(backend, tokens, lexicon_of({"brk"}), opts);
  CHECK(result.audio.samples.size() == 33075);
  CHECK_THAT(result.audio.duration(), Catch::Matchers::WithinAbs(1.5, 1e-12));
  REQUIRE(result.trace.size() == 2);
  CHECK(result.trace[0].text == "w1 w2 w3 brk");
  CHECK(result.trace[1].text == "w4 w5 w6");
  CHECK_THAT(result.trace[0].duration, Catch::Matchers::WithinAbs(0.8, 1e-12));
}

TEST_CASE("identity segmentation equals one whole-text synthesis call") {
  MockBackend backend;
  SynthOptions opts;
  opts.min_words = 1;
  opts.honor_punctuation = false;
  opts.gap = 0.0;
  const std::vector<std::string> tokens{"aa", "bb", "cc"};
  const auto result = synthesize_long(backend, tokens, BreakLexicon{}, opts);
  SynthRequest whole;
  whole.text = "aa bb cc";
  CHECK(result.audio.samples == mock_synthesize(whole).samples);
  CHECK(result.trace.size() == 1);
}

TEST_CASE("mock duration formula holds for random token streams") {
  std::mt19937_64 rng(15);
  MockBackend backend;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("tok" + std::to_string(rng() % 9));
    BreakLexicon lex = lexicon_of({"tok1", "tok4"});
    SynthOptions opts;
    opts.min_words = 1 + rng() % 3;
    opts.gap = static_cast<double>(rng() % 200) / 1000.0;
    const auto result = synthesize_long(backend, tokens, lex, opts);
    const std::size_t expected =
        n * 4410 + (result.trace.size() - 1) * sample_index(opts.gap, 22050);
    REQUIRE(result.audio.samples.size() == expected);
  }
}

namespace {

// Finishes segments in reverse order to expose ordering bugs.
class ReverseLatencyBackend final : public SynthBackend {
 public:
  AudioClip synthesize(const SynthRequest& req) override {
    const int rank = started_.fetch_add(1);
    std::this_thread::sleep_for(std::chrono::milliseconds(std::max(0, 40 - 15 * rank)));
    return mock_synthesize(req);
  }
  SynthCapabilities capabilities() const override { return {kMockSampleRate, 0, 0}; }

 private:
  std::atomic<int> started_{0};
};

class FailingBackend final : public SynthBackend {
 public:
  explicit FailingBackend(std::size_t fail_on) : fail_on_(fail_on) {}
  AudioClip synthesize(const SynthRequest& req) override {
    if (calls_.fetch_add(1) + 1 == fail_on_) throw BackendError("voice exploded", 500);
    return mock_synthesize(req);
  }
  SynthCapabilities capabilities() const override { return {kMockSampleRate, 0, 1}; }

 private:
  std::size_t fail_on_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace

TEST_CASE("segment order is preserved under concurrent completion") {
  const std::vector<std::string> tokens{"a1", "x", "b2", "x", "c3", "x"};
  const auto lex = lexicon_of({"x"});
  SynthOptions opts;
  opts.min_words = 1;
  opts.gap = 0.05;

  MockBackend reference;
  const auto expected = synthesize_long(reference, tokens, lex, opts);

  ReverseLatencyBackend slow;
  SynthOptions parallel = opts;
  parallel.max_concurrency = 3;
  const auto result = synthesize_long(slow, tokens, lex, parallel);
  REQUIRE(result.trace.size() == expected.trace.size());
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    CHECK(result.trace[i].index == i);
    CHECK(result.trace[i].text == expected.trace[i].text);
  }
  CHECK(result.audio.samples == expected.audio.samples);
}

TEST_CASE("a backend failure names the failing segment and yields nothing") {
  FailingBackend backend(2);
  SynthOptions opts;
  opts.min_words = 1;
  const std::vector<std::string> tokens{"a", "x", "b", "x", "c"};
  CHECK_THROWS_WITH(synthesize_long(backend, tokens, lexicon_of({"x"}), opts),
                    Catch::Matchers::ContainsSubstring("segment 2 of 3") &&
                        Catch::Matchers::ContainsSubstring("voice exploded"));
}

TEST_CASE("synthesize_long validates inputs") {
  MockBackend backend;
  CHECK_THROWS_AS(synthesize_long(backend, {}, BreakLexicon{}), ValidationError);
  SynthOptions opts;
  opts.gap = -0.1;
  CHECK_THROWS_AS(synthesize_long(backend, {"a"}, BreakLexicon{}, opts), ValidationError);
}

namespace {

struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit TestServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Post("/synthesize", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

std::string wav_body(double seconds) {
  AudioClip clip;
  clip.sample_rate = 22050;
  clip.samples.assign(sample_index(seconds, 22050), 0.25f);
  std::ostringstream out;
  write_wav(clip, out);
  return out.str();
}

}  // namespace

TEST_CASE("http_synthesize round-trips a WAV response") {
  TestServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    REQUIRE(body.at("text") == "hello world");
    REQUIRE(body.at("voice") == "v1");
    res.set_content(wav_body(0.5), "audio/wav");
  });
  SynthRequest req;
  req.text = "hello world";
  req.voice = "v1";
  const auto clip = http_synthesize(server.endpoint(), req, 5.0);
  CHECK(clip.sample_rate == 22050);
  CHECK(clip.samples.size() == sample_index(0.5, 22050));
}

TEST_CASE("a 503 resurfaces as a backend error with the status") {
  TestServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("overloaded", "text/plain");
  });
  SynthRequest req;
  req.text = "hello";
  try {
    http_synthesize(server.endpoint(), req, 5.0);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.status() == 503);
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("503"));
  }
}

TEST_CASE("a truncated WAV payload is a payload error, not a crash") {
  TestServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(wav_body(0.5).substr(0, 20), "audio/wav");
  });
  SynthRequest req;
  req.text = "hello";
  CHECK_THROWS_WITH(http_synthesize(server.endpoint(), req, 5.0),
                    Catch::Matchers::ContainsSubstring("WAV payload"));
}

TEST_CASE("an unreachable endpoint fails with a transport error") {
  SynthRequest req;
  req.text = "hello";
  CHECK_THROWS_AS(http_synthesize("http://127.0.0.1:1/", req, 0.5), BackendError);
}

TEST_CASE("HttpBackend plugs into synthesize_long") {
  TestServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const auto n = tokenize(body.at("text").get<std::string>()).size();
    res.set_content(wav_body(0.2 * static_cast<double>(n)), "audio/wav");
  });
  HttpBackend backend(server.endpoint(), 5.0, 22050, 2);
  SynthOptions opts;
  opts.min_words = 1;
  opts.gap = 0.0;
  const auto result = synthesize_long(backend, {"a", "x", "b"}, lexicon_of({"x"}), opts);
  CHECK(result.audio.samples.size() == 3 * 4410);
  CHECK(result.trace.size() == 2);
}
