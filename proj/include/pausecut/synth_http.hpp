#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "pausecut/audio.hpp"
#include "pausecut/common.hpp"
#include "pausecut/synth.hpp"

namespace pausecut {

namespace detail {

struct EndpointParts {
  std::string scheme_host_port;
  std::string base_path;  // "" or "/prefix"
};

inline EndpointParts parse_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("endpoint must look like http://host:port[/prefix]");
  auto path_start = endpoint.find('/', scheme_end + 3);
  EndpointParts parts;
  if (path_start == std::string::npos) {
    parts.scheme_host_port = endpoint;
  } else {
    parts.scheme_host_port = endpoint.substr(0, path_start);
    parts.base_path = endpoint.substr(path_start);
    while (!parts.base_path.empty() && parts.base_path.back() == '/') parts.base_path.pop_back();
  }
  return parts;
}

}  // namespace detail

// POSTs {"text": ..., "voice": ...} to {endpoint}/synthesize and parses the
// WAV response body. Non-2xx statuses and transport failures become
// BackendErrors; the HTTP status is carried when there is one.
inline AudioClip http_synthesize(const std::string& endpoint, const SynthRequest& req,
                                 double timeout_seconds) {
  req.validate();
  if (!(timeout_seconds > 0)) throw ValidationError("timeout must be positive");
  const auto parts = detail::parse_endpoint(endpoint);

  httplib::Client client(parts.scheme_host_port);
  const auto whole = static_cast<time_t>(timeout_seconds);
  const auto micros = static_cast<long>((timeout_seconds - static_cast<double>(whole)) * 1e6);
  client.set_connection_timeout(whole, micros);
  client.set_read_timeout(whole, micros);
  client.set_write_timeout(whole, micros);

  json body;
  body["text"] = req.text;
  if (req.voice) body["voice"] = *req.voice;
  if (req.sample_rate_hint) body["sample_rate_hint"] = *req.sample_rate_hint;

  auto res = client.Post(parts.base_path + "/synthesize", body.dump(), "application/json");
  if (!res)
    throw BackendError("backend unreachable (" + httplib::to_string(res.error()) + "): " + endpoint);
  if (res->status < 200 || res->status >= 300)
    throw BackendError("backend returned HTTP " + std::to_string(res->status), res->status);

  std::istringstream wav(res->body);
  try {
    return read_wav(wav);
  } catch (const std::exception& e) {
    throw BackendError(std::string("backend sent an unreadable WAV payload: ") + e.what());
  }
}

// SynthBackend over the one-route HTTP protocol. The advertised sample rate
// is whatever the caller configures (0 = unknown); real servers are adapted
// by running this against their own /synthesize shim.
class HttpBackend final : public SynthBackend {
 public:
  HttpBackend(std::string endpoint, double timeout_seconds = 30.0, int sample_rate = 0,
              int max_concurrency = 4)
      : endpoint_(std::move(endpoint)),
        timeout_(timeout_seconds),
        sample_rate_(sample_rate),
        max_concurrency_(max_concurrency) {}

  AudioClip synthesize(const SynthRequest& req) override {
    return http_synthesize(endpoint_, req, timeout_);
  }

  SynthCapabilities capabilities() const override {
    return {sample_rate_, 0, max_concurrency_};
  }

 private:
  std::string endpoint_;
  double timeout_;
  int sample_rate_;
  int max_concurrency_;
};

}  // namespace pausecut
