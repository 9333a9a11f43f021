#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>

#include "fabsel/comparator.hpp"
#include "fabsel/prompt.hpp"

namespace fabsel {

inline constexpr const char* kEndpointEnvVar = "FABSEL_ENDPOINT_URL";

struct EndpointConfig {
  std::string url;  // http://host:port/path
  double timeout_s = 60.0;
  int max_attempts = 3;
  // Delay before retry k (1-based) is backoff_base_ms * 2^(k-1): 1 s then 2 s by default.
  int backoff_base_ms = 1000;
  std::size_t max_inflight = 4;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http")
    throw ConfigError("endpoint url must start with http:// (got '" + url + "')");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// URL from the explicit flag, else from FABSEL_ENDPOINT_URL.
inline std::string resolve_endpoint_url(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(kEndpointEnvVar); env && *env) return env;
  throw ConfigError(std::string("no endpoint url: pass --endpoint-url or set ") + kEndpointEnvVar);
}

/// POSTs a JSON body and returns the response's "text" field.
///
/// Connection failures, timeouts and 5xx replies are retried up to max_attempts with exponential
/// backoff; other non-200 replies fail at once. A reply that is not {"text": ...} is a data error
/// and is never retried.
inline std::string post_for_text(const EndpointConfig& cfg, const std::string& body) {
  const auto url = split_url(cfg.url);
  const auto secs = static_cast<time_t>(cfg.timeout_s);
  const auto usecs = static_cast<time_t>(std::llround((cfg.timeout_s - static_cast<double>(secs)) * 1e6));
  std::string last_error;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    if (attempt > 1)
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(cfg.backoff_base_ms) << (attempt - 2)));
    httplib::Client client(url.origin);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(url.path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + " from " + cfg.url);
    Json reply;
    try {
      reply = Json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      throw MalformedResponse(res->body);
    }
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) throw MalformedResponse(res->body);
    return reply["text"].get<std::string>();
  }
  throw TransportError(std::to_string(cfg.max_attempts) + " attempts to " + cfg.url + " failed; last: " + last_error);
}

/// assemble_prompt -> HTTP POST -> parse_response, with latency recorded.
inline ComparisonOutcome remote_compare(const ComparisonInput& input, const EndpointConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const std::string text = post_for_text(cfg, assemble_prompt(input));
  auto outcome = parse_response(text);
  outcome.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

/// Comparator backed by a model endpoint. Evidence is precomputed per fabric.
class RemoteComparator final : public Comparator {
 public:
  RemoteComparator(const std::vector<FabricRecord>& records, EndpointConfig cfg, bool abstain_allowed = true,
                   InstructionTemplate instruction = default_instruction())
      : cfg_(std::move(cfg)), abstain_allowed_(abstain_allowed), instruction_(std::move(instruction)) {
    split_url(cfg_.url);
    for (const auto& r : records) evidence_.emplace(r.fabric_id, build_evidence(r));
  }

  ComparisonInput input_for(const ComparisonTask& task) const {
    ComparisonInput in;
    in.task_id = task.task_id;
    in.property = task.property;
    in.side_a = evidence(task.fabric_a);
    in.side_b = evidence(task.fabric_b);
    in.instruction = instruction_;
    in.abstain_allowed = abstain_allowed_;
    return in;
  }

  ComparisonOutcome compare(const ComparisonTask& task) const override { return remote_compare(input_for(task), cfg_); }
  std::string identity() const override { return "remote(" + cfg_.url + ")"; }
  std::size_t max_inflight() const override { return cfg_.max_inflight; }

 private:
  const FabricEvidence& evidence(const std::string& id) const {
    auto it = evidence_.find(id);
    if (it == evidence_.end()) throw UnknownFabric(id);
    return it->second;
  }

  EndpointConfig cfg_;
  bool abstain_allowed_;
  InstructionTemplate instruction_;
  std::unordered_map<std::string, FabricEvidence> evidence_;
};

}  // namespace fabsel
