#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "backends.hpp"
#include "fsre/error.hpp"

namespace fsre::detail {
namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url needs a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("endpoint_url scheme must be http or https: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::optional<std::int64_t> retry_after_ms(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  const auto value = res.get_header_value("Retry-After");
  char* end = nullptr;
  const double seconds = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || seconds < 0) return std::nullopt;
  return static_cast<std::int64_t>(seconds * 1000.0);
}

class HttpBackend final : public Backend {
 public:
  HttpBackend(const BackendConfig& cfg, SleepFn sleep)
      : url_(parse_url(*cfg.endpoint_url)),
        model_(*cfg.model_name),
        timeout_ms_(cfg.request_timeout_ms),
        policy_{cfg.max_retries, cfg.retry_base_delay_ms, cfg.retry_max_delay_ms},
        sleep_(std::move(sleep)) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key != nullptr && *key != '\0') {
      api_key_ = key;
    }
    if (!sleep_) {
      sleep_ = [](std::int64_t ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
    }
  }

  CompletionResponse complete(const CompletionRequest& request) override {
    request.validate();
    json body{{"model", model_},
              {"prompt", std::string(strip_oracle_marker(request.prompt))},
              {"temperature", request.temperature},
              {"max_tokens", request.max_completion_tokens}};
    if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;
    const auto payload = body.dump();

    httplib::Client client(url_.origin);
    const auto timeout = std::chrono::milliseconds(timeout_ms_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto started = std::chrono::steady_clock::now();
    std::int64_t previous_delay = 0;
    int last_status = 0;
    std::string last_error;
    for (int attempt = 0;; ++attempt) {
      std::optional<std::int64_t> server_delay;
      auto res = client.Post(url_.path, headers, payload, "application/json");
      if (!res) {
        last_status = 0;
        last_error = "transport error: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        auto out = parse_body(res->body);
        out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        out.attempts = attempt + 1;
        return out;
      } else {
        last_status = res->status;
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status == 401 || res->status == 403) {
          throw BackendError("authentication failed (" + last_error + ")", last_status, false);
        }
        const bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
        if (!retryable) {
          throw BackendError("request rejected (" + last_error + "): " + res->body.substr(0, 200),
                             last_status, false);
        }
        if (res->status == 429) server_delay = retry_after_ms(*res);
      }
      if (attempt >= policy_.max_retries) {
        throw BackendError("retries exhausted after " + std::to_string(attempt + 1) +
                               " attempts; last: " + last_error,
                           last_status, true);
      }
      previous_delay = policy_.delay_ms(attempt, server_delay, previous_delay);
      sleep_(previous_delay);
    }
  }

 private:
  static CompletionResponse parse_body(const std::string& text) {
    try {
      const auto doc = json::parse(text);
      const auto& choice = doc.at("choices").at(0);
      CompletionResponse out;
      out.text = choice.at("text").get<std::string>();
      const auto reason = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                              ? choice["finish_reason"].get<std::string>()
                              : std::string("stop");
      out.finish_reason = reason == "length" ? FinishReason::length : FinishReason::stop;
      return out;
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what(), 200, false);
    }
  }

  ParsedUrl url_;
  std::string model_;
  int timeout_ms_;
  BackoffPolicy policy_;
  SleepFn sleep_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const BackendConfig& cfg, SleepFn sleep) {
  return std::make_unique<HttpBackend>(cfg, std::move(sleep));
}

}  // namespace fsre::detail
