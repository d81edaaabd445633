#include "fsre/llm_client.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "backends.hpp"
#include "fsre/error.hpp"

namespace fsre {

using nlohmann::json;

namespace {

constexpr std::string_view kMarkerOpen = "\n<!--oracle ";
constexpr std::string_view kMarkerClose = "-->";

class AuditedBackend final : public Backend {
 public:
  AuditedBackend(std::unique_ptr<Backend> inner, const std::string& path)
      : inner_(std::move(inner)), log_(path) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    try {
      auto response = inner_->complete(request);
      log_.record(request, response);
      return response;
    } catch (const BackendError& e) {
      CompletionResponse failed;
      failed.finish_reason = FinishReason::error;
      failed.error = e.what();
      failed.error_status = e.status();
      log_.record(request, failed);
      throw;
    }
  }
  int max_parallelism() const override { return inner_->max_parallelism(); }

 private:
  std::unique_ptr<Backend> inner_;
  AuditLog log_;
};

}  // namespace

void CompletionRequest::validate() const {
  if (prompt.empty()) throw ConfigError("completion request: empty prompt");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("completion request: temperature must lie in [0, 2]");
  }
  if (max_completion_tokens <= 0) {
    throw ConfigError("completion request: max_completion_tokens must be positive");
  }
  if (stop_sequences.size() > 4) {
    throw ConfigError("completion request: at most 4 stop sequences");
  }
}

CompletionRequest icl_request(std::string prompt) {
  return {std::move(prompt), 0.0, 16, {"\n\n"}};
}

CompletionRequest generation_request(std::string prompt) {
  return {std::move(prompt), 1.0, 512, {}};
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "http_openai_compatible" || name == "http") return BackendKind::http_openai_compatible;
  if (name == "mock_fixed") return BackendKind::mock_fixed;
  if (name == "mock_scripted") return BackendKind::mock_scripted;
  if (name == "mock_oracle") return BackendKind::mock_oracle;
  throw ConfigError("unknown backend kind '" + std::string(name) + "'");
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::http_openai_compatible: return "http_openai_compatible";
    case BackendKind::mock_fixed: return "mock_fixed";
    case BackendKind::mock_scripted: return "mock_scripted";
    case BackendKind::mock_oracle: return "mock_oracle";
  }
  return "unknown";
}

void BackendConfig::validate() const {
  if (kind == BackendKind::http_openai_compatible) {
    if (!endpoint_url || endpoint_url->empty()) throw ConfigError("http backend needs endpoint_url");
    if (!model_name || model_name->empty()) throw ConfigError("http backend needs model_name");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (retry_base_delay_ms <= 0) throw ConfigError("retry_base_delay_ms must be positive");
  if (retry_max_delay_ms < retry_base_delay_ms) {
    throw ConfigError("retry_max_delay_ms must be at least retry_base_delay_ms");
  }
  if (max_concurrent_requests <= 0) throw ConfigError("max_concurrent_requests must be positive");
  if (!(oracle_noise >= 0.0 && oracle_noise <= 1.0)) throw ConfigError("oracle_noise must lie in [0, 1]");
}

std::int64_t BackoffPolicy::delay_ms(int retry, std::optional<std::int64_t> retry_after_ms,
                                     std::int64_t previous_delay_ms) const {
  std::int64_t delay = base_delay_ms;
  for (int i = 0; i < retry && delay < max_delay_ms; ++i) delay *= 2;
  delay = std::min<std::int64_t>(delay, max_delay_ms);
  if (retry_after_ms) delay = std::max<std::int64_t>(*retry_after_ms, 0);
  return std::max(delay, previous_delay_ms);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, SleepFn sleep) {
  cfg.validate();
  std::unique_ptr<Backend> backend;
  switch (cfg.kind) {
    case BackendKind::http_openai_compatible:
      backend = detail::make_http_backend(cfg, std::move(sleep));
      break;
    case BackendKind::mock_fixed:
      backend = std::make_unique<detail::FixedBackend>(cfg.fixed_response);
      break;
    case BackendKind::mock_scripted:
      backend = std::make_unique<detail::ScriptedBackend>(cfg.scripted_responses);
      break;
    case BackendKind::mock_oracle:
      backend = std::make_unique<detail::OracleBackend>(cfg.oracle_noise, cfg.oracle_na_text, cfg.seed);
      break;
  }
  if (cfg.audit_log_path) {
    backend = std::make_unique<AuditedBackend>(std::move(backend), *cfg.audit_log_path);
  }
  return backend;
}

CompletionResponse complete(const BackendConfig& cfg, const CompletionRequest& req) {
  return make_backend(cfg)->complete(req);
}

std::vector<CompletionResponse> complete_batch(Backend& backend,
                                               std::span<const CompletionRequest> requests,
                                               int max_concurrent, BatchStats* stats) {
  std::vector<CompletionResponse> responses(requests.size());
  if (requests.empty()) return responses;

  const auto workers = static_cast<std::size_t>(
      std::max(1, std::min({max_concurrent, backend.max_parallelism(),
                            static_cast<int>(std::min<std::size_t>(requests.size(), 1 << 20))})));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> peak{0};
  std::atomic<std::size_t> failures{0};

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      const auto now = in_flight.fetch_add(1) + 1;
      auto seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      try {
        responses[i] = backend.complete(requests[i]);
      } catch (const std::exception& e) {
        auto& failed = responses[i];
        failed = CompletionResponse{};
        failed.finish_reason = FinishReason::error;
        failed.error = e.what();
        if (const auto* be = dynamic_cast<const BackendError*>(&e)) failed.error_status = be->status();
        failures.fetch_add(1);
      }
      in_flight.fetch_sub(1);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (stats != nullptr) {
    stats->peak_in_flight = peak.load();
    stats->failures = failures.load();
  }
  return responses;
}

std::vector<CompletionResponse> complete_batch(const BackendConfig& cfg,
                                               std::span<const CompletionRequest> requests) {
  auto backend = make_backend(cfg);
  return complete_batch(*backend, requests, cfg.max_concurrent_requests);
}

std::string oracle_marker(std::string_view answer, std::string_view key) {
  json payload{{"answer", answer}, {"key", key}};
  // "-->" cannot appear inside the payload: '>' is escaped.
  std::string body = payload.dump();
  std::string escaped;
  for (char c : body) {
    if (c == '>') escaped += "\\u003e";
    else escaped += c;
  }
  return std::string(kMarkerOpen) + escaped + std::string(kMarkerClose);
}

namespace {

std::optional<std::size_t> marker_start(std::string_view prompt) {
  if (prompt.size() < kMarkerOpen.size() + kMarkerClose.size()) return std::nullopt;
  if (prompt.substr(prompt.size() - kMarkerClose.size()) != kMarkerClose) return std::nullopt;
  const auto pos = prompt.rfind(kMarkerOpen);
  if (pos == std::string_view::npos) return std::nullopt;
  return pos;
}

}  // namespace

std::string_view strip_oracle_marker(std::string_view prompt) {
  const auto pos = marker_start(prompt);
  return pos ? prompt.substr(0, *pos) : prompt;
}

std::optional<OracleHint> read_oracle_marker(std::string_view prompt) {
  const auto pos = marker_start(prompt);
  if (!pos) return std::nullopt;
  const auto begin = *pos + kMarkerOpen.size();
  const auto body = prompt.substr(begin, prompt.size() - kMarkerClose.size() - begin);
  try {
    const auto payload = json::parse(body);
    return OracleHint{payload.at("answer").get<std::string>(), payload.value("key", std::string{})};
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

struct AuditLog::Impl {
  std::mutex mutex;
  std::ofstream out;
};

AuditLog::AuditLog(const std::string& path) : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path, std::ios::app);
  if (!impl_->out) throw ConfigError("cannot open audit log " + path);
}

AuditLog::~AuditLog() = default;

void AuditLog::record(const CompletionRequest& request, const CompletionResponse& response) {
  json line{{"prompt", std::string(strip_oracle_marker(request.prompt))},
            {"temperature", request.temperature},
            {"max_tokens", request.max_completion_tokens},
            {"stop", request.stop_sequences},
            {"text", response.text},
            {"finish_reason", to_string(response.finish_reason)},
            {"latency_ms", response.latency_ms},
            {"attempts", response.attempts}};
  if (response.error) line["error"] = *response.error;
  std::lock_guard lock(impl_->mutex);
  impl_->out << line.dump() << '\n';
  impl_->out.flush();
}

}  // namespace fsre
