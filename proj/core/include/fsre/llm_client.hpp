#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsre {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_completion_tokens = 16;
  std::vector<std::string> stop_sequences;

  // Throws ConfigError: empty prompt, temperature outside [0, 2],
  // non-positive max tokens, more than four stop sequences.
  void validate() const;
};

// Defaults for the two call sites: label prediction and data generation.
CompletionRequest icl_request(std::string prompt);
CompletionRequest generation_request(std::string prompt);

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);

struct CompletionResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  std::int64_t latency_ms = 0;
  // Set when finish_reason == error (batch calls only; `complete` throws).
  std::optional<std::string> error;
  // Error category for failed batch positions: HTTP status, or 0.
  int error_status = 0;
  int attempts = 1;

  bool ok() const { return finish_reason != FinishReason::error; }
};

enum class BackendKind { http_openai_compatible, mock_fixed, mock_scripted, mock_oracle };

BackendKind parse_backend_kind(std::string_view name);
std::string_view to_string(BackendKind kind);

struct BackendConfig {
  BackendKind kind = BackendKind::mock_fixed;

  // http_openai_compatible: full URL of the completions endpoint,
  // e.g. https://api.openai.com/v1/completions
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_name;
  std::string api_key_env = "OPENAI_API_KEY";
  int request_timeout_ms = 60000;

  int max_retries = 3;
  int retry_base_delay_ms = 500;
  int retry_max_delay_ms = 60000;
  int max_concurrent_requests = 4;

  std::string fixed_response;                  // mock_fixed
  std::vector<std::string> scripted_responses; // mock_scripted
  double oracle_noise = 0.0;                   // mock_oracle
  std::string oracle_na_text = "no relation";  // mock_oracle
  std::uint64_t seed = 0;

  // One JSON object per request/response when set.
  std::optional<std::string> audit_log_path;

  void validate() const;
};

/// Retry schedule: base * 2^attempt, capped, never decreasing. A server
/// Retry-After value replaces the computed delay when present.
struct BackoffPolicy {
  int max_retries = 3;
  int base_delay_ms = 500;
  int max_delay_ms = 60000;

  // Delay before retry number `retry` (0-based).
  std::int64_t delay_ms(int retry, std::optional<std::int64_t> retry_after_ms,
                        std::int64_t previous_delay_ms) const;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Blocking and thread-safe. Throws BackendError on failure.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;

  // Upper bound on useful concurrency; 1 forces complete_batch to run serially.
  virtual int max_parallelism() const { return 1 << 20; }
};

using SleepFn = std::function<void(std::int64_t ms)>;

// Builds the backend for cfg.kind. `sleep` replaces the retry wait (tests).
std::unique_ptr<Backend> make_backend(const BackendConfig& cfg, SleepFn sleep = {});

// One-shot convenience around make_backend(cfg)->complete(req).
CompletionResponse complete(const BackendConfig& cfg, const CompletionRequest& req);

struct BatchStats {
  std::size_t peak_in_flight = 0;
  std::size_t failures = 0;
};

/// Positionally aligned responses with at most `max_concurrent` requests in
/// flight. A failed position carries finish_reason::error and the message;
/// siblings are unaffected.
std::vector<CompletionResponse> complete_batch(Backend& backend,
                                               std::span<const CompletionRequest> requests,
                                               int max_concurrent,
                                               BatchStats* stats = nullptr);

std::vector<CompletionResponse> complete_batch(const BackendConfig& cfg,
                                               std::span<const CompletionRequest> requests);

/// Ground truth for the oracle mock rides at the end of the prompt as
/// "\n<!--oracle {json}-->". `key` identifies the query so the noise draw is
/// independent of call order.
std::string oracle_marker(std::string_view answer, std::string_view key);

// Prompt with a trailing oracle marker removed (unchanged if there is none).
std::string_view strip_oracle_marker(std::string_view prompt);

struct OracleHint {
  std::string answer;
  std::string key;
};
std::optional<OracleHint> read_oracle_marker(std::string_view prompt);

/// Appends request/response pairs as JSON lines. Never records credentials.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path);
  ~AuditLog();
  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  void record(const CompletionRequest& request, const CompletionResponse& response);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fsre
