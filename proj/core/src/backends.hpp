#pragma once

// Concrete backends; reached through make_backend().

#include <atomic>
#include <memory>

#include "fsre/llm_client.hpp"

namespace fsre::detail {

class FixedBackend final : public Backend {
 public:
  explicit FixedBackend(std::string text) : text_(std::move(text)) {}
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  std::string text_;
};

// Hands out responses in call order; serial use only for a deterministic mapping.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> script) : script_(std::move(script)) {}
  CompletionResponse complete(const CompletionRequest& request) override;
  int max_parallelism() const override { return 1; }

 private:
  std::vector<std::string> script_;
  std::atomic<std::size_t> next_{0};
};

class OracleBackend final : public Backend {
 public:
  OracleBackend(double noise, std::string na_text, std::uint64_t seed)
      : noise_(noise), na_text_(std::move(na_text)), seed_(seed) {}
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  double noise_;
  std::string na_text_;
  std::uint64_t seed_;
};

std::unique_ptr<Backend> make_http_backend(const BackendConfig& cfg, SleepFn sleep);

}  // namespace fsre::detail
