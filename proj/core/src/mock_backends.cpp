#include <string>

#include "backends.hpp"
#include "fsre/error.hpp"
#include "fsre/random.hpp"

namespace fsre::detail {

CompletionResponse FixedBackend::complete(const CompletionRequest& request) {
  request.validate();
  return {text_, FinishReason::stop, 0, std::nullopt, 0, 1};
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
  request.validate();
  const auto index = next_.fetch_add(1);
  if (index >= script_.size()) {
    throw BackendError("scripted backend exhausted after " + std::to_string(script_.size()) +
                       " responses");
  }
  return {script_[index], FinishReason::stop, 0, std::nullopt, 0, 1};
}

CompletionResponse OracleBackend::complete(const CompletionRequest& request) {
  request.validate();
  const auto hint = read_oracle_marker(request.prompt);
  if (!hint) throw BackendError("oracle backend: prompt carries no oracle marker");
  std::string text = hint->answer;
  if (noise_ > 0.0) {
    const std::string_view key = hint->key.empty() ? std::string_view(request.prompt)
                                                   : std::string_view(hint->key);
    SeededRng rng(derive_seed(seed_, key));
    if (rng.bernoulli(noise_)) text = na_text_;
  }
  return {std::move(text), FinishReason::stop, 0, std::nullopt, 0, 1};
}

}  // namespace fsre::detail
