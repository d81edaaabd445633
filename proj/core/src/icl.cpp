#include "fsre/icl.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "fsre/error.hpp"
#include "fsre/text.hpp"

namespace fsre {

using nlohmann::json;

namespace {

std::string strip_punct_and_space(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  auto skip = [](char c) {
    return is_ascii_punct(c) || std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (begin < end && skip(text[begin])) ++begin;
  while (end > begin && skip(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string normalize_key(std::string_view text) { return strip_punct_and_space(to_lower(text)); }

std::string first_line(std::string_view completion) {
  const auto body = trim(completion);
  const auto newline = body.find('\n');
  return std::string(newline == std::string_view::npos ? body : body.substr(0, newline));
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct Occurrence {
  std::size_t begin;
  std::size_t end;
  std::size_t label;
};

}  // namespace

std::string parse_relation(std::string_view completion, const RelationSchema& schema) {
  const auto text = normalize_key(first_line(completion));
  if (text.empty()) return std::string(kUnparseable);

  const auto& labels = schema.labels();
  std::vector<std::vector<std::string>> keys(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const auto& raw : {labels[i], schema.verbalize(labels[i])}) {
      auto key = normalize_key(raw);
      if (!key.empty() && std::find(keys[i].begin(), keys[i].end(), key) == keys[i].end()) {
        keys[i].push_back(std::move(key));
      }
    }
  }

  std::set<std::size_t> exact;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::find(keys[i].begin(), keys[i].end(), text) != keys[i].end()) exact.insert(i);
  }
  if (exact.size() == 1) return labels[*exact.begin()];
  if (exact.size() > 1) return std::string(kUnparseable);

  std::vector<Occurrence> found;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const auto& key : keys[i]) {
      for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + 1)) {
        const auto end = pos + key.size();
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]) || !is_word_char(key.front());
        const bool right_ok =
            end == text.size() || !is_word_char(text[end]) || !is_word_char(key.back());
        if (left_ok && right_ok) found.push_back({pos, end, i});
      }
    }
  }

  std::set<std::size_t> survivors;
  for (const auto& occ : found) {
    const bool nested = std::any_of(found.begin(), found.end(), [&](const Occurrence& other) {
      return other.begin <= occ.begin && occ.end <= other.end &&
             (other.end - other.begin) > (occ.end - occ.begin);
    });
    if (!nested) survivors.insert(occ.label);
  }
  if (survivors.size() == 1) return labels[*survivors.begin()];
  return std::string(kUnparseable);
}

std::vector<Prediction> run_icl(const Dataset& test, const Dataset& train,
                                const RelationSchema& schema, const IclRunConfig& cfg,
                                Backend& backend, std::vector<RenderedPrompt>* prompts_out) {
  std::vector<Prediction> predictions(test.instances.size());
  std::vector<CompletionRequest> requests;
  std::vector<std::size_t> request_owner;
  requests.reserve(test.instances.size());

  std::optional<std::vector<RelationInstance>> shared_demos;
  for (std::size_t i = 0; i < test.instances.size(); ++i) {
    const auto& query = test.instances[i];
    auto& prediction = predictions[i];
    prediction.instance_id = query.id;

    std::vector<RelationInstance> fresh;
    const std::vector<RelationInstance>* demos = &fresh;
    if (cfg.per_relation_demos > 0) {
      if (cfg.resample_per_query) {
        fresh = select_demonstrations(train, cfg.per_relation_demos, cfg.base_seed + i);
      } else {
        if (!shared_demos) {
          shared_demos = select_demonstrations(train, cfg.per_relation_demos, cfg.base_seed);
        }
        demos = &*shared_demos;
      }
    }

    RenderedPrompt prompt;
    try {
      prompt = build_icl_prompt(cfg.style, schema, *demos, query, cfg.budget, cfg.templates);
    } catch (const DataError& e) {
      prediction.predicted = std::string(kUnparseable);
      prediction.raw_completion = std::string("error: ") + e.what();
      continue;
    }
    prediction.prompt_demo_ids = prompt.demo_ids;

    CompletionRequest request;
    request.prompt = prompt.text;
    if (cfg.embed_oracle_marker) {
      request.prompt += oracle_marker(schema.verbalize(query.relation), query.id);
    }
    request.temperature = cfg.temperature;
    request.max_completion_tokens = cfg.max_completion_tokens;
    request.stop_sequences = cfg.stop_sequences;
    requests.push_back(std::move(request));
    request_owner.push_back(i);
    if (prompts_out != nullptr) prompts_out->push_back(std::move(prompt));
  }

  const auto responses = complete_batch(backend, requests, cfg.max_concurrent_requests);
  for (std::size_t r = 0; r < responses.size(); ++r) {
    auto& prediction = predictions[request_owner[r]];
    const auto& response = responses[r];
    if (!response.ok()) {
      prediction.predicted = std::string(kUnparseable);
      prediction.raw_completion = "error: " + response.error.value_or("backend failure");
      continue;
    }
    prediction.raw_completion = response.text;
    prediction.predicted = parse_relation(response.text, schema);
  }
  return predictions;
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  for (const auto& p : predictions) {
    json line{{"instance_id", p.instance_id},
              {"predicted", p.predicted},
              {"raw_completion", p.raw_completion},
              {"prompt_demo_ids", p.prompt_demo_ids}};
    out << line.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const auto record = json::parse(line);
      Prediction p;
      p.instance_id = record.at("instance_id").get<std::string>();
      p.predicted = record.at("predicted").get<std::string>();
      p.raw_completion = record.value("raw_completion", std::string{});
      p.prompt_demo_ids = record.value("prompt_demo_ids", std::vector<std::string>{});
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError("prediction record " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return out;
}

}  // namespace fsre
