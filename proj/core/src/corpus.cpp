#include "fsre/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fsre/error.hpp"
#include "fsre/random.hpp"
#include "fsre/text.hpp"

namespace fsre {

using nlohmann::json;

namespace {

std::string join_span(const std::vector<std::string>& tokens, Span span) {
  if (span.end > tokens.size() || span.start >= span.end) return {};
  return detokenize(std::span<const std::string>(tokens).subspan(span.start, span.size()));
}

std::string span_text(Span s) {
  return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + ")";
}

std::string record_prefix(std::size_t index) { return "record " + std::to_string(index) + ": "; }

template <typename T>
T required_field(const json& record, std::size_t index, const char* field) {
  const auto it = record.find(field);
  if (it == record.end()) {
    throw DataError(record_prefix(index) + "missing field '" + field + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(record_prefix(index) + "field '" + field + "' has the wrong type");
  }
}

std::size_t required_index(const json& record, std::size_t index, const char* field) {
  const auto value = required_field<std::int64_t>(record, index, field);
  if (value < 0) {
    throw DataError(record_prefix(index) + "field '" + field + "' is negative (" +
                    std::to_string(value) + ")");
  }
  return static_cast<std::size_t>(value);
}

void check_record_spans(const RelationInstance& inst, std::size_t index) {
  try {
    check_spans(inst);
  } catch (const DataError& e) {
    throw DataError(record_prefix(index) + e.what());
  }
}

RelationInstance from_native(const json& record, std::size_t index) {
  if (!record.is_object()) throw DataError(record_prefix(index) + "not a JSON object");
  RelationInstance inst;
  inst.id = required_field<std::string>(record, index, "id");
  inst.tokens = required_field<std::vector<std::string>>(record, index, "tokens");
  inst.head = {required_index(record, index, "head_start"), required_index(record, index, "head_end")};
  inst.tail = {required_index(record, index, "tail_start"), required_index(record, index, "tail_end")};
  inst.head_type = required_field<std::string>(record, index, "head_type");
  inst.tail_type = required_field<std::string>(record, index, "tail_type");
  inst.relation = required_field<std::string>(record, index, "relation");
  check_record_spans(inst, index);
  return inst;
}

RelationInstance from_tacred(const json& record, std::size_t index) {
  if (!record.is_object()) throw DataError(record_prefix(index) + "not a JSON object");
  RelationInstance inst;
  inst.id = required_field<std::string>(record, index, "id");
  inst.tokens = required_field<std::vector<std::string>>(record, index, "token");
  // TACRED end indices are inclusive.
  inst.head = {required_index(record, index, "subj_start"),
               required_index(record, index, "subj_end") + 1};
  inst.tail = {required_index(record, index, "obj_start"),
               required_index(record, index, "obj_end") + 1};
  inst.head_type = required_field<std::string>(record, index, "subj_type");
  inst.tail_type = required_field<std::string>(record, index, "obj_type");
  inst.relation = required_field<std::string>(record, index, "relation");
  check_record_spans(inst, index);
  return inst;
}

json to_native(const RelationInstance& inst) {
  return json{{"id", inst.id},
              {"tokens", inst.tokens},
              {"head_start", inst.head.start},
              {"head_end", inst.head.end},
              {"head_type", inst.head_type},
              {"tail_start", inst.tail.start},
              {"tail_end", inst.tail.end},
              {"tail_type", inst.tail_type},
              {"relation", inst.relation}};
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string RelationInstance::head_mention() const { return join_span(tokens, head); }
std::string RelationInstance::tail_mention() const { return join_span(tokens, tail); }

void check_spans(const RelationInstance& inst) {
  const auto n = inst.tokens.size();
  for (const auto& [name, span] : {std::pair{"head", inst.head}, std::pair{"tail", inst.tail}}) {
    if (!(span.start < span.end && span.end <= n)) {
      throw DataError(std::string(name) + " span " + span_text(span) + " out of range for " +
                      std::to_string(n) + " tokens");
    }
  }
  if (inst.head == inst.tail) {
    throw DataError("head and tail spans are identical " + span_text(inst.head));
  }
}

// --- schema ---------------------------------------------------------------

std::string default_verbalization(std::string_view label) {
  std::string out(label);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

RelationSchema RelationSchema::create(Spec spec) {
  RelationSchema schema;
  std::set<std::string> seen;
  for (const auto& label : spec.labels) {
    if (label.empty()) throw DataError("schema: empty label");
    if (!seen.insert(label).second) throw DataError("schema: duplicate label '" + label + "'");
  }
  if (spec.na_label && !seen.contains(*spec.na_label)) {
    throw DataError("schema: na_label '" + *spec.na_label + "' is not a label");
  }
  for (const auto& [relation, pairs] : spec.type_constraints) {
    if (!seen.contains(relation)) {
      throw DataError("schema: type constraint for unknown relation '" + relation + "'");
    }
  }
  for (const auto& [relation, text] : spec.verbalizations) {
    if (!seen.contains(relation)) {
      throw DataError("schema: verbalization for unknown relation '" + relation + "'");
    }
  }
  if (spec.entity_types.empty()) {
    for (const auto& [relation, pairs] : spec.type_constraints) {
      for (const auto& [head, tail] : pairs) {
        spec.entity_types.insert(head);
        spec.entity_types.insert(tail);
      }
    }
  } else {
    for (const auto& [relation, pairs] : spec.type_constraints) {
      for (const auto& [head, tail] : pairs) {
        for (const auto& type : {head, tail}) {
          if (!spec.entity_types.contains(type)) {
            throw DataError("schema: constraint for '" + relation + "' uses unknown entity type '" +
                            type + "'");
          }
        }
      }
    }
  }

  std::map<std::string, std::string> verbalizations;
  std::map<std::string, std::string> owner;
  for (const auto& label : spec.labels) {
    const auto it = spec.verbalizations.find(label);
    std::string text = it != spec.verbalizations.end() ? it->second : default_verbalization(label);
    const auto key = to_lower(trim(text));
    if (key.empty()) throw DataError("schema: empty verbalization for '" + label + "'");
    if (const auto [pos, fresh] = owner.emplace(key, label); !fresh) {
      throw DataError("schema: labels '" + pos->second + "' and '" + label +
                      "' share the verbalization '" + text + "'");
    }
    verbalizations.emplace(label, std::move(text));
  }

  schema.labels_ = std::move(spec.labels);
  schema.na_label_ = std::move(spec.na_label);
  schema.verbalizations_ = std::move(verbalizations);
  schema.type_constraints_ = std::move(spec.type_constraints);
  schema.entity_types_ = std::move(spec.entity_types);
  return schema;
}

bool RelationSchema::contains(std::string_view label) const {
  return verbalizations_.find(std::string(label)) != verbalizations_.end();
}

bool RelationSchema::is_na(std::string_view label) const {
  return na_label_ && *na_label_ == label;
}

std::size_t RelationSchema::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DataError("unknown relation '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

const std::string& RelationSchema::verbalize(std::string_view label) const {
  const auto it = verbalizations_.find(std::string(label));
  if (it == verbalizations_.end()) {
    throw DataError("unknown relation '" + std::string(label) + "'");
  }
  return it->second;
}

const std::set<TypePair>* RelationSchema::constraints_for(std::string_view relation) const {
  const auto it = type_constraints_.find(std::string(relation));
  if (it == type_constraints_.end() || it->second.empty()) return nullptr;
  return &it->second;
}

bool RelationSchema::allows(std::string_view relation, std::string_view head_type,
                            std::string_view tail_type) const {
  const auto* pairs = constraints_for(relation);
  if (pairs == nullptr) return true;
  return pairs->contains(TypePair{std::string(head_type), std::string(tail_type)});
}

std::optional<std::string> RelationSchema::resolve(std::string_view text) const {
  const auto key = to_lower(trim(text));
  if (key.empty()) return std::nullopt;
  for (const auto& label : labels_) {
    if (to_lower(label) == key) return label;
  }
  for (const auto& label : labels_) {
    if (to_lower(trim(verbalizations_.at(label))) == key) return label;
  }
  return std::nullopt;
}

RelationSchema parse_schema(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("schema: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("schema: expected a JSON object");
  RelationSchema::Spec spec;
  try {
    spec.labels = doc.at("labels").get<std::vector<std::string>>();
    if (const auto it = doc.find("na_label"); it != doc.end() && !it->is_null()) {
      spec.na_label = it->get<std::string>();
    }
    if (const auto it = doc.find("verbalizations"); it != doc.end()) {
      spec.verbalizations = it->get<std::map<std::string, std::string>>();
    }
    if (const auto it = doc.find("type_constraints"); it != doc.end()) {
      for (const auto& [relation, pairs] : it->items()) {
        auto& out = spec.type_constraints[relation];
        for (const auto& pair : pairs) {
          if (!pair.is_array() || pair.size() != 2) {
            throw DataError("schema: type constraint for '" + relation +
                            "' must be [head_type, tail_type] pairs");
          }
          out.emplace(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
      }
    }
    if (const auto it = doc.find("entity_types"); it != doc.end()) {
      spec.entity_types = it->get<std::set<std::string>>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  return RelationSchema::create(std::move(spec));
}

RelationSchema load_schema(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schema(buffer.str());
}

std::string schema_to_json(const RelationSchema& schema) {
  json constraints = json::object();
  for (const auto& [relation, pairs] : schema.type_constraints()) {
    json list = json::array();
    for (const auto& [head, tail] : pairs) list.push_back({head, tail});
    constraints[relation] = std::move(list);
  }
  json doc{{"labels", schema.labels()},
           {"na_label", schema.na_label() ? json(*schema.na_label()) : json(nullptr)},
           {"verbalizations", schema.verbalizations()},
           {"type_constraints", std::move(constraints)},
           {"entity_types", schema.entity_types()}};
  return doc.dump(2);
}

// --- datasets -------------------------------------------------------------

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "tacred_json" || name == "tacred") return DatasetFormat::tacred_json;
  if (name == "jsonl_native" || name == "jsonl" || name == "native") return DatasetFormat::jsonl_native;
  throw ConfigError("unknown dataset format '" + std::string(name) + "'");
}

Dataset parse_dataset(std::istream& in, DatasetFormat format) {
  Dataset dataset;
  if (format == DatasetFormat::tacred_json) {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("invalid TACRED JSON: ") + e.what());
    }
    if (!doc.is_array()) throw DataError("TACRED file must hold a JSON array");
    dataset.instances.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      dataset.instances.push_back(from_tacred(doc[i], i));
    }
    return dataset;
  }
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(record_prefix(index) + "invalid JSON: " + e.what());
    }
    dataset.instances.push_back(from_native(record, index));
    ++index;
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  auto in = open_input(path);
  Dataset dataset = parse_dataset(in, format);
  dataset.schema_ref = path.string();
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const RelationSchema& schema) {
  Dataset dataset = load_dataset(path, format);
  check_dataset(dataset, schema);
  return dataset;
}

void check_unique_ids(const Dataset& dataset) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    if (!ids.insert(dataset.instances[i].id).second) {
      throw DataError(record_prefix(i) + "duplicate id '" + dataset.instances[i].id + "'");
    }
  }
}

void check_dataset(const Dataset& dataset, const RelationSchema& schema) {
  check_unique_ids(dataset);
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const auto& inst = dataset.instances[i];
    check_record_spans(inst, i);
    if (!schema.contains(inst.relation)) {
      throw DataError(record_prefix(i) + "relation '" + inst.relation + "' is not in the schema");
    }
  }
}

void write_native(std::ostream& out, const Dataset& dataset) {
  for (const auto& inst : dataset.instances) out << to_native(inst).dump() << '\n';
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_native(out, dataset);
}

// --- sampling -------------------------------------------------------------

std::map<std::string, std::size_t> label_histogram(const Dataset& dataset) {
  std::map<std::string, std::size_t> counts;
  for (const auto& inst : dataset.instances) ++counts[inst.relation];
  return counts;
}

std::vector<const RelationInstance*> instances_of(const Dataset& dataset,
                                                  std::string_view relation) {
  std::vector<const RelationInstance*> out;
  for (const auto& inst : dataset.instances) {
    if (inst.relation == relation) out.push_back(&inst);
  }
  return out;
}

Dataset sample_k_shot(const Dataset& dataset, const ShotConfig& cfg, const SampleOptions& options) {
  std::map<std::string, std::vector<const RelationInstance*>> by_relation;
  for (const auto& inst : dataset.instances) {
    if (options.exclude_ids.contains(inst.id)) continue;
    by_relation[inst.relation].push_back(&inst);
  }

  std::vector<std::string> order;
  if (options.schema != nullptr) {
    for (const auto& label : options.schema->labels()) {
      if (by_relation.contains(label)) order.push_back(label);
    }
  }
  for (const auto& [relation, members] : by_relation) {
    if (std::find(order.begin(), order.end(), relation) == order.end()) order.push_back(relation);
  }

  Dataset out;
  out.schema_ref = dataset.schema_ref;
  for (const auto& relation : order) {
    auto members = by_relation[relation];
    std::stable_sort(members.begin(), members.end(),
                     [](const auto* a, const auto* b) { return a->id < b->id; });
    SeededRng rng(derive_seed(cfg.seed, relation));
    rng.shuffle(std::span(members));
    const auto take = std::min(cfg.k_per_relation, members.size());
    if (take < cfg.k_per_relation && options.warnings != nullptr) {
      options.warnings->push_back("relation '" + relation + "' has " +
                                  std::to_string(members.size()) + " instances, fewer than K=" +
                                  std::to_string(cfg.k_per_relation));
    }
    for (std::size_t i = 0; i < take; ++i) out.instances.push_back(*members[i]);
  }
  return out;
}

}  // namespace fsre
