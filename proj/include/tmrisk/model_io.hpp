#pragma once

// JSON persistence for trained machines. The document is emitted compactly
// with object keys in sorted order, so serialize -> load -> serialize is
// byte-identical.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "tmrisk/csv.hpp"
#include "tmrisk/tsetlin.hpp"

namespace tmrisk {

inline constexpr const char* kModelFormat = "tmrisk-model";
inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json params_to_json(const TMParams& p) {
  nlohmann::json j;
  j["num_clauses"] = p.num_clauses;
  j["threshold"] = p.threshold;
  j["specificity"] = p.specificity;
  j["epochs"] = p.epochs;
  j["states_per_action"] = p.states_per_action;
  j["seed"] = p.seed;
  if (p.class_weights) j["class_weights"] = *p.class_weights;
  return j;
}

inline TMParams params_from_json(const nlohmann::json& j) {
  TMParams p;
  p.num_clauses = j.at("num_clauses").get<int>();
  p.threshold = j.at("threshold").get<int>();
  p.specificity = j.at("specificity").get<double>();
  p.epochs = j.at("epochs").get<int>();
  p.states_per_action = j.value("states_per_action", 100);
  p.seed = j.value("seed", kDefaultSeed);
  if (j.contains("class_weights")) p.class_weights = j["class_weights"].get<std::array<double, 2>>();
  p.validate();
  return p;
}

inline nlohmann::json model_to_json(const TsetlinMachine& model) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["params"] = params_to_json(model.params());
  j["schema"] = model.schema().to_json();
  j["schema_fingerprint"] = model.schema().fingerprint();
  j["literal_count"] = model.literal_count();
  j["trained"] = model.trained();
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : model.clauses()) {
    nlohmann::json cj;
    cj["polarity"] = static_cast<int>(c.polarity());
    cj["states"] = std::vector<int>(c.states().begin(), c.states().end());
    clauses.push_back(std::move(cj));
  }
  j["clauses"] = std::move(clauses);
  if (!model.metadata.empty()) j["metadata"] = model.metadata;
  return j;
}

inline std::string serialize_model(const TsetlinMachine& model) { return model_to_json(model).dump() + "\n"; }

inline TsetlinMachine model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw SchemaError("not a tmrisk model document");
    if (j.at("version").get<int>() != kModelFormatVersion) throw SchemaError("unsupported model format version");
    FeatureSchema schema = FeatureSchema::from_json(j.at("schema"));
    if (schema.fingerprint() != j.at("schema_fingerprint").get<std::string>())
      throw SchemaError("schema fingerprint does not match embedded schema");
    TsetlinMachine model(std::move(schema), params_from_json(j.at("params")));
    const auto& clauses = j.at("clauses");
    if (clauses.size() != model.clauses().size())
      throw StructuralError("model declares " + std::to_string(model.clauses().size()) + " clauses, document has " +
                            std::to_string(clauses.size()));
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      auto& clause = model.clauses()[c];
      if (clauses[c].at("polarity").get<int>() != static_cast<int>(clause.polarity()))
        throw StructuralError("clause " + std::to_string(c) + " has unexpected polarity");
      const auto states = clauses[c].at("states").get<std::vector<int>>();
      if (states.size() != model.literal_count())
        throw StructuralError("clause " + std::to_string(c) + " has " + std::to_string(states.size()) +
                              " automata, expected " + std::to_string(model.literal_count()));
      for (std::size_t lit = 0; lit < states.size(); ++lit) clause.set_state(lit, states[lit]);
    }
    model.set_trained(j.at("trained").get<bool>());
    if (j.contains("metadata")) model.metadata = j["metadata"];
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model JSON: ") + e.what());
  }
}

inline TsetlinMachine deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const std::filesystem::path& path, const TsetlinMachine& model) {
  write_text_file(path, serialize_model(model));
}

inline TsetlinMachine load_model(const std::filesystem::path& path) { return deserialize_model(read_text_file(path)); }

}  // namespace tmrisk
