#pragma once

// Feature schema and record binarization: thermometer encoding for
// continuous features, one-hot for categorical ones, a single bit for
// binary ones, followed by negation expansion.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmrisk/error.hpp"
#include "tmrisk/literals.hpp"

namespace tmrisk {

enum class FeatureKind { continuous, categorical, binary };

inline std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::continuous: return "continuous";
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::binary: return "binary";
  }
  return "?";
}

inline FeatureKind feature_kind_from_string(std::string_view s) {
  if (s == "continuous") return FeatureKind::continuous;
  if (s == "categorical") return FeatureKind::categorical;
  if (s == "binary") return FeatureKind::binary;
  throw SchemaError("unknown feature kind '" + std::string(s) + "'");
}

/// Shortest decimal text that round-trips the double ("3", "0.41").
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::binary;
  std::vector<double> cutoffs;                 // continuous only, strictly ascending
  std::vector<std::string> categories;         // categorical only
  std::string unit;                            // optional, rendered after cutoffs
  std::vector<std::vector<double>> alt_cutoffs;  // extra ladders selectable by bin count

  std::size_t bit_width() const noexcept {
    switch (kind) {
      case FeatureKind::continuous: return cutoffs.size();
      case FeatureKind::categorical: return categories.size();
      case FeatureKind::binary: return 1;
    }
    return 0;
  }

  void validate() const {
    if (name.empty()) throw SchemaError("feature with empty name");
    auto check_ladder = [this](const std::vector<double>& ladder) {
      if (ladder.empty()) throw SchemaError("feature '" + name + "': continuous feature needs cutoffs");
      for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!std::isfinite(ladder[i])) throw SchemaError("feature '" + name + "': non-finite cutoff");
        if (i > 0 && !(ladder[i] > ladder[i - 1]))
          throw SchemaError("feature '" + name + "': cutoffs must be strictly ascending");
      }
    };
    switch (kind) {
      case FeatureKind::continuous:
        check_ladder(cutoffs);
        for (const auto& l : alt_cutoffs) check_ladder(l);
        if (!categories.empty()) throw SchemaError("feature '" + name + "': continuous feature has categories");
        break;
      case FeatureKind::categorical: {
        if (categories.empty()) throw SchemaError("feature '" + name + "': categorical feature needs categories");
        auto sorted = categories;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
          throw SchemaError("feature '" + name + "': duplicate category");
        if (!cutoffs.empty()) throw SchemaError("feature '" + name + "': categorical feature has cutoffs");
        break;
      }
      case FeatureKind::binary:
        if (!cutoffs.empty() || !categories.empty())
          throw SchemaError("feature '" + name + "': binary feature takes no cutoffs or categories");
        break;
    }
  }
};

/// Raw value of one feature: real for continuous, label for categorical,
/// truth value for binary.
using FeatureValue = std::variant<double, std::string, bool>;

struct PatientRecord {
  std::vector<FeatureValue> values;  // aligned with FeatureSchema::specs()
  std::optional<Outcome> label;
};

/// Where a raw bit comes from.
struct BitOrigin {
  std::size_t feature = 0;  // index into specs
  std::size_t offset = 0;   // cutoff / category index within the feature
};

class FeatureSchema {
 public:
  FeatureSchema() = default;

  explicit FeatureSchema(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
    std::vector<std::string> names;
    for (const auto& s : specs_) {
      s.validate();
      names.push_back(s.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw SchemaError("duplicate feature name '" + *std::adjacent_find(names.begin(), names.end()) + "'");
    for (std::size_t f = 0; f < specs_.size(); ++f) {
      for (std::size_t k = 0; k < specs_[f].bit_width(); ++k) {
        origins_.push_back({f, k});
        provenance_.push_back(generated_text(f, k, false));
      }
    }
  }

  const std::vector<FeatureSpec>& specs() const noexcept { return specs_; }
  std::size_t raw_bit_count() const noexcept { return origins_.size(); }
  std::size_t literal_count() const noexcept { return 2 * origins_.size(); }
  const std::vector<std::string>& provenance() const noexcept { return provenance_; }
  const BitOrigin& origin(std::size_t raw_bit) const { return origins_.at(raw_bit); }

  std::optional<std::size_t> find_feature(std::string_view name) const {
    for (std::size_t i = 0; i < specs_.size(); ++i)
      if (specs_[i].name == name) return i;
    return std::nullopt;
  }

  /// Replaces the predicate text of one raw bit. An empty text marks a
  /// provenance gap, which rule extraction reports.
  void set_provenance(std::size_t raw_bit, std::string text) {
    if (raw_bit >= provenance_.size()) throw StructuralError("provenance index out of range");
    provenance_[raw_bit] = std::move(text);
    custom_.resize(provenance_.size(), false);
    custom_[raw_bit] = true;
  }

  /// Human-readable text of literal `lit` in [0, 2B). Negations of
  /// thermometer bits render as "<= cutoff", of one-hot bits as "≠ category".
  std::string literal_text(std::size_t lit) const {
    const std::size_t b = raw_bit_count();
    if (lit >= 2 * b) throw StructuralError("literal index " + std::to_string(lit) + " out of range");
    const bool negated = lit >= b;
    const std::size_t raw = negated ? lit - b : lit;
    const std::string& text = provenance_[raw];
    if (text.empty()) throw SchemaError("no provenance text for bit " + std::to_string(raw));
    if (raw < custom_.size() && custom_[raw]) return negated ? "NOT (" + text + ")" : text;
    if (!negated) return text;
    return generated_text(origins_[raw].feature, origins_[raw].offset, true);
  }

  /// Inverse of literal_text. Accepts "<=" and "!=" as ASCII spellings.
  std::optional<std::size_t> parse_predicate(std::string_view text) const {
    const std::string key = normalise(text);
    for (std::size_t lit = 0; lit < literal_count(); ++lit) {
      const std::size_t raw = lit % raw_bit_count();
      if (provenance_[raw].empty()) continue;
      if (normalise(literal_text(lit)) == key) return lit;
    }
    return std::nullopt;
  }

  std::size_t require_predicate(std::string_view text) const {
    auto lit = parse_predicate(text);
    if (!lit) throw SchemaError("predicate '" + std::string(text) + "' is not expressible in the schema");
    return *lit;
  }

  /// Copy using, for every continuous feature, the ladder that yields
  /// `n_bins` intervals (|cutoffs| + 1) when one is declared.
  FeatureSchema with_bins(std::size_t n_bins) const {
    auto specs = specs_;
    for (auto& s : specs) {
      if (s.kind != FeatureKind::continuous) continue;
      if (s.cutoffs.size() + 1 == n_bins) continue;
      for (const auto& ladder : s.alt_cutoffs) {
        if (ladder.size() + 1 == n_bins) {
          auto old = s.cutoffs;
          s.cutoffs = ladder;
          std::erase(s.alt_cutoffs, ladder);
          s.alt_cutoffs.push_back(std::move(old));
          std::sort(s.alt_cutoffs.begin(), s.alt_cutoffs.end(),
                    [](const auto& a, const auto& b) { return a.size() < b.size(); });
          break;
        }
      }
    }
    return FeatureSchema(std::move(specs));
  }

  nlohmann::json to_json() const {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& s : specs_) {
      nlohmann::json f;
      f["name"] = s.name;
      f["kind"] = std::string(to_string(s.kind));
      if (s.kind == FeatureKind::continuous) {
        f["cutoffs"] = s.cutoffs;
        if (!s.alt_cutoffs.empty()) f["alt_cutoffs"] = s.alt_cutoffs;
      }
      if (s.kind == FeatureKind::categorical) f["categories"] = s.categories;
      if (!s.unit.empty()) f["unit"] = s.unit;
      features.push_back(std::move(f));
    }
    nlohmann::json j;
    j["features"] = std::move(features);
    nlohmann::json overrides = nlohmann::json::object();
    for (std::size_t i = 0; i < custom_.size(); ++i)
      if (custom_[i]) overrides[std::to_string(i)] = provenance_[i];
    if (!overrides.empty()) j["provenance"] = std::move(overrides);
    return j;
  }

  static FeatureSchema from_json(const nlohmann::json& j) {
    try {
      std::vector<FeatureSpec> specs;
      for (const auto& f : j.at("features")) {
        FeatureSpec s;
        s.name = f.at("name").get<std::string>();
        s.kind = feature_kind_from_string(f.at("kind").get<std::string>());
        if (f.contains("cutoffs")) s.cutoffs = f["cutoffs"].get<std::vector<double>>();
        if (f.contains("alt_cutoffs")) s.alt_cutoffs = f["alt_cutoffs"].get<std::vector<std::vector<double>>>();
        if (f.contains("categories")) s.categories = f["categories"].get<std::vector<std::string>>();
        if (f.contains("unit")) s.unit = f["unit"].get<std::string>();
        specs.push_back(std::move(s));
      }
      FeatureSchema schema(std::move(specs));
      if (j.contains("provenance")) {
        for (const auto& [key, text] : j["provenance"].items())
          schema.set_provenance(std::stoul(key), text.get<std::string>());
      }
      return schema;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("schema JSON: ") + e.what());
    }
  }

  /// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
  std::string fingerprint() const {
    const std::string canon = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 15];
    return out;
  }

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.to_json() == b.to_json();
  }

 private:
  std::string generated_text(std::size_t f, std::size_t k, bool negated) const {
    const auto& s = specs_[f];
    switch (s.kind) {
      case FeatureKind::continuous: {
        std::string t = s.name + (negated ? " ≤ " : " > ") + format_number(s.cutoffs[k]);
        if (!s.unit.empty()) t += " " + s.unit;
        return t;
      }
      case FeatureKind::categorical:
        return s.name + (negated ? " ≠ " : " = ") + s.categories[k];
      case FeatureKind::binary:
        return negated ? "NOT " + s.name : s.name;
    }
    return {};
  }

  static std::string normalise(std::string_view text) {
    std::string s;
    bool space = false;
    for (char c : text) {
      if (c == ' ' || c == '\t') {
        space = !s.empty();
        continue;
      }
      if (space) s.push_back(' ');
      space = false;
      s.push_back(c);
    }
    auto replace = [&s](std::string_view from, std::string_view to) {
      for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    };
    replace("<=", "≤");
    replace("!=", "≠");
    return s;
  }

  std::vector<FeatureSpec> specs_;
  std::vector<BitOrigin> origins_;
  std::vector<std::string> provenance_;
  std::vector<bool> custom_;
};

/// Bit i is set iff value > cutoffs[i]; the result is a run of trues
/// followed by falses.
inline std::vector<bool> thermometer_encode(double value, std::span<const double> cutoffs) {
  if (!std::isfinite(value)) throw EncodingError("non-finite value " + format_number(value));
  if (cutoffs.empty()) throw EncodingError("thermometer encoding needs at least one cutoff");
  std::vector<bool> bits(cutoffs.size());
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (i > 0 && !(cutoffs[i] > cutoffs[i - 1])) throw EncodingError("cutoffs must be strictly ascending");
    bits[i] = value > cutoffs[i];
  }
  return bits;
}

inline std::vector<bool> one_hot_encode(std::string_view value, std::span<const std::string> categories,
                                        std::string_view feature = "") {
  std::vector<bool> bits(categories.size(), false);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == value) {
      bits[i] = true;
      return bits;
    }
  }
  std::string msg = "unknown category '" + std::string(value) + "'";
  if (!feature.empty()) msg += " for feature '" + std::string(feature) + "'";
  throw EncodingError(msg);
}

inline LiteralVector binarize_record(const PatientRecord& record, const FeatureSchema& schema) {
  const auto& specs = schema.specs();
  if (record.values.size() != specs.size())
    throw EncodingError("record has " + std::to_string(record.values.size()) + " values, schema has " +
                        std::to_string(specs.size()) + " features");
  std::vector<bool> raw;
  raw.reserve(schema.raw_bit_count());
  for (std::size_t f = 0; f < specs.size(); ++f) {
    const auto& spec = specs[f];
    const auto& v = record.values[f];
    try {
      switch (spec.kind) {
        case FeatureKind::continuous: {
          const double* d = std::get_if<double>(&v);
          if (!d) throw EncodingError("expected a number");
          auto bits = thermometer_encode(*d, spec.cutoffs);
          raw.insert(raw.end(), bits.begin(), bits.end());
          break;
        }
        case FeatureKind::categorical: {
          const std::string* s = std::get_if<std::string>(&v);
          if (!s) throw EncodingError("expected a category label");
          auto bits = one_hot_encode(*s, spec.categories, spec.name);
          raw.insert(raw.end(), bits.begin(), bits.end());
          break;
        }
        case FeatureKind::binary: {
          const bool* b = std::get_if<bool>(&v);
          if (!b) throw EncodingError("expected a truth value");
          raw.push_back(*b);
          break;
        }
      }
    } catch (const EncodingError& e) {
      const std::string what = e.what();
      if (what.find("'" + spec.name + "'") != std::string::npos) throw;
      throw EncodingError("feature '" + spec.name + "': " + what);
    }
  }
  return LiteralVector(raw);
}

/// Binarizes labeled records in order. Failures cite the record index.
inline std::vector<Sample> binarize_dataset(std::span<const PatientRecord> records, const FeatureSchema& schema) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].label) throw EncodingError("record " + std::to_string(i) + ": missing label");
    try {
      out.push_back({binarize_record(records[i], schema), *records[i].label});
    } catch (const EncodingError& e) {
      throw EncodingError("record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

/// Scaffolding schema shaped after the published clinical clauses. The
/// cut-offs are illustrative, not clinical claims.
inline FeatureSchema photo_like_schema() {
  std::vector<FeatureSpec> specs;
  specs.push_back({"HospitalStay", FeatureKind::continuous, {1, 3, 7}, {}, "days", {{3}, {1, 2, 3, 5, 7}}});
  specs.push_back({"TumourNumber", FeatureKind::continuous, {1, 3, 7}, {}, "", {{3}, {1, 2, 3, 5, 7}}});
  specs.push_back({"EQ5DScore", FeatureKind::continuous, {0.41, 0.49, 0.76}, {}, "", {{0.49}, {0.3, 0.41, 0.49, 0.6, 0.76}}});
  specs.push_back({"SurgeonGrade", FeatureKind::categorical, {}, {"Consultant", "Registrar", "Other"}, "", {}});
  specs.push_back({"SmokingStatus", FeatureKind::categorical, {}, {"never", "former", "current"}, "", {}});
  return FeatureSchema(std::move(specs));
}

}  // namespace tmrisk
