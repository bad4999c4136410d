#pragma once

// EORTC recurrence risk tables for NMIBC: additive points over six
// clinical factors (0-17) and four risk groups.

#include <array>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tmrisk/csv.hpp"
#include "tmrisk/error.hpp"
#include "tmrisk/literals.hpp"

namespace tmrisk::eortc {

enum class TumourCount { single, two_to_seven, eight_or_more };
enum class TumourSize { under_3cm, at_least_3cm };
enum class PriorRecurrence { primary, at_most_one_per_year, more_than_one_per_year };
enum class TCategory { Ta, T1 };
enum class Grade { G1, G2, G3 };

struct Factors {
  TumourCount count = TumourCount::single;
  TumourSize size = TumourSize::under_3cm;
  PriorRecurrence prior = PriorRecurrence::primary;
  TCategory t_category = TCategory::Ta;
  bool cis = false;
  Grade grade = Grade::G1;
};

/// Risk groups by score band: 0, 1-4, 5-9, 10-17.
enum class RiskGroup { score_0 = 0, score_1_4 = 1, score_5_9 = 2, score_10_17 = 3 };

inline std::string_view to_string(RiskGroup g) {
  switch (g) {
    case RiskGroup::score_0: return "0";
    case RiskGroup::score_1_4: return "1-4";
    case RiskGroup::score_5_9: return "5-9";
    case RiskGroup::score_10_17: return "10-17";
  }
  return "?";
}

struct Result {
  int score = 0;
  RiskGroup risk_group = RiskGroup::score_0;
};

inline RiskGroup group_for_score(int score) {
  if (score < 0 || score > 17) throw InvalidArgument("EORTC recurrence score outside 0-17");
  if (score == 0) return RiskGroup::score_0;
  if (score <= 4) return RiskGroup::score_1_4;
  if (score <= 9) return RiskGroup::score_5_9;
  return RiskGroup::score_10_17;
}

inline Result recurrence_score(const Factors& f) {
  int score = 0;
  switch (f.count) {
    case TumourCount::single: break;
    case TumourCount::two_to_seven: score += 3; break;
    case TumourCount::eight_or_more: score += 6; break;
  }
  if (f.size == TumourSize::at_least_3cm) score += 3;
  switch (f.prior) {
    case PriorRecurrence::primary: break;
    case PriorRecurrence::at_most_one_per_year: score += 2; break;
    case PriorRecurrence::more_than_one_per_year: score += 4; break;
  }
  if (f.t_category == TCategory::T1) score += 1;
  if (f.cis) score += 1;
  switch (f.grade) {
    case Grade::G1: break;
    case Grade::G2: score += 1; break;
    case Grade::G3: score += 2; break;
  }
  return {score, group_for_score(score)};
}

inline constexpr RiskGroup kDefaultThreshold = RiskGroup::score_5_9;

/// Recurrence iff the risk group is at or above `threshold`.
inline Outcome predict(const Result& r, RiskGroup threshold = kDefaultThreshold) {
  return outcome_from_bool(static_cast<int>(r.risk_group) >= static_cast<int>(threshold));
}

inline RiskGroup risk_group_from_string(std::string_view s) {
  if (s == "0") return RiskGroup::score_0;
  if (s == "1-4") return RiskGroup::score_1_4;
  if (s == "5-9") return RiskGroup::score_5_9;
  if (s == "10-17") return RiskGroup::score_10_17;
  throw InvalidArgument("unknown EORTC risk group '" + std::string(s) + "' (expected 0, 1-4, 5-9 or 10-17)");
}

/// Where each factor lives in a data CSV. Tumour count is a number mapped
/// to single / 2-7 / >=8; size is in cm (>= 3 is large); prior recurrence
/// is one of primary, <=1/yr, >1/yr; T category Ta/T1; CIS 0/1; grade
/// G1/G2/G3.
struct ColumnMap {
  std::string count = "TumourNumber";
  std::string size = "TumourSize";
  std::string prior = "PriorRecurrence";
  std::string t_category = "TCategory";
  std::string cis = "CIS";
  std::string grade = "Grade";

  static ColumnMap from_json(const nlohmann::json& j) {
    ColumnMap m;
    m.count = j.value("count", m.count);
    m.size = j.value("size", m.size);
    m.prior = j.value("prior", m.prior);
    m.t_category = j.value("t_category", m.t_category);
    m.cis = j.value("cis", m.cis);
    m.grade = j.value("grade", m.grade);
    return m;
  }
};

inline Factors parse_factors(const CsvTable& table, std::size_t row, const ColumnMap& map) {
  auto cell = [&](const std::string& col) -> const std::string& {
    auto c = table.column(col);
    if (!c) throw EncodingError("EORTC column '" + col + "' not found in data");
    return table.rows.at(row)[*c];
  };
  Factors f;
  try {
    const double count = parse_real(cell(map.count));
    if (count < 1) throw EncodingError("tumour count must be >= 1");
    f.count = count < 2 ? TumourCount::single : count < 8 ? TumourCount::two_to_seven : TumourCount::eight_or_more;
    f.size = parse_real(cell(map.size)) >= 3.0 ? TumourSize::at_least_3cm : TumourSize::under_3cm;
    const auto& prior = cell(map.prior);
    if (prior == "primary") f.prior = PriorRecurrence::primary;
    else if (prior == "<=1/yr") f.prior = PriorRecurrence::at_most_one_per_year;
    else if (prior == ">1/yr") f.prior = PriorRecurrence::more_than_one_per_year;
    else throw EncodingError("unknown prior recurrence '" + prior + "'");
    const auto& t = cell(map.t_category);
    if (t == "Ta") f.t_category = TCategory::Ta;
    else if (t == "T1") f.t_category = TCategory::T1;
    else throw EncodingError("unknown T category '" + t + "'");
    f.cis = parse_truth(cell(map.cis));
    const auto& g = cell(map.grade);
    if (g == "G1") f.grade = Grade::G1;
    else if (g == "G2") f.grade = Grade::G2;
    else if (g == "G3") f.grade = Grade::G3;
    else throw EncodingError("unknown grade '" + g + "'");
  } catch (const EncodingError& e) {
    throw EncodingError("record " + std::to_string(row) + ": " + e.what());
  }
  return f;
}

}  // namespace tmrisk::eortc
