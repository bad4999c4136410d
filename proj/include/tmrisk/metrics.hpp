#pragma once

// Binary classification metrics with macro averaging over the two
// outcome classes. Zero denominators yield 0 rather than NaN.

#include <array>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "tmrisk/error.hpp"
#include "tmrisk/literals.hpp"

namespace tmrisk {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;  // recurrence is the positive class
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class{};  // indexed by to_int(Outcome)
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;

  nlohmann::json to_json() const {
    auto cls = [](const ClassMetrics& m) {
      return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    return {{"accuracy", accuracy},
            {"macro_precision", macro_precision},
            {"macro_recall", macro_recall},
            {"macro_f1", macro_f1},
            {"no_recurrence", cls(per_class[0])},
            {"recurrence", cls(per_class[1])},
            {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}}}};
  }
};

inline double safe_ratio(double num, double den) noexcept { return den > 0.0 ? num / den : 0.0; }

inline ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
  ClassMetrics m;
  m.precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  m.recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

inline MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  r.accuracy = safe_ratio(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
  r.per_class[1] = class_metrics(cm.tp, cm.fp, cm.fn);
  r.per_class[0] = class_metrics(cm.tn, cm.fn, cm.fp);
  r.macro_precision = (r.per_class[0].precision + r.per_class[1].precision) / 2.0;
  r.macro_recall = (r.per_class[0].recall + r.per_class[1].recall) / 2.0;
  r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  return r;
}

inline MetricsReport compute_metrics(std::span<const Outcome> preds, std::span<const Outcome> labels) {
  if (preds.size() != labels.size())
    throw InvalidArgument("predictions (" + std::to_string(preds.size()) + ") and labels (" +
                          std::to_string(labels.size()) + ") differ in length");
  if (preds.empty()) throw InvalidArgument("cannot compute metrics on zero predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == Outcome::recurrence;
    const bool y = labels[i] == Outcome::recurrence;
    if (p && y) ++cm.tp;
    else if (p) ++cm.fp;
    else if (y) ++cm.fn;
    else ++cm.tn;
  }
  return metrics_from_confusion(cm);
}

/// Element-wise mean of several reports (fold averaging). The confusion
/// matrix is summed.
inline MetricsReport average_reports(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InvalidArgument("no reports to average");
  MetricsReport out;
  const double k = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    out.accuracy += r.accuracy / k;
    out.macro_precision += r.macro_precision / k;
    out.macro_recall += r.macro_recall / k;
    out.macro_f1 += r.macro_f1 / k;
    for (std::size_t c = 0; c < 2; ++c) {
      out.per_class[c].precision += r.per_class[c].precision / k;
      out.per_class[c].recall += r.per_class[c].recall / k;
      out.per_class[c].f1 += r.per_class[c].f1 / k;
    }
    out.confusion.tp += r.confusion.tp;
    out.confusion.fp += r.confusion.fp;
    out.confusion.tn += r.confusion.tn;
    out.confusion.fn += r.confusion.fn;
  }
  return out;
}

}  // namespace tmrisk
