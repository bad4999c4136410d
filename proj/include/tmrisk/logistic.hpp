#pragma once

// L2-regularised, class-weighted logistic regression on raw bits (the
// negation half of a literal vector is ignored: it is a linear complement).
// Full-batch gradient descent from zero, halving the step whenever it
// would increase the loss.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmrisk/error.hpp"
#include "tmrisk/literals.hpp"
#include "tmrisk/tsetlin.hpp"

namespace tmrisk {

struct LRHyperparams {
  double l2 = 0.01;  // lambda in lambda * ||w||^2; the bias is not penalised
  double learning_rate = 0.1;
  int iterations = 2000;
  std::optional<std::array<double, 2>> class_weights;  // unset: balanced
};

struct LRModel {
  std::vector<double> weights;  // one per raw bit
  double bias = 0.0;
  LRHyperparams hyper;
  std::array<double, 2> class_weights{1.0, 1.0};

  nlohmann::json to_json() const {
    return {{"weights", weights}, {"bias", bias}, {"l2", hyper.l2}, {"learning_rate", hyper.learning_rate},
            {"iterations", hyper.iterations}, {"class_weights", class_weights}};
  }
};

struct LRGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

struct LRPrediction {
  Outcome label = Outcome::no_recurrence;
  double probability = 0.5;
};

namespace detail {

inline double dot_raw(std::span<const double> w, const LiteralVector& x) {
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (x[i]) z += w[i];
  return z;
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void check_width(const LRModel& m, std::span<const Sample> data) {
  for (const auto& s : data)
    if (s.x.raw_bits() != m.weights.size()) throw StructuralError("sample width does not match LR weights");
}

}  // namespace detail

/// Mean class-weighted log loss plus l2 * ||w||^2.
inline double lr_loss(const LRModel& m, std::span<const Sample> data) {
  detail::check_width(m, data);
  double loss = 0.0;
  for (const auto& s : data) {
    const double z = detail::dot_raw(m.weights, s.x) + m.bias;
    const bool y = s.label == Outcome::recurrence;
    loss += m.class_weights[static_cast<std::size_t>(to_int(s.label))] * detail::softplus(y ? -z : z);
  }
  loss /= static_cast<double>(data.size());
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  return loss + m.hyper.l2 * reg;
}

inline LRGradient lr_gradient(const LRModel& m, std::span<const Sample> data) {
  detail::check_width(m, data);
  LRGradient g{std::vector<double>(m.weights.size(), 0.0), 0.0};
  for (const auto& s : data) {
    const double p = detail::sigmoid(detail::dot_raw(m.weights, s.x) + m.bias);
    const double y = s.label == Outcome::recurrence ? 1.0 : 0.0;
    const double r = m.class_weights[static_cast<std::size_t>(to_int(s.label))] * (p - y);
    for (std::size_t i = 0; i < g.weights.size(); ++i)
      if (s.x[i]) g.weights[i] += r;
    g.bias += r;
  }
  const double n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] = g.weights[i] / n + 2.0 * m.hyper.l2 * m.weights[i];
  g.bias /= n;
  return g;
}

inline LRModel lr_fit(std::span<const Sample> data, const LRHyperparams& hyper) {
  if (data.empty()) throw InvalidArgument("logistic regression needs training data");
  if (!(hyper.l2 >= 0.0) || !(hyper.learning_rate > 0.0) || hyper.iterations < 0)
    throw InvalidArgument("invalid logistic regression hyperparameters");
  bool pos = false, neg = false;
  for (const auto& s : data) (s.label == Outcome::recurrence ? pos : neg) = true;
  if (!pos || !neg) throw InvalidArgument("logistic regression needs both classes in the training data");

  LRModel m;
  m.hyper = hyper;
  m.class_weights = hyper.class_weights ? *hyper.class_weights : balanced_class_weights(data);
  m.weights.assign(data.front().x.raw_bits(), 0.0);
  double loss = lr_loss(m, data);
  for (int it = 0; it < hyper.iterations; ++it) {
    const auto g = lr_gradient(m, data);
    double step = hyper.learning_rate;
    for (int halvings = 0; halvings < 60; ++halvings, step /= 2.0) {
      LRModel next = m;
      for (std::size_t i = 0; i < next.weights.size(); ++i) next.weights[i] -= step * g.weights[i];
      next.bias -= step * g.bias;
      const double next_loss = lr_loss(next, data);
      if (next_loss <= loss) {
        m = std::move(next);
        loss = next_loss;
        break;
      }
    }
  }
  return m;
}

inline LRPrediction lr_predict(const LRModel& m, const LiteralVector& x) {
  if (x.raw_bits() != m.weights.size()) throw StructuralError("input width does not match LR weights");
  const double p = detail::sigmoid(detail::dot_raw(m.weights, x) + m.bias);
  return {outcome_from_bool(p >= 0.5), p};
}

}  // namespace tmrisk
