#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tmrisk/error.hpp"
#include "tmrisk/literals.hpp"
#include "tmrisk/random.hpp"

namespace tmrisk {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

namespace detail {

inline std::array<std::vector<std::size_t>, 2> indices_by_class(std::span<const Outcome> labels) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(to_int(labels[i]))].push_back(i);
  return by_class;
}

}  // namespace detail

/// Per class, round(count * test_fraction) members go to the test side,
/// chosen by a seeded shuffle within the class.
inline SplitIndices stratified_split(std::span<const Outcome> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test fraction must lie in (0, 1)");
  auto by_class = detail::indices_by_class(labels);
  for (std::size_t c = 0; c < 2; ++c)
    if (by_class[c].size() < 2)
      throw InvalidArgument("stratified split needs at least 2 members of each class; class " + std::to_string(c) +
                            " has " + std::to_string(by_class[c].size()));
  Rng rng(seed);
  SplitIndices out;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
    out.test.insert(out.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Stratified k-fold: fold f's test side holds the class members at
/// shuffled positions p with p % k == f.
inline std::vector<SplitIndices> stratified_kfold(std::span<const Outcome> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  auto by_class = detail::indices_by_class(labels);
  for (std::size_t c = 0; c < 2; ++c)
    if (by_class[c].size() < k)
      throw InvalidArgument("class " + std::to_string(c) + " has fewer members than folds");
  Rng rng(seed);
  std::vector<SplitIndices> folds(k);
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t p = 0; p < members.size(); ++p)
      for (std::size_t f = 0; f < k; ++f) (p % k == f ? folds[f].test : folds[f].train).push_back(members[p]);
  }
  for (auto& f : folds) {
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.test.begin(), f.test.end());
  }
  return folds;
}

template <class T>
std::vector<T> gather(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace tmrisk
