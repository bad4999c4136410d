#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tmrisk/error.hpp"

namespace tmrisk {

/// Packed boolean input of a Tsetlin machine: B raw bits at [0, B) followed
/// by their B negations at [B, 2B). Bits are stored 64 per word so clause
/// evaluation reduces to word-wise mask tests.
class LiteralVector {
 public:
  LiteralVector() = default;

  /// Builds the full 2B literal vector from B raw bits.
  explicit LiteralVector(const std::vector<bool>& raw) : raw_bits_(raw.size()) {
    words_.assign(word_count(2 * raw_bits_), 0);
    for (std::size_t i = 0; i < raw_bits_; ++i) put(raw[i] ? i : raw_bits_ + i);
  }

  std::size_t raw_bits() const noexcept { return raw_bits_; }
  std::size_t size() const noexcept { return 2 * raw_bits_; }

  bool operator[](std::size_t literal) const noexcept {
    return (words_[literal >> 6] >> (literal & 63)) & 1U;
  }
  bool at(std::size_t literal) const {
    if (literal >= size()) throw StructuralError("literal index out of range");
    return (*this)[literal];
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// Raw bits only, in order.
  std::vector<bool> raw() const {
    std::vector<bool> out(raw_bits_);
    for (std::size_t i = 0; i < raw_bits_; ++i) out[i] = (*this)[i];
    return out;
  }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  friend bool operator==(const LiteralVector&, const LiteralVector&) = default;

  static constexpr std::size_t word_count(std::size_t bits) noexcept { return (bits + 63) / 64; }

 private:
  void put(std::size_t literal) noexcept { words_[literal >> 6] |= std::uint64_t{1} << (literal & 63); }

  std::size_t raw_bits_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class Outcome : std::uint8_t { no_recurrence = 0, recurrence = 1 };

constexpr int to_int(Outcome o) noexcept { return static_cast<int>(o); }
constexpr Outcome outcome_from_bool(bool positive) noexcept {
  return positive ? Outcome::recurrence : Outcome::no_recurrence;
}
constexpr Outcome flip(Outcome o) noexcept {
  return o == Outcome::recurrence ? Outcome::no_recurrence : Outcome::recurrence;
}

/// One binarized, labeled training row.
struct Sample {
  LiteralVector x;
  Outcome label = Outcome::no_recurrence;
};

}  // namespace tmrisk
