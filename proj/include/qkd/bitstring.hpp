#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qkd/rng.hpp"

namespace qkd {

/// Packed bit string. Bit i lives in word i / 64 at bit position i % 64;
/// bits past size() in the last word are always zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t nbits) : words_((nbits + 63) / 64, 0), size_(nbits) {}

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  void push_back(bool v);
  void reserve(std::size_t nbits) { words_.reserve((nbits + 63) / 64); }

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::size_t popcount() const noexcept;
  /// Parity of bits [begin, end).
  bool parity(std::size_t begin, std::size_t end) const noexcept;
  /// Number of positions where the two strings differ. Sizes must match.
  std::size_t hamming_distance(const BitString& other) const;

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }
  friend bool operator==(const BitString&, const BitString&) = default;

  /// Bytes with bit 0 in the most significant position of byte 0.
  std::vector<std::uint8_t> to_bytes_msb_first() const;
  static BitString from_bytes_msb_first(std::span<const std::uint8_t> bytes, std::size_t nbits);

  static BitString random(std::size_t nbits, Engine& eng);
  /// "0101..." for debugging and small tests.
  std::string to_string() const;
  static BitString from_string(const std::string& bits);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

}  // namespace qkd
