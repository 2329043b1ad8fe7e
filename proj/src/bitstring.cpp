#include "qkd/bitstring.hpp"

#include <bit>

#include "qkd/errors.hpp"

namespace qkd {

void BitString::push_back(bool v) {
  if ((size_ & 63) == 0) words_.push_back(0);
  ++size_;
  set(size_ - 1, v);
}

std::size_t BitString::popcount() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool BitString::parity(std::size_t begin, std::size_t end) const noexcept {
  if (begin >= end) return false;
  std::uint64_t acc = 0;
  std::size_t wb = begin >> 6;
  const std::size_t we = (end - 1) >> 6;
  const std::uint64_t head = ~std::uint64_t{0} << (begin & 63);
  const std::uint64_t tail = ~std::uint64_t{0} >> (63 - ((end - 1) & 63));
  if (wb == we) return std::popcount(words_[wb] & head & tail) & 1;
  acc ^= words_[wb] & head;
  for (++wb; wb < we; ++wb) acc ^= words_[wb];
  acc ^= words_[we] & tail;
  return std::popcount(acc) & 1;
}

std::size_t BitString::hamming_distance(const BitString& other) const {
  if (other.size_ != size_) throw StructuralError("hamming_distance: length mismatch");
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    c += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  }
  return c;
}

BitString& BitString::operator^=(const BitString& other) {
  if (other.size_ != size_) throw StructuralError("xor: length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

std::vector<std::uint8_t> BitString::to_bytes_msb_first() const {
  std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) out[i >> 3] |= static_cast<std::uint8_t>(0x80U >> (i & 7));
  }
  return out;
}

BitString BitString::from_bytes_msb_first(std::span<const std::uint8_t> bytes,
                                          std::size_t nbits) {
  if (bytes.size() * 8 < nbits) throw StructuralError("packed key shorter than its bit length");
  BitString out(nbits);
  for (std::size_t i = 0; i < nbits; ++i) {
    if (bytes[i >> 3] & (0x80U >> (i & 7))) out.set(i, true);
  }
  return out;
}

BitString BitString::random(std::size_t nbits, Engine& eng) {
  BitString out(nbits);
  for (auto& w : out.words_) w = eng();
  if (nbits & 63) out.words_.back() &= ~std::uint64_t{0} >> (64 - (nbits & 63));
  return out;
}

std::string BitString::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

BitString BitString::from_string(const std::string& bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      out.set(i, true);
    } else if (bits[i] != '0') {
      throw StructuralError("bit string may only contain '0' and '1'");
    }
  }
  return out;
}

}  // namespace qkd
