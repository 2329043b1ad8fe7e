#pragma once

#include <cstdint>

#include "qkd/bitstring.hpp"
#include "qkd/link_model.hpp"

namespace qkd {

struct PaParams {
  std::uint64_t hash_seed = 0x5eed;
  std::uint64_t security_margin_bits = 30;
};

/// The n + m - 1 seeded bits that define the m x n Toeplitz matrix
/// T[i][j] = diagonal[i - j + n - 1].
BitString toeplitz_diagonal(std::size_t n, std::size_t m, std::uint64_t seed);

/// T * key over GF(2). Throws DomainError when m > key.size().
/// Rows are computed in parallel with word-level parity.
BitString toeplitz_hash(const BitString& key, std::size_t m, std::uint64_t seed);
/// Bit-by-bit reference of the matrix-vector product.
BitString toeplitz_hash_serial(const BitString& key, std::size_t m, std::uint64_t seed);

/// floor(n * pa_fraction(P, S, e)) - leakage - margin, floored at 0. Any
/// insecure (P, S, e) gives 0.
std::uint64_t final_key_length(std::uint64_t n_sifted, double qber, std::uint64_t leakage_bits,
                               const LinkBudget& link, const PaParams& pa);

}  // namespace qkd
