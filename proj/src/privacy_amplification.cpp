#include "qkd/privacy_amplification.hpp"

#include <bit>
#include <cmath>

#include "qkd/errors.hpp"
#include "qkd/rate_model.hpp"
#include "qkd/rng.hpp"

namespace qkd {

namespace {

void check_lengths(const BitString& key, std::size_t m) {
  if (m > key.size()) {
    throw DomainError("toeplitz_hash: output length " + std::to_string(m) +
                      " exceeds input length " + std::to_string(key.size()));
  }
}

BitString reversed(const BitString& key) {
  const std::size_t n = key.size();
  BitString r(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (key.get(j)) r.set(n - 1 - j, true);
  }
  return r;
}

}  // namespace

BitString toeplitz_diagonal(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0 || m == 0) return {};
  Engine eng = make_engine(seed);
  return BitString::random(n + m - 1, eng);
}

BitString toeplitz_hash(const BitString& key, std::size_t m, std::uint64_t seed) {
  check_lengths(key, m);
  if (m == 0) return {};
  const std::size_t n = key.size();
  const BitString diag = toeplitz_diagonal(n, m, seed);

  // out_i = parity(diag[i .. i + n) & reversed key)
  const BitString rk = reversed(key);
  const auto kw = rk.words();
  std::vector<std::uint64_t> dw(diag.words().begin(), diag.words().end());
  dw.push_back(0);
  dw.push_back(0);

  const std::size_t out_words = (m + 63) / 64;
  std::vector<std::uint64_t> out(out_words, 0);
  const auto nw = static_cast<std::ptrdiff_t>(out_words);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ow = 0; ow < nw; ++ow) {
    std::uint64_t bits = 0;
    const std::size_t row_end = std::min<std::size_t>(m, static_cast<std::size_t>(ow + 1) * 64);
    for (std::size_t i = static_cast<std::size_t>(ow) * 64; i < row_end; ++i) {
      const std::size_t base = i >> 6;
      const unsigned s = i & 63;
      std::uint64_t acc = 0;
      if (s == 0) {
        for (std::size_t w = 0; w < kw.size(); ++w) acc ^= dw[base + w] & kw[w];
      } else {
        for (std::size_t w = 0; w < kw.size(); ++w) {
          const std::uint64_t window = (dw[base + w] >> s) | (dw[base + w + 1] << (64 - s));
          acc ^= window & kw[w];
        }
      }
      bits |= static_cast<std::uint64_t>(std::popcount(acc) & 1) << (i & 63);
    }
    out[static_cast<std::size_t>(ow)] = bits;
  }

  BitString result(m);
  for (std::size_t i = 0; i < m; ++i) {
    if ((out[i >> 6] >> (i & 63)) & 1U) result.set(i, true);
  }
  return result;
}

BitString toeplitz_hash_serial(const BitString& key, std::size_t m, std::uint64_t seed) {
  check_lengths(key, m);
  if (m == 0) return {};
  const std::size_t n = key.size();
  const BitString diag = toeplitz_diagonal(n, m, seed);
  BitString out(m);
  for (std::size_t i = 0; i < m; ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < n; ++j) {
      acc ^= key.get(j) && diag.get(i + n - 1 - j);
    }
    out.set(i, acc);
  }
  return out;
}

std::uint64_t final_key_length(std::uint64_t n_sifted, double qber, std::uint64_t leakage_bits,
                               const LinkBudget& link, const PaParams& pa) {
  double tau = 0.0;
  try {
    tau = pa_fraction(link.detect_prob, link.multiphoton_prob, qber);
  } catch (const SecurityViolation&) {
    return 0;
  } catch (const DomainError&) {
    return 0;
  }
  const double kept = std::floor(static_cast<double>(n_sifted) * tau);
  const double m = kept - static_cast<double>(leakage_bits) -
                   static_cast<double>(pa.security_margin_bits);
  return m > 0.0 ? static_cast<std::uint64_t>(m) : 0;
}

}  // namespace qkd
