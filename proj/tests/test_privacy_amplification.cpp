#include <doctest.h>

#include "qkd/errors.hpp"
#include "qkd/privacy_amplification.hpp"
#include "qkd/rate_model.hpp"

using namespace qkd;

TEST_CASE("toeplitz hash edge cases") {
  Engine eng = make_engine(1);
  const BitString key = BitString::random(300, eng);
  CHECK(toeplitz_hash(key, 0, 5).empty());
  CHECK(toeplitz_hash(BitString(300), 100, 5).popcount() == 0);
  CHECK_THROWS_AS(toeplitz_hash(key, 301, 5), DomainError);
  CHECK(toeplitz_hash(key, 300, 5).size() == 300);
}

TEST_CASE("matrix entries follow the Toeplitz diagonal") {
  // Hashing unit vectors reads out the columns of T.
  const std::size_t n = 70;
  const std::size_t m = 20;
  const BitString diag = toeplitz_diagonal(n, m, 77);
  for (std::size_t j = 0; j < n; ++j) {
    BitString e(n);
    e.set(j, true);
    const BitString col = toeplitz_hash(e, m, 77);
    for (std::size_t i = 0; i < m; ++i) CHECK(col.get(i) == diag.get(i + n - 1 - j));
  }
}

TEST_CASE("word-level kernel equals the bit-level reference") {
  Engine eng = make_engine(2);
  for (std::size_t n : {1U, 63U, 64U, 65U, 200U, 1000U}) {
    for (std::size_t m : {std::size_t{1}, n / 3 + 1, n}) {
      const BitString key = BitString::random(n, eng);
      CHECK(toeplitz_hash(key, m, n * 31 + m) == toeplitz_hash_serial(key, m, n * 31 + m));
    }
  }
}

TEST_CASE("linearity over GF(2)") {
  Engine eng = make_engine(3);
  for (int t = 0; t < 200; ++t) {
    const BitString a = BitString::random(777, eng);
    const BitString b = BitString::random(777, eng);
    CHECK(toeplitz_hash(a ^ b, 128, 9) == (toeplitz_hash(a, 128, 9) ^ toeplitz_hash(b, 128, 9)));
  }
}

TEST_CASE("final key length") {
  const LinkBudget clean{1.0, 1e-3, 1e-3, 0.0, 0.0};
  CHECK(final_key_length(10'000, 0.0, 0, clean, {1, 0}) == 10'000);
  CHECK(final_key_length(10'000, 0.0, 100, clean, {1, 30}) == 9870);
  CHECK(final_key_length(10'000, 0.0, 20'000, clean, {1, 30}) == 0);

  LinkBudget pns = clean;
  pns.multiphoton_prob = 2e-3;
  CHECK(final_key_length(10'000, 0.01, 0, pns, {1, 0}) == 0);

  LinkBudget typical{1.0, 2e-4, 2e-4, 5e-5, 0.03};
  const double tau = pa_fraction(2e-4, 5e-5, 0.03);
  CHECK(final_key_length(10'000, 0.03, 2000, typical, {1, 30}) ==
        static_cast<std::uint64_t>(std::floor(10'000 * tau)) - 2030);
}
