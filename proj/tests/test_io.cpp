#include <doctest.h>

#include <clocale>
#include <sstream>

#include "qkd/errors.hpp"
#include "qkd/io.hpp"

using namespace qkd;

TEST_CASE("number formatting") {
  CHECK(io::format_number(0.0) == "0");
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333");
  CHECK(io::format_number(2.5e-7) == "2.5e-07");
  CHECK(io::format_number(123456789.4) == "123456789");
  CHECK(io::format_number(-1.5) == "-1.5");
}

TEST_CASE("key = value files") {
  std::istringstream in("# reference set\nmu = 0.02\n\n dark-prob=8e-7  # per gate\n");
  const auto kv = io::parse_key_value(in);
  CHECK(kv.size() == 2);
  CHECK(kv.at("mu") == "0.02");
  CHECK(kv.at("dark-prob") == "8e-7");

  std::istringstream no_eq("mu 0.02\n");
  CHECK_THROWS_AS(io::parse_key_value(no_eq), ConfigError);
  std::istringstream dup("mu = 1\nmu = 2\n");
  CHECK_THROWS_AS(io::parse_key_value(dup), ConfigError);
}

TEST_CASE("packed key format") {
  const BitString key = BitString::from_string("1011000011");
  std::stringstream ss;
  io::write_packed_key(ss, key);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 8 + 2);
  for (int i = 0; i < 7; ++i) CHECK(bytes[i] == 0);
  CHECK(bytes[7] == 10);
  CHECK(static_cast<unsigned char>(bytes[8]) == 0xb0);
  CHECK(static_cast<unsigned char>(bytes[9]) == 0xc0);

  Engine eng = make_engine(1);
  for (std::size_t n : {0U, 1U, 64U, 1001U}) {
    const BitString k = BitString::random(n, eng);
    std::stringstream s;
    io::write_packed_key(s, k);
    CHECK(io::read_packed_key(s) == k);
  }
  std::istringstream truncated(std::string("\0\0\0\0\0\0\0\x10\x01", 9));
  CHECK_THROWS_AS(io::read_packed_key(truncated), StructuralError);
}

TEST_CASE("bit string parity and distance") {
  Engine eng = make_engine(2);
  const BitString a = BitString::random(500, eng);
  for (std::size_t b = 0; b < 500; b += 37) {
    for (std::size_t e = b; e <= 500; e += 53) {
      bool p = false;
      for (std::size_t i = b; i < e; ++i) p ^= a.get(i);
      CHECK(a.parity(b, e) == p);
    }
  }
  BitString c = a;
  c.flip(3);
  c.flip(499);
  CHECK(a.hamming_distance(c) == 2);
  CHECK_THROWS_AS(a.hamming_distance(BitString(3)), StructuralError);
}
