#include "qkd/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "qkd/errors.hpp"

namespace qkd::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 9);
  return {buf.data(), res.ptr};
}

std::map<std::string, std::string> parse_key_value(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("params line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("params line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("params line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params file '" + path + "'");
  return parse_key_value(in);
}

void write_packed_key(std::ostream& os, const BitString& key) {
  std::array<char, 8> header{};
  const std::uint64_t n = key.size();
  for (int i = 0; i < 8; ++i) header[i] = static_cast<char>((n >> (56 - 8 * i)) & 0xff);
  os.write(header.data(), header.size());
  const auto bytes = key.to_bytes_msb_first();
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

BitString read_packed_key(std::istream& is) {
  std::array<unsigned char, 8> header{};
  if (!is.read(reinterpret_cast<char*>(header.data()), header.size())) {
    throw StructuralError("packed key: truncated header");
  }
  std::uint64_t n = 0;
  for (unsigned char c : header) n = (n << 8) | c;
  std::vector<std::uint8_t> bytes((n + 7) / 8);
  if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw StructuralError("packed key: truncated body");
  }
  return BitString::from_bytes_msb_first(bytes, n);
}

void write_packed_key_file(const std::string& path, const BitString& key) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_packed_key(out, key);
}

BitString read_packed_key_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_packed_key(in);
}

}  // namespace qkd::io
