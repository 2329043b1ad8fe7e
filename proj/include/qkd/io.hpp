#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "qkd/bitstring.hpp"

namespace qkd::io {

/// 9 significant digits, '.' decimal separator, independent of locale.
std::string format_number(double x);

/// `key = value` per line; `#` starts a comment. Throws ConfigError on a
/// line without '=' or a duplicated key.
std::map<std::string, std::string> parse_key_value(std::istream& is);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

/// 8-byte big-endian bit count followed by the bits packed MSB-first.
void write_packed_key(std::ostream& os, const BitString& key);
BitString read_packed_key(std::istream& is);
void write_packed_key_file(const std::string& path, const BitString& key);
BitString read_packed_key_file(const std::string& path);

}  // namespace qkd::io
