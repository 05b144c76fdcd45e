#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsor {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Raised when an encoded group element, onion, or record does not parse.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on caller contract violations (bad lengths, empty paths, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline ByteView view(const Bytes& b) { return ByteView(b.data(), b.size()); }
inline ByteView view(std::string_view s) {
  return ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}
inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline Bytes to_bytes(ByteView b) { return Bytes(b.begin(), b.end()); }
inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

Bytes concat(std::initializer_list<ByteView> parts);
Bytes slice(ByteView data, std::size_t offset, std::size_t len);

/// dst ^= src over min(|dst|, |src|) bytes.
void xor_into(std::span<std::uint8_t> dst, ByteView src);

bool is_all_zero(ByteView data);

void put_u32_be(std::span<std::uint8_t> out, std::uint32_t v);
std::uint32_t get_u32_be(ByteView in);

}  // namespace rsor
