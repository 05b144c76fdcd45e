#pragma once

#include <array>

#include "rsor/bytes.hpp"

namespace rsor {

/// LIONESS wide-block cipher over an arbitrary block length >= 2 bytes.
/// Four unbalanced Feistel rounds: stream, hash, stream, hash.
class Lioness {
 public:
  explicit Lioness(ByteView key);

  Bytes encrypt(ByteView block) const;
  Bytes decrypt(ByteView block) const;

 private:
  using Subkey = std::array<std::uint8_t, 32>;

  void stream_round(std::span<std::uint8_t> left, std::span<std::uint8_t> right, const Subkey& k) const;
  void hash_round(std::span<std::uint8_t> left, std::span<std::uint8_t> right, const Subkey& k) const;

  std::array<Subkey, 4> k_{};
};

/// Whole-payload PRP; block.size() must equal block_len.
Bytes prp_enc(ByteView key, ByteView block, std::size_t block_len);
Bytes prp_dec(ByteView key, ByteView block, std::size_t block_len);

}  // namespace rsor
