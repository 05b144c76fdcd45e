#include "rsor/prp.hpp"

#include <sodium.h>

#include <algorithm>

#include "rsor/oracles.hpp"
#include "sodium_init.hpp"

namespace rsor {

namespace {

constexpr std::size_t kMaxLeft = 32;

std::size_t left_width(std::size_t block) { return std::min(kMaxLeft, block / 2); }

}  // namespace

Lioness::Lioness(ByteView key) {
  detail::ensure_sodium();
  for (std::uint8_t i = 0; i < 4; ++i) {
    std::uint8_t tag = static_cast<std::uint8_t>(0x10 + i);
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, k_[i].size());
    crypto_generichash_update(&st, &tag, 1);
    crypto_generichash_update(&st, key.data(), key.size());
    crypto_generichash_final(&st, k_[i].data(), k_[i].size());
  }
}

void Lioness::stream_round(std::span<std::uint8_t> left, std::span<std::uint8_t> right,
                           const Subkey& k) const {
  std::uint8_t rk[32];
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, sizeof rk);
  crypto_generichash_update(&st, k.data(), k.size());
  crypto_generichash_update(&st, left.data(), left.size());
  crypto_generichash_final(&st, rk, sizeof rk);
  Bytes ks = keystream(ByteView(rk, sizeof rk), right.size());
  xor_into(right, ks);
}

void Lioness::hash_round(std::span<std::uint8_t> left, std::span<std::uint8_t> right,
                         const Subkey& k) const {
  std::uint8_t h[crypto_generichash_BYTES_MAX];
  const std::size_t out = std::max<std::size_t>(left.size(), crypto_generichash_BYTES_MIN);
  crypto_generichash(h, out, right.data(), right.size(), k.data(), k.size());
  xor_into(left, ByteView(h, left.size()));
}

Bytes Lioness::encrypt(ByteView block) const {
  if (block.size() < 2) throw ArgumentError("block too short");
  Bytes b(block.begin(), block.end());
  std::span<std::uint8_t> all(b);
  auto l = all.first(left_width(b.size()));
  auto r = all.subspan(l.size());
  stream_round(l, r, k_[0]);
  hash_round(l, r, k_[1]);
  stream_round(l, r, k_[2]);
  hash_round(l, r, k_[3]);
  return b;
}

Bytes Lioness::decrypt(ByteView block) const {
  if (block.size() < 2) throw ArgumentError("block too short");
  Bytes b(block.begin(), block.end());
  std::span<std::uint8_t> all(b);
  auto l = all.first(left_width(b.size()));
  auto r = all.subspan(l.size());
  hash_round(l, r, k_[3]);
  stream_round(l, r, k_[2]);
  hash_round(l, r, k_[1]);
  stream_round(l, r, k_[0]);
  return b;
}

Bytes prp_enc(ByteView key, ByteView block, std::size_t block_len) {
  if (block.size() != block_len) throw ArgumentError("prp block length mismatch");
  return Lioness(key).encrypt(block);
}

Bytes prp_dec(ByteView key, ByteView block, std::size_t block_len) {
  if (block.size() != block_len) throw ArgumentError("prp block length mismatch");
  return Lioness(key).decrypt(block);
}

}  // namespace rsor
