#include "rsor/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "sodium_init.hpp"

namespace rsor {

namespace detail {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace detail

Rng::Rng(std::uint64_t seed) {
  detail::ensure_sodium();
  std::uint8_t in[8];
  for (int i = 0; i < 8; ++i) in[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  static constexpr char kLabel[] = "rsor/rng/u64";
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key_.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kLabel), sizeof kLabel - 1);
  crypto_generichash_update(&st, in, sizeof in);
  crypto_generichash_final(&st, key_.data(), key_.size());
}

Rng::Rng(const Seed& key) : key_(key) { detail::ensure_sodium(); }

Rng Rng::derive(ByteView material, std::string_view label) {
  detail::ensure_sodium();
  Seed key{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key.size());
  std::uint8_t len = static_cast<std::uint8_t>(label.size());
  crypto_generichash_update(&st, &len, 1);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  crypto_generichash_update(&st, material.data(), material.size());
  crypto_generichash_final(&st, key.data(), key.size());
  return Rng(key);
}

void Rng::refill() {
  std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES];
  for (std::size_t i = 0; i < sizeof nonce; ++i) {
    nonce[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
  }
  crypto_stream_chacha20(block_.data(), block_.size(), nonce, key_.data());
  ++counter_;
  pos_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == block_.size()) refill();
    std::size_t n = std::min(out.size() - done, block_.size() - pos_);
    std::memcpy(out.data() + done, block_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

Rng::Seed Rng::seed32() {
  Seed s{};
  fill(s);
  return s;
}

Rng::result_type Rng::operator()() {
  std::uint8_t buf[8];
  fill(buf);
  result_type v = 0;
  for (int i = 0; i < 8; ++i) v |= result_type{buf[i]} << (8 * i);
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("uniform bound must be nonzero");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = max() - (max() % bound);
  for (;;) {
    std::uint64_t v = operator()();
    if (v < limit) return v % bound;
  }
}

Rng Rng::fork(std::string_view label) const {
  return derive(ByteView(key_.data(), key_.size()), label);
}

}  // namespace rsor
