#include "rsor/oracles.hpp"

#include <sodium.h>

#include "sodium_init.hpp"

namespace rsor {

namespace {

void check_kappa(std::size_t kappa) {
  if (kappa < crypto_generichash_BYTES_MIN || kappa > crypto_generichash_BYTES_MAX) {
    throw ArgumentError("kappa out of range");
  }
}

}  // namespace

Scalar ro_hb(const Group& group, const GroupElement& alpha, const GroupElement& s) {
  detail::ensure_sodium();
  const std::uint8_t tag = static_cast<std::uint8_t>(OracleTag::blind);
  for (std::uint8_t counter = 0;; ++counter) {
    std::uint8_t wide[64];
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, sizeof wide);
    crypto_generichash_update(&st, &tag, 1);
    crypto_generichash_update(&st, &counter, 1);
    crypto_generichash_update(&st, alpha.enc.data(), alpha.enc.size());
    crypto_generichash_update(&st, s.enc.data(), s.enc.size());
    crypto_generichash_final(&st, wide, sizeof wide);
    Scalar b = group.reduce_wide(ByteView(wide, sizeof wide));
    if (!group.is_zero(b)) return b;
  }
}

Bytes ro_hsym(OracleTag tag, const GroupElement& s, std::size_t kappa) {
  detail::ensure_sodium();
  check_kappa(kappa);
  const std::uint8_t t = static_cast<std::uint8_t>(tag);
  Bytes out(kappa);
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, kappa);
  crypto_generichash_update(&st, &t, 1);
  crypto_generichash_update(&st, s.enc.data(), s.enc.size());
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

Bytes ro_hstar(const GroupElement& s, std::size_t kappa) {
  return concat({ro_hsym(OracleTag::rho, s, kappa), ro_hsym(OracleTag::mu, s, kappa),
                 ro_hsym(OracleTag::pi, s, kappa)});
}

Bytes keystream(ByteView key, std::size_t out_len) {
  detail::ensure_sodium();
  std::uint8_t k[crypto_stream_chacha20_KEYBYTES];
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, sizeof k);
  crypto_generichash_update(&st, &kPrgTag, 1);
  crypto_generichash_update(&st, key.data(), key.size());
  crypto_generichash_final(&st, k, sizeof k);
  std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
  Bytes out(out_len);
  if (out_len > 0) crypto_stream_chacha20(out.data(), out.size(), nonce, k);
  sodium_memzero(k, sizeof k);
  return out;
}

Bytes prg(ByteView key, std::size_t out_len, std::size_t cap) {
  if (out_len > cap) throw ArgumentError("prg output length exceeds cap");
  return keystream(key, out_len);
}

Bytes mac(ByteView key, ByteView data) {
  detail::ensure_sodium();
  check_kappa(key.size());
  if (key.size() > crypto_generichash_KEYBYTES_MAX) throw ArgumentError("mac key too long");
  Bytes out(key.size());
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), key.data(), key.size());
  return out;
}

bool mac_verify(ByteView key, ByteView data, ByteView tag) {
  Bytes expect = mac(key, data);
  if (tag.size() != expect.size()) return false;
  return sodium_memcmp(expect.data(), tag.data(), expect.size()) == 0;
}

}  // namespace rsor
