#include "rsor/group.hpp"

#include <sodium.h>

#include <algorithm>

#include "sodium_init.hpp"

namespace rsor {

GroupElement Group::decode(ByteView enc) const {
  if (!is_valid(enc)) throw DecodeError("invalid group element encoding");
  return GroupElement{Bytes(enc.begin(), enc.end())};
}

Scalar Group::from_u64(std::uint64_t v) const {
  std::array<std::uint8_t, 64> wide{};
  for (int i = 0; i < 8; ++i) wide[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return reduce_wide(ByteView(wide.data(), wide.size()));
}

bool Group::is_zero(const Scalar& s) const {
  return std::all_of(s.bytes.begin(), s.bytes.end(), [](std::uint8_t b) { return b == 0; });
}

Scalar Group::random_scalar(Rng& rng) const {
  for (;;) {
    std::array<std::uint8_t, 64> wide{};
    rng.fill(wide);
    Scalar s = reduce_wide(ByteView(wide.data(), wide.size()));
    if (!is_zero(s)) return s;
  }
}

namespace {

class Ristretto final : public Group {
 public:
  Ristretto() {
    detail::ensure_sodium();
    params_.id = "ristretto255";
    params_.order_hex = "1000000000000000000000000000000014def9dea2f79cd65812631a5cf5d3ed";
    params_.element_len = crypto_core_ristretto255_BYTES;
    Bytes g(crypto_core_ristretto255_BYTES);
    std::array<std::uint8_t, 32> one{};
    one[0] = 1;
    crypto_scalarmult_ristretto255_base(g.data(), one.data());
    params_.generator = GroupElement{std::move(g)};
  }

  const GroupParams& params() const override { return params_; }

  bool is_valid(ByteView enc) const override {
    if (enc.size() != crypto_core_ristretto255_BYTES) return false;
    if (is_all_zero(enc)) return false;
    return crypto_core_ristretto255_is_valid_point(enc.data()) == 1;
  }

  GroupElement exp(const GroupElement& base, const Scalar& e) const override {
    if (!is_valid(base.view())) throw DecodeError("invalid group element encoding");
    if (is_zero(e)) throw ArgumentError("zero exponent");
    Bytes out(crypto_core_ristretto255_BYTES);
    if (crypto_scalarmult_ristretto255(out.data(), e.bytes.data(), base.enc.data()) != 0) {
      throw DecodeError("exponentiation produced the identity");
    }
    return GroupElement{std::move(out)};
  }

  Scalar mul(const Scalar& a, const Scalar& b) const override {
    Scalar r;
    crypto_core_ristretto255_scalar_mul(r.bytes.data(), a.bytes.data(), b.bytes.data());
    return r;
  }

  Scalar invert(const Scalar& a) const override {
    Scalar r;
    if (crypto_core_ristretto255_scalar_invert(r.bytes.data(), a.bytes.data()) != 0) {
      throw ArgumentError("zero has no inverse");
    }
    return r;
  }

  Scalar reduce_wide(ByteView wide) const override {
    if (wide.size() != crypto_core_ristretto255_NONREDUCEDSCALARBYTES) {
      throw ArgumentError("reduce_wide expects 64 bytes");
    }
    Scalar r;
    crypto_core_ristretto255_scalar_reduce(r.bytes.data(), wide.data());
    return r;
  }

  bool is_canonical(const Scalar& s) const override {
    std::array<std::uint8_t, 64> wide{};
    std::copy(s.bytes.begin(), s.bytes.end(), wide.begin());
    return reduce_wide(ByteView(wide.data(), wide.size())) == s;
  }

 private:
  GroupParams params_;
};

class Toy final : public Group {
 public:
  static constexpr unsigned kP = 11;
  static constexpr unsigned kQ = 5;

  Toy() {
    params_.id = "toy11";
    params_.order_hex = "05";
    params_.element_len = 1;
    params_.generator = GroupElement{Bytes{3}};
  }

  const GroupParams& params() const override { return params_; }

  bool is_valid(ByteView enc) const override {
    if (enc.size() != 1) return false;
    unsigned v = enc[0];
    return v == 3 || v == 9 || v == 5 || v == 4;
  }

  GroupElement exp(const GroupElement& base, const Scalar& e) const override {
    if (!is_valid(base.view())) throw DecodeError("invalid group element encoding");
    unsigned k = value(e);
    if (k == 0) throw ArgumentError("zero exponent");
    unsigned acc = 1;
    for (unsigned i = 0; i < k; ++i) acc = (acc * base.enc[0]) % kP;
    return GroupElement{Bytes{static_cast<std::uint8_t>(acc)}};
  }

  Scalar mul(const Scalar& a, const Scalar& b) const override {
    return make((value(a) * value(b)) % kQ);
  }

  Scalar invert(const Scalar& a) const override {
    unsigned v = value(a);
    if (v == 0) throw ArgumentError("zero has no inverse");
    for (unsigned c = 1; c < kQ; ++c) {
      if ((v * c) % kQ == 1) return make(c);
    }
    throw ArgumentError("no inverse");
  }

  Scalar reduce_wide(ByteView wide) const override {
    if (wide.size() != 64) throw ArgumentError("reduce_wide expects 64 bytes");
    unsigned r = 0;
    for (std::size_t i = wide.size(); i-- > 0;) r = (r * 256 + wide[i]) % kQ;
    return make(r);
  }

  bool is_canonical(const Scalar& s) const override {
    return s.bytes[0] < kQ &&
           std::all_of(s.bytes.begin() + 1, s.bytes.end(), [](std::uint8_t b) { return b == 0; });
  }

 private:
  static unsigned value(const Scalar& s) {
    unsigned r = 0;
    for (std::size_t i = s.bytes.size(); i-- > 0;) r = (r * 256 + s.bytes[i]) % kQ;
    return r;
  }
  static Scalar make(unsigned v) {
    Scalar s;
    s.bytes[0] = static_cast<std::uint8_t>(v);
    return s;
  }

  GroupParams params_;
};

}  // namespace

GroupPtr ristretto255() {
  static const GroupPtr g = std::make_shared<Ristretto>();
  return g;
}

GroupPtr toy_group() {
  static const GroupPtr g = std::make_shared<Toy>();
  return g;
}

GroupPtr group_by_id(const std::string& id) {
  if (id == "ristretto255") return ristretto255();
  if (id == "toy11") return toy_group();
  throw ArgumentError("unknown group: " + id);
}

}  // namespace rsor
