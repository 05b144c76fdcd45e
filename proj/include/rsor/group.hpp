#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "rsor/bytes.hpp"
#include "rsor/rng.hpp"

namespace rsor {

/// Exponent in Z_q, little-endian.
struct Scalar {
  std::array<std::uint8_t, 32> bytes{};

  friend bool operator==(const Scalar&, const Scalar&) = default;
  ByteView view() const { return ByteView(bytes.data(), bytes.size()); }
};

struct GroupElement {
  Bytes enc;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
  ByteView view() const { return ByteView(enc); }
};

struct GroupParams {
  std::string id;
  GroupElement generator;
  std::string order_hex;  // big-endian
  std::size_t element_len = 0;
};

/// Prime-order group. Implementations are immutable and thread-safe.
class Group {
 public:
  virtual ~Group() = default;

  virtual const GroupParams& params() const = 0;
  std::size_t element_len() const { return params().element_len; }
  const GroupElement& generator() const { return params().generator; }

  /// True iff enc is a canonical, non-identity group member.
  virtual bool is_valid(ByteView enc) const = 0;
  GroupElement decode(ByteView enc) const;

  /// base^e. Throws DecodeError on an invalid base, ArgumentError on e = 0.
  virtual GroupElement exp(const GroupElement& base, const Scalar& e) const = 0;
  GroupElement exp_g(const Scalar& e) const { return exp(generator(), e); }

  virtual Scalar mul(const Scalar& a, const Scalar& b) const = 0;
  virtual Scalar invert(const Scalar& a) const = 0;
  /// Reduces a 64-byte little-endian integer mod q.
  virtual Scalar reduce_wide(ByteView wide) const = 0;
  virtual bool is_canonical(const Scalar& s) const = 0;

  Scalar from_u64(std::uint64_t v) const;
  bool is_zero(const Scalar& s) const;
  /// Uniform over Z_q^*.
  Scalar random_scalar(Rng& rng) const;
};

using GroupPtr = std::shared_ptr<const Group>;

/// Production group: ristretto255 (q ~ 2^252).
GroupPtr ristretto255();
/// Order-5 subgroup of Z_11^* generated by 3. Unit tests only.
GroupPtr toy_group();
/// Lookup by GroupParams::id.
GroupPtr group_by_id(const std::string& id);

}  // namespace rsor
