#pragma once

#include <cstdint>

#include "rsor/bytes.hpp"
#include "rsor/group.hpp"

namespace rsor {

/// Domain-separation prefixes. Each oracle hashes its tag byte first.
enum class OracleTag : std::uint8_t { blind = 1, rho = 2, mu = 3, pi = 4 };

inline constexpr std::uint8_t kPrgTag = 5;

/// h_b(alpha, s) in Z_q^*.
Scalar ro_hb(const Group& group, const GroupElement& alpha, const GroupElement& s);

/// h_rho / h_mu / h_pi. kappa in [16, 64].
Bytes ro_hsym(OracleTag tag, const GroupElement& s, std::size_t kappa);

/// h_* = h_rho || h_mu || h_pi.
Bytes ro_hstar(const GroupElement& s, std::size_t kappa);

/// Stream-cipher PRG with a fixed zero nonce. Throws ArgumentError if
/// out_len exceeds cap.
Bytes prg(ByteView key, std::size_t out_len, std::size_t cap);

/// Uncapped PRG output, for internal use by the PRP.
Bytes keystream(ByteView key, std::size_t out_len);

/// Keyed BLAKE2b with a tag the length of the key.
Bytes mac(ByteView key, ByteView data);

bool mac_verify(ByteView key, ByteView data, ByteView tag);

}  // namespace rsor
