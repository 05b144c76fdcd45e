#pragma once

#include <json.hpp>

#include "rsor/packet.hpp"

namespace rsor {

/// Fixed-seed onion vectors: keys, every layer of a repliable onion, the
/// reply onion built at the exit, and the processing results, all in hex.
nlohmann::ordered_json make_test_vectors(Filler filler = Filler::random);

}  // namespace rsor
