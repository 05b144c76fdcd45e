#pragma once

namespace rsor::detail {

void ensure_sodium();

}  // namespace rsor::detail
