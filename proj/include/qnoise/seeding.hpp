#pragma once

#include <cstdint>
#include <string_view>

namespace qnoise {

// Stream seed for one unit of work: the top-level seed, a component name and
// an index are hashed together (FNV-1a over the name, then splitmix64
// finalisation). Stable across platforms and runs.
std::uint64_t derive_seed(std::uint64_t base, std::string_view component, std::uint64_t index);

}  // namespace qnoise
