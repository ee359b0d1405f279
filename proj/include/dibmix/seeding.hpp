#pragma once

#include <cstdint>

namespace dibmix {

// Hierarchical seed splitting. Every random stream in the library is
// seeded as derive_seed(parent, index), so the stream for a given
// restart, replicate or method depends only on its position in the
// hierarchy and never on scheduling:
//
//   dib_fit restart r        : derive_seed(master, r)
//   benchmark cell c         : derive_seed(master, c)
//   replicate r of a cell    : derive_seed(cell_seed, r)
//   dataset of a replicate   : derive_seed(replicate_seed, 0)
//   method m of a replicate  : derive_seed(replicate_seed, 1 + m)

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

} // namespace dibmix
