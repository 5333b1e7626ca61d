#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace geodrop {

// Binary inclusion pattern over a flattened parameter vector: kept[i] == 0
// means coordinate i is pinned to zero (dropped). Shared between the model
// layer (masked training) and the geometry layer (induced metrics).
struct DropoutMask {
    std::vector<std::uint8_t> kept;

    static DropoutMask all_kept(std::size_t n) {
        return DropoutMask{std::vector<std::uint8_t>(n, 1)};
    }

    std::size_t size() const { return kept.size(); }
    std::size_t count_kept() const {
        std::size_t c = 0;
        for (auto k : kept) c += (k != 0);
        return c;
    }
};

} // namespace geodrop
