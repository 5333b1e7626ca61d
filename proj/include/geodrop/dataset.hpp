#pragma once

#include <cstdint>
#include <string>

#include "geodrop/models.hpp"

namespace geodrop {

// Parse a big-endian IDX image/label file pair (magics 0x00000803 and
// 0x00000801). Pixels are scaled to [0,1]; labels must be digits 0..9.
// limit == 0 keeps every example, otherwise the first `limit` in file order.
Dataset load_mnist(const std::string& images_path, const std::string& labels_path,
                   std::size_t limit = 0);

// Gaussian clusters (unit variance per coordinate) centred on the vertices
// of the standard simplex scaled by `separation` and truncated to `dim`
// coordinates. Deterministic under `seed`; separation 0 makes every class
// distribution identical.
Dataset synth_blobs(std::size_t classes, std::size_t per_class, std::size_t dim,
                    double separation, std::uint64_t seed);

}  // namespace geodrop
