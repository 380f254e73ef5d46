#pragma once

#include "corpus.hpp"

#include <cstdint>
#include <vector>

namespace ragz::support {

/// Independent reference: zlib inflate over every concatenated member.
Bytes reference_decompress(const Bytes& gz);

struct TrueBoundary {
    /// Bit offset of the block header.
    std::uint64_t bit = 0;
    std::uint64_t decompressed = 0;
    /// BTYPE of the block starting here.
    unsigned type = 0;
    bool is_final = false;
};

/// Every Deflate block start in a gzip file, as reported by zlib's Z_BLOCK
/// mode.
std::vector<TrueBoundary> true_boundaries(const Bytes& gz);

}  // namespace ragz::support
