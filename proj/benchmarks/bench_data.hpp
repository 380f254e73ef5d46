#pragma once

#include <cstdint>
#include <vector>

namespace ragz::bench {

using Bytes = std::vector<std::uint8_t>;

Bytes random_bytes(std::size_t size, std::uint64_t seed);
/// Base64 alphabet text, roughly 4:3 compressible.
Bytes base64_text(std::size_t size, std::uint64_t seed);
Bytes gzip(const Bytes& data, int level = 6);

}  // namespace ragz::bench
