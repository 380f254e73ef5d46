#include "bench_data.hpp"

#include <zlib.h>

#include <random>
#include <stdexcept>

namespace ragz::bench {

Bytes random_bytes(std::size_t size, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bytes out(size);
    for (auto& b : out) {
        b = static_cast<std::uint8_t>(rng());
    }
    return out;
}

Bytes base64_text(std::size_t size, std::uint64_t seed)
{
    static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::mt19937_64 rng(seed);
    Bytes out(size);
    for (std::size_t i = 0; i < size; ++i) {
        out[i] = (i + 1) % 77 == 0 ? '\n' : static_cast<std::uint8_t>(alphabet[rng() % 64]);
    }
    return out;
}

Bytes gzip(const Bytes& data, int level)
{
    z_stream zs{};
    if (deflateInit2(&zs, level, Z_DEFLATED, 31, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw std::runtime_error("deflateInit2 failed");
    }
    Bytes out(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw std::runtime_error("deflate failed");
    }
    out.resize(zs.total_out);
    return out;
}

}  // namespace ragz::bench
