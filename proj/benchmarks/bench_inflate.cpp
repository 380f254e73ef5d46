#include "ragz/bit_reader.hpp"
#include "ragz/deflate.hpp"
#include "ragz/gzip_format.hpp"

#include "bench_data.hpp"

#include <benchmark/benchmark.h>
#include <zlib.h>

namespace {

using ragz::bench::Bytes;

std::uint64_t decode_member(const Bytes& gz, bool two_stage)
{
    ragz::BitReader reader{std::span<const std::uint8_t>(gz)};
    ragz::gzip::parse_gzip_header(reader);
    auto decoder = two_stage ? ragz::deflate::BlockDecoder::with_unknown_window({})
                             : ragz::deflate::BlockDecoder::with_window({}, {});
    while (true) {
        const auto header = ragz::deflate::read_block_header(reader);
        if (header.type == ragz::deflate::BlockType::Dynamic) {
            const auto codes = ragz::deflate::read_dynamic_header(reader);
            decoder.decode_block(reader, header, &codes);
        } else {
            decoder.decode_block(reader, header);
        }
        if (header.is_final) {
            return decoder.size();
        }
    }
}

void BM_Inflate(benchmark::State& state)
{
    const auto data = ragz::bench::base64_text(32U << 20U, 7);
    const auto gz = ragz::bench::gzip(data);
    const bool two_stage = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode_member(gz, two_stage));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
    state.SetLabel(two_stage ? "markers" : "bytes");
}
BENCHMARK(BM_Inflate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ZlibInflate(benchmark::State& state)
{
    const auto data = ragz::bench::base64_text(32U << 20U, 7);
    const auto gz = ragz::bench::gzip(data);
    Bytes out(data.size());
    for (auto _ : state) {
        z_stream zs{};
        inflateInit2(&zs, 31);
        zs.next_in = const_cast<Bytef*>(gz.data());
        zs.avail_in = static_cast<uInt>(gz.size());
        zs.next_out = out.data();
        zs.avail_out = static_cast<uInt>(out.size());
        benchmark::DoNotOptimize(inflate(&zs, Z_FINISH));
        inflateEnd(&zs);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_ZlibInflate)->Unit(benchmark::kMillisecond);

void BM_ReplaceMarkers(benchmark::State& state)
{
    const auto window = ragz::bench::random_bytes(ragz::deflate::window_size, 8);
    const auto noise = ragz::bench::random_bytes(8U << 20U, 9);
    std::vector<std::uint16_t> symbols(noise.size() / 2);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const auto v = static_cast<std::uint16_t>(noise[2 * i] | (noise[2 * i + 1] << 8U));
        symbols[i] = (v & 1U) != 0 ? static_cast<std::uint16_t>(v >> 8U) : static_cast<std::uint16_t>(32768U | (v >> 1U));
    }
    Bytes out(symbols.size());
    for (auto _ : state) {
        ragz::deflate::replace_markers(symbols, window, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * symbols.size()));
}
BENCHMARK(BM_ReplaceMarkers)->Unit(benchmark::kMillisecond);

}  // namespace
