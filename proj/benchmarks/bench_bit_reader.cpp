#include "ragz/bit_reader.hpp"

#include "bench_data.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_BitReaderRead(benchmark::State& state)
{
    const auto data = ragz::bench::random_bytes(8U << 20U, 1);
    const auto width = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        ragz::BitReader reader{std::span<const std::uint8_t>(data)};
        std::uint64_t sum = 0;
        while (reader.remaining_bits() >= width) {
            sum += reader.read(width);
        }
        benchmark::DoNotOptimize(sum);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_BitReaderRead)->Arg(1)->Arg(3)->Arg(13)->Arg(32);

void BM_BitReaderPeekSkip(benchmark::State& state)
{
    const auto data = ragz::bench::random_bytes(8U << 20U, 2);
    for (auto _ : state) {
        ragz::BitReader reader{std::span<const std::uint8_t>(data)};
        std::uint64_t sum = 0;
        while (reader.remaining_bits() >= 15) {
            const auto bits = reader.peek_bits(15);
            sum += bits;
            reader.skip(1 + (bits & 7U));
        }
        benchmark::DoNotOptimize(sum);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_BitReaderPeekSkip);

}  // namespace
