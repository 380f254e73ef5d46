#include "ragz/block_finder.hpp"

#include "bench_data.hpp"

#include <benchmark/benchmark.h>

#include <cstring>

namespace {

using namespace ragz::blockfinder;

void BM_FindDynamic(benchmark::State& state)
{
    const auto data = ragz::bench::random_bytes(4U << 20U, 3);
    const ScanWindow window(std::span<const std::uint8_t>(data), 0);
    for (auto _ : state) {
        std::uint64_t from = 0;
        std::size_t found = 0;
        while (const auto hit = find_next_dynamic(window, from, window.end_bit() - 4096)) {
            ++found;
            from = *hit + 1;
        }
        benchmark::DoNotOptimize(found);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_FindDynamic)->Unit(benchmark::kMillisecond);

// Reference path: every check with a plain bit reader.
void BM_ClassifyEveryPosition(benchmark::State& state)
{
    const auto data = ragz::bench::random_bytes(256U << 10U, 4);
    const ScanWindow window(std::span<const std::uint8_t>(data), 0);
    for (auto _ : state) {
        std::size_t valid = 0;
        for (std::uint64_t bit = 0; bit + 4096 < window.end_bit(); ++bit) {
            valid += classify_position(window, bit) == ragz::deflate::HeaderCheck::Valid ? 1 : 0;
        }
        benchmark::DoNotOptimize(valid);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_ClassifyEveryPosition)->Unit(benchmark::kMillisecond);

void BM_FindStored(benchmark::State& state)
{
    const auto data = ragz::bench::random_bytes(16U << 20U, 5);
    const ScanWindow window(std::span<const std::uint8_t>(data), 0);
    for (auto _ : state) {
        std::uint64_t from = 0;
        std::size_t found = 0;
        while (const auto hit = find_next_stored(window, from, window.end_bit())) {
            ++found;
            from = *hit + 1;
        }
        benchmark::DoNotOptimize(found);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_FindStored)->Unit(benchmark::kMillisecond);

void BM_CheckPrecode(benchmark::State& state)
{
    const auto data = ragz::bench::random_bytes(1U << 20U, 6);
    for (auto _ : state) {
        std::size_t valid = 0;
        for (std::size_t i = 0; i + 8 <= data.size(); i += 8) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, data.data() + i, 8);
            valid += check_precode(bits, 4 + static_cast<unsigned>(bits >> 60U)) == ragz::CodeClass::Valid ? 1 : 0;
        }
        benchmark::DoNotOptimize(valid);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * (data.size() / 8)));
}
BENCHMARK(BM_CheckPrecode);

}  // namespace
