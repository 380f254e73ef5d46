#include "ragz/chunk_fetcher.hpp"

#include "bench_data.hpp"

#include <benchmark/benchmark.h>

namespace {

std::uint64_t read_everything(ragz::ChunkFetcher& fetcher)
{
    std::vector<std::uint8_t> buffer(4U << 20U);
    std::uint64_t total = 0;
    while (true) {
        const auto n = fetcher.read(total, buffer);
        total += n;
        if (n < buffer.size()) {
            return total;
        }
    }
}

const ragz::bench::Bytes& corpus()
{
    static const auto gz = ragz::bench::gzip(ragz::bench::base64_text(64U << 20U, 10));
    return gz;
}

void BM_ParallelDecompress(benchmark::State& state)
{
    const auto& gz = corpus();
    ragz::FetcherOptions options;
    options.parallelism = static_cast<std::size_t>(state.range(0));
    std::uint64_t total = 0;
    for (auto _ : state) {
        ragz::ChunkFetcher fetcher(std::make_shared<ragz::MemorySource>(gz), options);
        total = read_everything(fetcher);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * total));
}
BENCHMARK(BM_ParallelDecompress)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_IndexedDecompress(benchmark::State& state)
{
    const auto& gz = corpus();
    ragz::FetcherOptions options;
    options.parallelism = static_cast<std::size_t>(state.range(0));
    ragz::GzipIndex index;
    {
        ragz::ChunkFetcher fetcher(std::make_shared<ragz::MemorySource>(gz), options);
        index = fetcher.build_full_index();
    }
    std::uint64_t total = 0;
    for (auto _ : state) {
        ragz::ChunkFetcher fetcher(std::make_shared<ragz::MemorySource>(gz), options);
        fetcher.import_index(index);
        total = read_everything(fetcher);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * total));
}
BENCHMARK(BM_IndexedDecompress)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
