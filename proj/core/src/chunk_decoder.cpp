#include "ragz/chunk_decoder.hpp"

#include "ragz/bit_reader.hpp"
#include "ragz/block_finder.hpp"

namespace ragz {

namespace {

template <typename Symbol>
void trim(deflate::SymbolBuffer<Symbol>& buffer)
{
    // Growth doubles the capacity; give back the slack before the chunk is
    // parked in a cache.
    if (buffer.storage.size() > buffer.size + buffer.size / 8) {
        buffer.storage.resize(buffer.size);
        buffer.storage.shrink_to_fit();
    }
}

}  // namespace

DecodedChunk decode_chunk(const std::shared_ptr<const SharedSource>& source, const ChunkRequest& request,
                          const ChunkDecodeOptions& options)
{
    BitReader reader(source);
    reader.seek_bits(request.start);

    deflate::BlockDecoder::Options decoder_options;
    decoder_options.max_output = options.max_output;
    decoder_options.statistics = options.statistics;
    decoder_options.initial_capacity = options.initial_capacity;
    decoder_options.tracker = options.statistics != nullptr ? &options.statistics->memory : nullptr;
    auto decoder = request.window ? deflate::BlockDecoder::with_window(*request.window, decoder_options)
                                  : deflate::BlockDecoder::with_unknown_window(decoder_options);

    DecodedChunk chunk;
    chunk.start_key = request.start;
    if (request.at_member_header) {
        gzip::parse_gzip_header(reader);
        chunk.member_starts.push_back(0);
    }

    bool first_block = true;
    while (true) {
        const auto block_start = reader.tell();
        const auto peeked = reader.peek(3);
        if (peeked.available < 3) {
            throw Error(ErrorCode::TruncatedInput, "stream ends before the next block header", block_start);
        }
        const bool is_final = (peeked.value & 1U) != 0;
        const auto type = peeked.value >> 1U;

        auto key = block_start;
        bool findable = false;
        if (type == 0 && !is_final) {
            const auto len_byte = (block_start + 3 + 7) / 8U;
            const auto bits = static_cast<unsigned>(len_byte * 8U - block_start);
            // Readers starting 3 bits before LEN must see BFINAL = 0, BTYPE = 0.
            if ((reader.peek_bits(bits) >> (bits - 3U)) == 0) {
                key = len_byte * 8U - 3U;
                findable = true;
            }
        }

        std::optional<deflate::BlockHeader> header;
        std::optional<deflate::DynamicCodes> dynamic;
        if (type == 2 && !is_final && !first_block && request.policy == StopPolicy::FindableBoundary) {
            // Only headers with complete codes are reported by the finder.
            header = deflate::read_block_header(reader);
            dynamic = deflate::read_dynamic_header(reader);
            findable = dynamic->complete;
        }

        if (!first_block) {
            const bool eligible = request.policy == StopPolicy::AnyBoundary ||
                                  (request.policy == StopPolicy::FindableBoundary && findable);
            if (eligible && key >= request.stop) {
                chunk.end_key = key;
                break;
            }
        }
        chunk.boundaries.push_back({key, decoder.size()});
        first_block = false;

        if (!header) {
            header = deflate::read_block_header(reader);
        }
        decoder.decode_block(reader, *header, dynamic ? &*dynamic : nullptr);

        if (header->is_final) {
            const auto footer = gzip::parse_gzip_footer(reader);
            chunk.member_ends.push_back({decoder.size(), footer});
            if (gzip::classify_after_member(reader) == gzip::AfterMember::EndOfFile) {
                chunk.reached_end = true;
                chunk.end_key = reader.size_bits();
                break;
            }
            const auto member_start = reader.tell();
            if (request.policy != StopPolicy::FindableBoundary && member_start >= request.stop) {
                chunk.end_key = member_start;
                break;
            }
            gzip::parse_gzip_header(reader);
            decoder.reset_history();
            chunk.member_starts.push_back(decoder.size());
        }
    }

    chunk.markers = decoder.take_markers();
    chunk.bytes = decoder.take_bytes();
    trim(chunk.markers);
    trim(chunk.bytes);
    return chunk;
}

DecodedChunk decode_chunk_speculative(const std::shared_ptr<const SharedSource>& source, std::uint64_t guess,
                                      std::uint64_t stop, const ChunkDecodeOptions& options,
                                      std::vector<std::uint64_t> extra_candidates)
{
    if (options.statistics != nullptr) {
        options.statistics->speculative_tasks.fetch_add(1, std::memory_order_relaxed);
    }
    const blockfinder::ScanWindow window(*source, guess / 8U, (stop + max_dynamic_header_bits) / 8U + 16U);
    blockfinder::CandidateIterator candidates(window, guess, stop, std::move(extra_candidates));

    ChunkRequest request;
    request.stop = stop;
    request.policy = StopPolicy::FindableBoundary;
    while (const auto candidate = candidates.next()) {
        request.start = *candidate;
        try {
            return decode_chunk(source, request, options);
        } catch (const Error&) {
            if (options.statistics != nullptr) {
                options.statistics->failed_candidates.fetch_add(1, std::memory_order_relaxed);
            }
        }
    }

    if (options.statistics != nullptr) {
        options.statistics->empty_chunks.fetch_add(1, std::memory_order_relaxed);
    }
    DecodedChunk chunk;
    chunk.found = false;
    chunk.start_key = guess;
    chunk.end_key = stop;
    return chunk;
}

}  // namespace ragz
