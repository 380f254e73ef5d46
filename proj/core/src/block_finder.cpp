#include "ragz/block_finder.hpp"

#include "ragz/bit_reader.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace ragz::blockfinder {

namespace {

constexpr bool header_byte_ok(unsigned x) noexcept
{
    return (x & 1U) == 0 && ((x >> 1U) & 3U) == 2 && (x >> 3U) < 30;
}

std::array<std::uint8_t, 1U << skip_lut_bits> make_skip_lut()
{
    // possible[n][p]: some 8-bit header with low n bits equal to p passes.
    std::array<std::array<bool, 256>, 9> possible{};
    for (unsigned x = 0; x < 256; ++x) {
        if (!header_byte_ok(x)) {
            continue;
        }
        for (unsigned n = 0; n <= 8; ++n) {
            possible[n][x & ((1U << n) - 1U)] = true;
        }
    }

    std::array<std::uint8_t, 1U << skip_lut_bits> lut{};
    for (unsigned v = 0; v < lut.size(); ++v) {
        lut[v] = skip_lut_bits;
        for (unsigned k = 0; k < skip_lut_bits; ++k) {
            const unsigned n = std::min(8U, skip_lut_bits - k);
            if (possible[n][(v >> k) & ((1U << n) - 1U)]) {
                lut[v] = static_cast<std::uint8_t>(k);
                break;
            }
        }
    }
    return lut;
}

std::array<std::uint64_t, 4096> make_triplet_histogram_lut()
{
    std::array<std::uint64_t, 4096> lut{};
    for (unsigned v = 0; v < lut.size(); ++v) {
        std::uint64_t packed = 0;
        for (unsigned t = 0; t < 4; ++t) {
            packed += std::uint64_t{1} << (5U * ((v >> (3U * t)) & 7U));
        }
        lut[v] = packed;
    }
    return lut;
}

// Kraft sums below are in units of 2^-5 for lengths 1..4 and 2^-7 overall.
constexpr unsigned prefix_kraft(std::uint32_t key) noexcept
{
    return ((key >> 0U) & 31U) * 16U + ((key >> 5U) & 31U) * 8U + ((key >> 10U) & 31U) * 4U +
           ((key >> 15U) & 31U) * 2U;
}

constexpr unsigned prefix_count(std::uint32_t key) noexcept
{
    return ((key >> 0U) & 31U) + ((key >> 5U) & 31U) + ((key >> 10U) & 31U) + ((key >> 15U) & 31U);
}

std::vector<std::uint64_t> make_precode_validity_lut()
{
    std::vector<std::uint64_t> bits((1U << 20U) / 64U, 0);
    for (std::uint32_t key = 0; key < (1U << 20U); ++key) {
        const auto kraft = prefix_kraft(key);
        const auto count = prefix_count(key);
        if (kraft <= 32 && count <= deflate::precode_alphabet && 32 - kraft <= deflate::precode_alphabet - count) {
            bits[key / 64U] |= std::uint64_t{1} << (key % 64U);
        }
    }
    return bits;
}

const std::array<std::uint64_t, 4096>& triplet_histogram_lut()
{
    static const auto lut = make_triplet_histogram_lut();
    return lut;
}

const std::vector<std::uint64_t>& precode_validity_lut()
{
    static const auto lut = make_precode_validity_lut();
    return lut;
}

constexpr std::uint64_t low_mask(unsigned n) noexcept
{
    return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1U;
}

bool passes_remaining_checks(const ScanWindow& window, std::uint64_t bit)
{
    const auto header = window.load(bit);
    const auto precode_count = static_cast<unsigned>(((header >> 13U) & 15U) + 4U);
    const auto precode_bits = window.load(bit + 17) & low_mask(3U * precode_count);
    if (check_precode(precode_bits, precode_count) != CodeClass::Valid) {
        return false;
    }

    const auto lengths_start = bit + 17 + 3ULL * precode_count;
    if (lengths_start >= window.end_bit()) {
        return false;
    }
    deflate::CodeLengths lengths;
    lengths.literal_count = static_cast<unsigned>(257 + ((header >> 3U) & 31U));
    lengths.distance_count = static_cast<unsigned>(1 + ((header >> 8U) & 31U));
    for (unsigned i = 0; i < precode_count; ++i) {
        lengths.precode[deflate::precode_order[i]] = static_cast<std::uint8_t>((precode_bits >> (3U * i)) & 7U);
    }

    BitReader reader(window.bytes());
    reader.seek_bits(lengths_start - window.first_bit());
    try {
        return deflate::check_code_lengths(reader, lengths, deflate::Strictness::Strict) ==
               deflate::HeaderCheck::Valid;
    } catch (const Error& error) {
        if (error.code() == ErrorCode::TruncatedInput) {
            return false;
        }
        throw;
    }
}

}  // namespace

const std::array<std::uint8_t, 1U << skip_lut_bits>& skip_lut()
{
    static const auto lut = make_skip_lut();
    return lut;
}

std::uint64_t packed_precode_histogram(std::uint64_t precode_bits, unsigned precode_count)
{
    const auto& lut = triplet_histogram_lut();
    precode_bits &= low_mask(3U * precode_count);
    std::uint64_t packed = 0;
    for (unsigned group = 0; group < 5; ++group) {
        packed += lut[(precode_bits >> (12U * group)) & 0xFFFU];
    }
    // Triplets beyond precode_count (and the 20th slot) were counted as length
    // zero; they are irrelevant to the Kraft sum.
    return packed;
}

bool precode_prefix_possible(std::uint32_t lengths_1_to_4) noexcept
{
    const auto& lut = precode_validity_lut();
    return ((lut[lengths_1_to_4 / 64U] >> (lengths_1_to_4 % 64U)) & 1U) != 0;
}

CodeClass check_precode(std::uint64_t precode_bits, unsigned precode_count)
{
    const auto packed = packed_precode_histogram(precode_bits, precode_count);
    const auto key = static_cast<std::uint32_t>((packed >> 5U) & 0xFFFFFU);
    const auto n5 = static_cast<unsigned>((packed >> 25U) & 31U);
    const auto n6 = static_cast<unsigned>((packed >> 30U) & 31U);
    const auto n7 = static_cast<unsigned>((packed >> 35U) & 31U);
    const auto coded = prefix_count(key) + n5 + n6 + n7;
    if (coded == 0) {
        return CodeClass::Empty;
    }
    const auto head = prefix_kraft(key);
    if (!precode_prefix_possible(key)) {
        return head > 32 ? CodeClass::OverSubscribed : CodeClass::Inefficient;
    }
    const auto kraft = head * 4U + n5 * 4U + n6 * 2U + n7;
    if (kraft == 128) {
        return CodeClass::Valid;
    }
    return kraft > 128 ? CodeClass::OverSubscribed : CodeClass::Inefficient;
}

std::size_t count_complete_precode_histograms()
{
    constexpr unsigned max_symbols = deflate::precode_alphabet;
    std::size_t count = 0;
    std::array<unsigned, 8> n{};
    // Depth-first over n1..n7 keeping the Kraft sum (units of 2^-7) <= 1.
    auto recurse = [&](auto&& self, unsigned length, unsigned used, unsigned kraft) -> void {
        if (length == 8) {
            if (kraft == 128) {
                ++count;
            }
            return;
        }
        const unsigned weight = 1U << (7U - length);
        for (unsigned k = 0; used + k <= max_symbols && kraft + k * weight <= 128; ++k) {
            n[length] = k;
            self(self, length + 1, used + k, kraft + k * weight);
        }
    };
    recurse(recurse, 1, 0, 0);
    return count;
}

ScanWindow::ScanWindow(const SharedSource& source, std::uint64_t first_byte, std::uint64_t end_byte)
{
    const auto size = source.size();
    first_byte_ = std::min(first_byte, size);
    end_byte = std::clamp(end_byte, first_byte_, size);
    if (const auto contiguous = source.contiguous(); contiguous.has_value()) {
        bytes_ = contiguous->subspan(first_byte_, end_byte - first_byte_);
        return;
    }
    owned_.resize(end_byte - first_byte_);
    const auto got = source.read_at(first_byte_, owned_);
    owned_.resize(got);
    bytes_ = owned_;
}

ScanWindow::ScanWindow(std::span<const std::uint8_t> bytes, std::uint64_t first_byte)
    : bytes_(bytes), first_byte_(first_byte)
{
}

std::uint64_t ScanWindow::load(std::uint64_t bit) const noexcept
{
    if (bit < first_bit() || bit >= end_bit()) {
        return 0;
    }
    const auto relative = bit - first_bit();
    const auto byte = static_cast<std::size_t>(relative / 8U);
    const auto shift = static_cast<unsigned>(relative % 8U);
    std::uint64_t word = 0;
    if (byte + 8 <= bytes_.size()) {
        std::memcpy(&word, bytes_.data() + byte, sizeof(word));
        if constexpr (std::endian::native == std::endian::big) {
            word = __builtin_bswap64(word);
        }
    } else {
        for (std::size_t i = 0; byte + i < bytes_.size(); ++i) {
            word |= std::uint64_t{bytes_[byte + i]} << (8U * i);
        }
    }
    return word >> shift;
}

deflate::HeaderCheck classify_position(const ScanWindow& window, std::uint64_t bit)
{
    using deflate::HeaderCheck;
    if (bit < window.first_bit() || bit + 3 > window.end_bit()) {
        return HeaderCheck::Truncated;
    }
    BitReader reader(window.bytes());
    reader.seek_bits(bit - window.first_bit());
    const auto bits = reader.read(3);
    if ((bits & 1U) != 0) {
        return HeaderCheck::InvalidFinalBlock;
    }
    if ((bits >> 1U) != 2) {
        return HeaderCheck::InvalidCompressionType;
    }
    deflate::CodeLengths lengths;
    return deflate::check_dynamic_header(reader, lengths, deflate::Strictness::Strict);
}

std::optional<std::uint64_t> find_next_dynamic(const ScanWindow& window, std::uint64_t from, std::uint64_t until)
{
    const auto& lut = skip_lut();
    until = std::min(until, window.end_bit());
    auto position = std::max(from, window.first_bit());
    while (position < until) {
        const auto buffer = window.load(position);
        unsigned used = 0;
        // A load yields at least 57 meaningful bits; consume them 14 at a time.
        while (used + skip_lut_bits <= 57 && position < until) {
            auto skip = static_cast<unsigned>(lut[(buffer >> used) & ((1U << skip_lut_bits) - 1U)]);
            if (skip == 0) {
                if (passes_remaining_checks(window, position)) {
                    return position;
                }
                skip = 1;
            }
            used += skip;
            position += skip;
        }
    }
    return std::nullopt;
}

std::optional<std::uint64_t> find_next_stored(const ScanWindow& window, std::uint64_t from, std::uint64_t until)
{
    const auto bytes = window.bytes();
    const auto first = window.first_bit() / 8U;
    // Canonical offset 8b - 3 must lie in [from, until).
    auto begin = (std::max(from, window.first_bit()) + 3 + 7) / 8U;
    begin = std::max<std::uint64_t>(begin, first + 1);
    const auto end = std::min<std::uint64_t>((until + 3 + 7) / 8U, first + (bytes.size() >= 4 ? bytes.size() - 3 : 0));
    for (auto b = begin; b < end; ++b) {
        const auto i = static_cast<std::size_t>(b - first);
        if ((bytes[i - 1] & 0xE0U) != 0) {
            continue;
        }
        const unsigned length = bytes[i] | (bytes[i + 1] << 8U);
        const unsigned complement = bytes[i + 2] | (bytes[i + 3] << 8U);
        if ((length ^ complement) == 0xFFFFU) {
            return b * 8U - 3U;
        }
    }
    return std::nullopt;
}

std::optional<std::uint64_t> canonical_stored_offset(std::uint64_t header_bit, std::uint64_t len_byte,
                                                     std::uint8_t byte_before_len) noexcept
{
    if (len_byte == 0 || len_byte * 8U < header_bit + 3U || (byte_before_len & 0xE0U) != 0) {
        return std::nullopt;
    }
    return len_byte * 8U - 3U;
}

CandidateIterator::CandidateIterator(const ScanWindow& window, std::uint64_t from, std::uint64_t until,
                                     std::vector<std::uint64_t> extra)
    : window_(window), until_(until), dynamic_from_(from), stored_from_(from), extra_(std::move(extra))
{
    std::erase_if(extra_, [&](std::uint64_t v) { return v < from || v >= until; });
    std::sort(extra_.begin(), extra_.end());
}

std::optional<std::uint64_t> CandidateIterator::next()
{
    if (!dynamic_ && !dynamic_done_) {
        dynamic_ = find_next_dynamic(window_, dynamic_from_, until_);
        dynamic_done_ = !dynamic_;
    }
    if (!stored_ && !stored_done_) {
        stored_ = find_next_stored(window_, stored_from_, until_);
        stored_done_ = !stored_;
    }
    while (extra_next_ < extra_.size() && any_returned_ && extra_[extra_next_] <= last_) {
        ++extra_next_;
    }

    std::optional<std::uint64_t> best;
    auto consider = [&](std::optional<std::uint64_t> v) {
        if (v && (!best || *v < *best)) {
            best = v;
        }
    };
    consider(dynamic_);
    consider(stored_);
    if (extra_next_ < extra_.size()) {
        consider(extra_[extra_next_]);
    }
    if (!best) {
        return std::nullopt;
    }

    if (dynamic_ == best) {
        dynamic_from_ = *best + 1;
        dynamic_.reset();
    }
    if (stored_ == best) {
        stored_from_ = *best + 1;
        stored_.reset();
    }
    last_ = *best;
    any_returned_ = true;
    return best;
}

}  // namespace ragz::blockfinder
