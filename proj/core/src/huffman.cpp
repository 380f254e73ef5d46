#include "ragz/huffman.hpp"

#include <algorithm>

namespace ragz::huffman {

CodeLengthHistogram CodeLengthHistogram::from_lengths(std::span<const std::uint8_t> lengths)
{
    CodeLengthHistogram histogram;
    for (const auto length : lengths) {
        if (length > max_code_length) {
            throw Error(ErrorCode::InvalidArgument, "code length " + std::to_string(length) + " exceeds 15");
        }
        ++histogram.count[length];
    }
    return histogram;
}

std::uint32_t CodeLengthHistogram::coded_symbols() const noexcept
{
    std::uint32_t total = 0;
    for (unsigned length = 1; length <= max_code_length; ++length) {
        total += count[length];
    }
    return total;
}

std::uint64_t CodeLengthHistogram::kraft_fixed_point() const noexcept
{
    std::uint64_t sum = 0;
    for (unsigned length = 1; length <= max_code_length; ++length) {
        sum += std::uint64_t{count[length]} << (max_code_length - length);
    }
    return sum;
}

CodeClass classify(const CodeLengthHistogram& histogram) noexcept
{
    if (histogram.coded_symbols() == 0) {
        return CodeClass::Empty;
    }
    // The running Kraft sum only grows with the length, so a prefix level
    // overflows exactly when the total exceeds one.
    const auto kraft = histogram.kraft_fixed_point();
    if (kraft > kraft_one) {
        return CodeClass::OverSubscribed;
    }
    return kraft == kraft_one ? CodeClass::Valid : CodeClass::Inefficient;
}

CodeClass classify(std::span<const std::uint8_t> lengths) noexcept
{
    CodeLengthHistogram histogram;
    for (const auto length : lengths) {
        if (length > max_code_length) {
            return CodeClass::OverSubscribed;
        }
        ++histogram.count[length];
    }
    return classify(histogram);
}

std::vector<std::uint16_t> canonical_codes(std::span<const std::uint8_t> lengths)
{
    const auto histogram = CodeLengthHistogram::from_lengths(lengths);
    std::array<std::uint32_t, max_code_length + 2> next_code{};
    std::uint32_t code = 0;
    for (unsigned length = 1; length <= max_code_length; ++length) {
        code = (code + (length == 1 ? 0U : histogram.count[length - 1])) << 1U;
        next_code[length] = code;
    }
    std::vector<std::uint16_t> codes(lengths.size(), 0);
    for (std::size_t symbol = 0; symbol < lengths.size(); ++symbol) {
        if (const auto length = lengths[symbol]; length != 0) {
            codes[symbol] = static_cast<std::uint16_t>(next_code[length]++);
        }
    }
    return codes;
}

HuffmanDecoder HuffmanDecoder::build(std::span<const std::uint8_t> lengths, bool permissive)
{
    const auto histogram = CodeLengthHistogram::from_lengths(lengths);
    const auto cls = classify(histogram);

    HuffmanDecoder decoder;
    decoder.alphabet_size_ = lengths.size();

    if (cls == CodeClass::Empty) {
        if (permissive) {
            return decoder;
        }
        throw Error(ErrorCode::EmptyCode, "all code lengths are zero", std::nullopt, cls);
    }
    if (cls == CodeClass::OverSubscribed) {
        throw Error(ErrorCode::OverSubscribedCode, "", std::nullopt, cls);
    }
    if (cls == CodeClass::Inefficient) {
        const bool single_one_bit = histogram.coded_symbols() == 1 && histogram.count[1] == 1;
        if (!(permissive && single_one_bit)) {
            throw Error(ErrorCode::IncompleteCode, "", std::nullopt, cls);
        }
    }

    unsigned max_length = 0;
    for (unsigned length = max_code_length; length > 0; --length) {
        if (histogram.count[length] != 0) {
            max_length = length;
            break;
        }
    }
    decoder.max_length_ = max_length;
    decoder.table_.assign(std::size_t{1} << max_length, 0);
    decoder.table_mask_ = (std::uint32_t{1} << max_length) - 1U;

    const auto codes = canonical_codes(lengths);
    for (std::size_t symbol = 0; symbol < lengths.size(); ++symbol) {
        const unsigned length = lengths[symbol];
        if (length == 0) {
            continue;
        }
        const auto packed = (static_cast<std::uint32_t>(symbol) << 8U) | length;
        const auto step = std::size_t{1} << length;
        for (auto index = std::size_t{reverse_bits(codes[symbol], length)}; index < decoder.table_.size();
             index += step) {
            decoder.table_[index] = packed;
        }
    }
    return decoder;
}

}  // namespace ragz::huffman
