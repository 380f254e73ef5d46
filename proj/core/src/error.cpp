#include "ragz/error.hpp"

namespace ragz {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::TruncatedInput: return "truncated input";
    case ErrorCode::OutOfRange: return "offset out of range";
    case ErrorCode::Io: return "I/O error";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::NotGzip: return "not a gzip stream";
    case ErrorCode::TrailingGarbage: return "trailing garbage after gzip stream";
    case ErrorCode::IsizeMismatch: return "ISIZE mismatch";
    case ErrorCode::CrcMismatch: return "CRC32 mismatch";
    case ErrorCode::ReservedBlockType: return "reserved block type";
    case ErrorCode::LengthMismatch: return "stored block LEN/NLEN mismatch";
    case ErrorCode::InvalidHlit: return "invalid HLIT field";
    case ErrorCode::InvalidPrecode: return "invalid precode";
    case ErrorCode::InvalidPrecodeData: return "invalid precode-encoded code lengths";
    case ErrorCode::InvalidDistanceCode: return "invalid distance code";
    case ErrorCode::InvalidLiteralCode: return "invalid literal/length code";
    case ErrorCode::InvalidSymbol: return "invalid Huffman symbol";
    case ErrorCode::DistanceTooFar: return "back-reference distance exceeds history";
    case ErrorCode::EmptyCode: return "empty prefix code";
    case ErrorCode::OverSubscribedCode: return "over-subscribed prefix code";
    case ErrorCode::IncompleteCode: return "incomplete prefix code";
    case ErrorCode::CorruptMarkerBuffer: return "corrupt marker buffer";
    case ErrorCode::ChunkTooLarge: return "decompressed chunk exceeds size cap";
    case ErrorCode::IndexFormat: return "bad index file format";
    case ErrorCode::IndexCorruption: return "index corruption";
    case ErrorCode::IndexMismatch: return "index does not match file";
    }
    return "unknown error";
}

std::string_view to_string(CodeClass cls) noexcept
{
    switch (cls) {
    case CodeClass::Valid: return "valid";
    case CodeClass::OverSubscribed: return "over-subscribed";
    case CodeClass::Inefficient: return "inefficient";
    case CodeClass::Empty: return "empty";
    }
    return "unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message, std::optional<std::uint64_t> bit_offset)
{
    std::string text{to_string(code)};
    if (!message.empty()) {
        text += ": ";
        text += message;
    }
    if (bit_offset) {
        text += " (at compressed bit offset " + std::to_string(*bit_offset) + ", byte "
                + std::to_string(*bit_offset / 8) + ")";
    }
    return text;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::optional<std::uint64_t> bit_offset,
             std::optional<CodeClass> code_class)
    : std::runtime_error(format_message(code, message, bit_offset)),
      code_(code),
      bit_offset_(bit_offset),
      code_class_(code_class)
{
}

}  // namespace ragz
