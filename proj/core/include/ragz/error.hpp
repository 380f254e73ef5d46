#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ragz {

enum class ErrorCode : std::uint8_t {
    TruncatedInput,
    OutOfRange,
    Io,
    InvalidArgument,
    // gzip container
    NotGzip,
    TrailingGarbage,
    IsizeMismatch,
    CrcMismatch,
    // Deflate blocks
    ReservedBlockType,
    LengthMismatch,
    InvalidHlit,
    InvalidPrecode,
    InvalidPrecodeData,
    InvalidDistanceCode,
    InvalidLiteralCode,
    InvalidSymbol,
    DistanceTooFar,
    EmptyCode,
    OverSubscribedCode,
    IncompleteCode,
    CorruptMarkerBuffer,
    ChunkTooLarge,
    // seek point index
    IndexFormat,
    IndexCorruption,
    IndexMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Classification of a canonical prefix code given by its code-length histogram.
enum class CodeClass : std::uint8_t { Valid, OverSubscribed, Inefficient, Empty };

std::string_view to_string(CodeClass cls) noexcept;

/// Every failure raised by the library. Carries a machine-readable code and,
/// where meaningful, the compressed bit offset at which it was detected.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::optional<std::uint64_t> bit_offset = std::nullopt,
          std::optional<CodeClass> code_class = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::uint64_t> bit_offset() const noexcept { return bit_offset_; }
    std::optional<CodeClass> code_class() const noexcept { return code_class_; }

private:
    ErrorCode code_;
    std::optional<std::uint64_t> bit_offset_;
    std::optional<CodeClass> code_class_;
};

}  // namespace ragz
