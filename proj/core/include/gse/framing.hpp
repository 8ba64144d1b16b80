#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gse {

inline constexpr std::uint8_t kFrameMagic = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 5;

/// Wire record: magic byte, 32-bit big-endian schema id, payload bytes.
struct FramedMessage {
    std::uint32_t schema_id = 0;
    std::string payload;

    friend bool operator==(const FramedMessage&, const FramedMessage&) = default;
};

std::string encode_frame(const FramedMessage& message);
std::string encode_frame(std::uint32_t schema_id, std::string_view payload);

/// Throws ParseError on a short buffer or a wrong magic byte.
FramedMessage decode_frame(std::string_view bytes);

/// Reads only the id; same errors as decode_frame.
std::uint32_t frame_schema_id(std::string_view bytes);

}  // namespace gse
