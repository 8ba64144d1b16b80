#include "gse/framing.hpp"

#include <cstdio>

#include "gse/error.hpp"

namespace gse {

std::string encode_frame(std::uint32_t schema_id, std::string_view payload) {
    std::string out;
    out.reserve(kFrameHeaderSize + payload.size());
    out.push_back(static_cast<char>(kFrameMagic));
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>((schema_id >> shift) & 0xFFu));
    }
    out.append(payload);
    return out;
}

std::string encode_frame(const FramedMessage& message) {
    return encode_frame(message.schema_id, message.payload);
}

std::uint32_t frame_schema_id(std::string_view bytes) {
    if (bytes.size() < kFrameHeaderSize) {
        throw ParseError("frame too short: " + std::to_string(bytes.size()) + " byte(s), need at least 5");
    }
    auto magic = static_cast<std::uint8_t>(bytes[0]);
    if (magic != kFrameMagic) {
        char hex[8];
        std::snprintf(hex, sizeof hex, "0x%02x", magic);
        throw ParseError(std::string("bad frame magic ") + hex + ", expected 0x01");
    }
    std::uint32_t id = 0;
    for (std::size_t i = 1; i < kFrameHeaderSize; ++i) {
        id = (id << 8) | static_cast<std::uint8_t>(bytes[i]);
    }
    return id;
}

FramedMessage decode_frame(std::string_view bytes) {
    std::uint32_t id = frame_schema_id(bytes);
    return FramedMessage{id, std::string(bytes.substr(kFrameHeaderSize))};
}

}  // namespace gse
