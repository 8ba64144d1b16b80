#include "gse/store_log.hpp"

#include <array>
#include <sstream>

#include "gse/error.hpp"

namespace gse {

namespace {

constexpr std::array<std::string_view, 4> kEventNames = {"schema_registered", "mapping_created", "mapping_decided",
                                                         "config_changed"};

struct Loaded {
    std::vector<StoreEvent> events;
    std::uintmax_t valid_bytes = 0;
};

Loaded load(const std::filesystem::path& path) {
    Loaded out;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return out;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            break;  // torn write
        }
        ++line_no;
        std::string_view line(text.data() + pos, nl - pos);
        if (!line.empty()) {
            StoreEvent event;
            try {
                event = event_from_document(Document::parse(line));
            } catch (const std::exception& e) {
                throw Error(path.string() + ":" + std::to_string(line_no) + ": corrupt log entry: " + e.what());
            }
            if (!out.events.empty() && event.sequence <= out.events.back().sequence) {
                throw Error(path.string() + ":" + std::to_string(line_no) + ": sequence numbers must increase");
            }
            out.events.push_back(std::move(event));
        }
        pos = nl + 1;
    }
    out.valid_bytes = pos;
    return out;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
    return kEventNames[static_cast<std::size_t>(kind)];
}

std::optional<EventKind> parse_event_kind(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kEventNames.size(); ++i) {
        if (kEventNames[i] == name) {
            return static_cast<EventKind>(i);
        }
    }
    return std::nullopt;
}

Document event_to_document(const StoreEvent& event) {
    Document doc = Document::object();
    doc["seq"] = event.sequence;
    doc["event"] = std::string(to_string(event.kind));
    doc["data"] = event.data;
    return doc;
}

StoreEvent event_from_document(const Document& doc) {
    if (!doc.is_object() || !doc.contains("seq") || !doc.at("seq").is_number_unsigned() || !doc.contains("event") ||
        !doc.at("event").is_string() || !doc.contains("data")) {
        throw ParseError("event needs seq, event and data");
    }
    auto kind = parse_event_kind(doc.at("event").get<std::string>());
    if (!kind) {
        throw ParseError("unknown event '" + doc.at("event").get<std::string>() + "'");
    }
    return StoreEvent{doc.at("seq").get<std::uint64_t>(), *kind, doc.at("data")};
}

StoreLog::StoreLog(std::filesystem::path path) : path_(std::move(path)) {
    Loaded loaded = load(path_);
    events_ = std::move(loaded.events);
    std::error_code ec;
    if (std::filesystem::exists(path_, ec) && std::filesystem::file_size(path_, ec) != loaded.valid_bytes) {
        std::filesystem::resize_file(path_, loaded.valid_bytes, ec);
        if (ec) {
            throw Error("cannot truncate torn log tail in " + path_.string() + ": " + ec.message());
        }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) {
        throw Error("cannot open store log " + path_.string());
    }
}

const StoreEvent& StoreLog::append(EventKind kind, Document data) {
    StoreEvent event{events_.empty() ? 1 : events_.back().sequence + 1, kind, std::move(data)};
    if (!path_.empty()) {
        out_ << event_to_document(event).dump() << '\n';
        out_.flush();
        if (!out_) {
            throw Error("write to store log " + path_.string() + " failed");
        }
    }
    events_.push_back(std::move(event));
    return events_.back();
}

std::vector<StoreEvent> StoreLog::read(const std::filesystem::path& path) {
    return load(path).events;
}

}  // namespace gse
