#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string_view>
#include <vector>

#include "gse/document.hpp"

namespace gse {

enum class EventKind { SchemaRegistered, MappingCreated, MappingDecided, ConfigChanged };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view name) noexcept;

struct StoreEvent {
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::SchemaRegistered;
    Document data;

    friend bool operator==(const StoreEvent&, const StoreEvent&) = default;
};

Document event_to_document(const StoreEvent& event);
StoreEvent event_from_document(const Document& doc);

/// Append-only event file, one JSON object per line. An empty path keeps the
/// log in memory only. Not thread-safe; callers serialize writers.
class StoreLog {
public:
    StoreLog() = default;
    /// Opens or creates the file and loads its events. A torn final line
    /// (no trailing newline) is dropped and truncated away. Throws Error on
    /// I/O failure or a corrupt complete line.
    explicit StoreLog(std::filesystem::path path);

    StoreLog(const StoreLog&) = delete;
    StoreLog& operator=(const StoreLog&) = delete;

    /// Assigns the next sequence number, writes and flushes.
    const StoreEvent& append(EventKind kind, Document data);

    const std::vector<StoreEvent>& events() const noexcept { return events_; }
    const std::filesystem::path& path() const noexcept { return path_; }

    /// Reads a log file without opening it for writing.
    static std::vector<StoreEvent> read(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::vector<StoreEvent> events_;
};

}  // namespace gse
