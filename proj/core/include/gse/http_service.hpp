#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "gse/registry.hpp"

namespace gse {

/// Splits "host:port"; a bare port binds 0.0.0.0. Throws ParseError.
std::pair<std::string, int> parse_listen_addr(std::string_view addr);

/// HTTP front end of a Registry. Bodies are JSON (YAML accepted where a
/// schema or program document is expected); errors answer
/// `{"error": code, "message": text}`.
class HttpService {
public:
    explicit HttpService(Registry& registry);
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Binds, then blocks serving until stop(). False when binding fails.
    bool listen(const std::string& host, int port);
    /// Binds to a free port and returns it, or -1.
    int bind_to_any_port(const std::string& host);
    /// Blocks serving on the port bound by bind_to_any_port.
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gse
