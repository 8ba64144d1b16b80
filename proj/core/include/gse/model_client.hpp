#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "gse/document.hpp"

namespace gse {

/// A callable the model may invoke. `parameters` is a JSON-schema object.
struct ToolSpec {
    std::string name;
    std::string description;
    Document parameters;
};

struct ToolInvocation {
    std::string name;
    Document arguments;
};

/// Tool-call protocol between the planner and a model. Implementations must
/// be safe for concurrent submit calls.
class ModelClient {
public:
    virtual ~ModelClient() = default;

    /// Throws TransportError when the model cannot be reached.
    virtual std::vector<ToolInvocation> submit(const std::string& prompt, const std::vector<ToolSpec>& tools) = 0;
};

/// One tool per STL command, `match` first.
const std::vector<ToolSpec>& stl_tool_catalog();

/// Replays canned responses in order. Transcript format:
///   {"responses": [[{"name": "match", "arguments": {...}}, ...], ...]}
/// Once exhausted the last response is repeated; an empty transcript answers
/// with no invocations.
class ScriptedModelClient : public ModelClient {
public:
    explicit ScriptedModelClient(std::vector<std::vector<ToolInvocation>> responses);
    ScriptedModelClient(ScriptedModelClient&& other) noexcept;

    static ScriptedModelClient from_document(const Document& transcript);
    static ScriptedModelClient from_file(const std::filesystem::path& path);

    std::vector<ToolInvocation> submit(const std::string& prompt, const std::vector<ToolSpec>& tools) override;

    /// Prompts received so far.
    std::vector<std::string> prompts() const;

private:
    std::vector<std::vector<ToolInvocation>> responses_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::vector<std::string> prompts_;
};

/// OpenAI-style chat-completions endpoint with `tools` / `tool_calls`.
class HttpModelClient : public ModelClient {
public:
    /// `url` is the full endpoint, e.g. https://host/v1/chat/completions.
    HttpModelClient(std::string url, std::string key, std::string model);

    /// Reads GSE_MODEL_URL, GSE_MODEL_KEY and GSE_MODEL_NAME. Throws
    /// TransportError when GSE_MODEL_URL is unset.
    static HttpModelClient from_env();

    std::vector<ToolInvocation> submit(const std::string& prompt, const std::vector<ToolSpec>& tools) override;

    /// Request body sent for `prompt`; exposed for tests.
    Document request_body(const std::string& prompt, const std::vector<ToolSpec>& tools) const;
    /// Extracts invocations from a response body. Arguments that are not
    /// valid JSON are kept as a raw string so the planner can report them.
    static std::vector<ToolInvocation> parse_response(const Document& body);

private:
    std::string url_;
    std::string key_;
    std::string model_;
};

}  // namespace gse
