#include "gse/model_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "gse/error.hpp"

namespace gse {

namespace {

Document string_param(const char* description) {
    return Document{{"type", "string"}, {"description", description}};
}

Document object_schema(Document properties, std::vector<std::string> required) {
    Document out = Document::object();
    out["type"] = "object";
    out["properties"] = std::move(properties);
    out["required"] = std::move(required);
    out["additionalProperties"] = false;
    return out;
}

ToolSpec tool(std::string name, std::string description, Document properties, std::vector<std::string> required) {
    return ToolSpec{std::move(name), std::move(description), object_schema(std::move(properties), std::move(required))};
}

std::vector<ToolSpec> build_catalog() {
    const Document source = string_param("Dot-separated path of a field in the source schema.");
    const Document target = string_param("Dot-separated path of a field in the target schema.");
    const Document literal = Document{{"description", "Literal value; strings name enum symbols."}};
    std::vector<ToolSpec> out;
    out.push_back(tool("match",
                       "Call exactly once, first. Say whether both schemas describe the same kind of entity. "
                       "When same_entity is false no other command may follow.",
                       {{"same_entity", {{"type", "boolean"}}}, {"reason", string_param("Short justification.")}},
                       {"same_entity"}));
    out.push_back(tool("copy", "Move a source value unchanged into a target field that has the same name.",
                       {{"source", source}, {"target", target}}, {"source", "target"}));
    out.push_back(tool("add", "Set a target field to a constant for every record.",
                       {{"target", target}, {"value", literal}}, {"target", "value"}));
    out.push_back(tool("cast",
                       "Convert a source value to another type and store it in the target field. `to` must equal "
                       "the target field's declared type: a kind name, or {type: enum, variants: [...]}.",
                       {{"source", source}, {"target", target}, {"to", {{"description", "Target type."}}}},
                       {"source", "target", "to"}));
    out.push_back(tool("delete", "Declare that a source field is intentionally not carried over.",
                       {{"source", source}}, {"source"}));
    out.push_back(tool("rename", "Move a source value unchanged into a target field with a different name.",
                       {{"source", source}, {"target", target}}, {"source", "target"}));
    out.push_back(tool("default",
                       "Give a target field a constant whenever it is still absent or null at this point; may also "
                       "be the only command for a field with no source.",
                       {{"target", target}, {"value", literal}}, {"target", "value"}));
    out.push_back(tool("missing",
                       "Declare that no source data can produce this target field. Records will fail to convert.",
                       {{"target", target}, {"reason", string_param("Why no mapping exists.")}}, {"target"}));
    out.push_back(tool("scale",
                       "Multiply the numeric value already written to a target field. Must come after the command "
                       "that writes the field.",
                       {{"target", target}, {"factor", {{"type", "number"}}}}, {"target", "factor"}));
    out.push_back(tool("shift",
                       "Add a constant (negative to subtract) to the numeric value already written to a target "
                       "field. Must come after the command that writes the field.",
                       {{"target", target}, {"offset", {{"type", "number"}}}}, {"target", "offset"}));
    out.push_back(tool("link",
                       "Translate the enum symbol already written to a target field using a table from source "
                       "symbols to target symbols, with an optional fallback symbol.",
                       {{"target", target},
                        {"table", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}},
                        {"fallback", string_param("Target symbol used for keys missing from the table.")}},
                       {"target", "table"}));
    out.push_back(tool("gen",
                       "Define a named conversion function as an expression over `value`, for use by apply. "
                       "Operators: + - * / % comparisons and/or/not; functions: if round floor ceil abs min max "
                       "concat lower upper substr to_string to_number to_boolean.",
                       {{"name", string_param("Identifier for the function.")},
                        {"expr", string_param("Expression, e.g. value * 1.8 + 32.")}},
                       {"name", "expr"}));
    out.push_back(tool("apply",
                       "Read a source value, run a function on it and write the result to the target field. `fn` "
                       "is a gen name, a one-argument builtin, or an inline expression.",
                       {{"source", source}, {"target", target}, {"fn", string_param("Function or expression.")}},
                       {"source", "target", "fn"}));
    return out;
}

ToolInvocation invocation_from_document(const Document& doc) {
    if (!doc.is_object() || !doc.contains("name") || !doc.at("name").is_string()) {
        throw ParseError("transcript: each invocation needs a string 'name'");
    }
    ToolInvocation inv;
    inv.name = doc.at("name").get<std::string>();
    inv.arguments = doc.contains("arguments") ? doc.at("arguments") : Document::object();
    return inv;
}

}  // namespace

const std::vector<ToolSpec>& stl_tool_catalog() {
    static const std::vector<ToolSpec> catalog = build_catalog();
    return catalog;
}

ScriptedModelClient::ScriptedModelClient(std::vector<std::vector<ToolInvocation>> responses)
    : responses_(std::move(responses)) {}

ScriptedModelClient::ScriptedModelClient(ScriptedModelClient&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    responses_ = std::move(other.responses_);
    next_ = other.next_;
    prompts_ = std::move(other.prompts_);
}

ScriptedModelClient ScriptedModelClient::from_document(const Document& transcript) {
    if (!transcript.is_object() || !transcript.contains("responses") || !transcript.at("responses").is_array()) {
        throw ParseError("transcript: expected a 'responses' list");
    }
    std::vector<std::vector<ToolInvocation>> responses;
    for (const auto& response : transcript.at("responses")) {
        if (!response.is_array()) {
            throw ParseError("transcript: each response must be a list of invocations");
        }
        std::vector<ToolInvocation> calls;
        for (const auto& call : response) {
            calls.push_back(invocation_from_document(call));
        }
        responses.push_back(std::move(calls));
    }
    return ScriptedModelClient(std::move(responses));
}

ScriptedModelClient ScriptedModelClient::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read transcript " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_document(parse_document(buffer.str()));
}

std::vector<ToolInvocation> ScriptedModelClient::submit(const std::string& prompt, const std::vector<ToolSpec>&) {
    std::lock_guard lock(mutex_);
    prompts_.push_back(prompt);
    if (responses_.empty()) {
        return {};
    }
    std::size_t index = std::min(next_, responses_.size() - 1);
    ++next_;
    return responses_[index];
}

std::vector<std::string> ScriptedModelClient::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

HttpModelClient::HttpModelClient(std::string url, std::string key, std::string model)
    : url_(std::move(url)), key_(std::move(key)), model_(std::move(model)) {}

HttpModelClient HttpModelClient::from_env() {
    const char* url = std::getenv("GSE_MODEL_URL");
    if (url == nullptr || *url == '\0') {
        throw TransportError("GSE_MODEL_URL is not set");
    }
    const char* key = std::getenv("GSE_MODEL_KEY");
    const char* model = std::getenv("GSE_MODEL_NAME");
    return HttpModelClient(url, key != nullptr ? key : "", model != nullptr && *model != '\0' ? model : "gpt-4o");
}

Document HttpModelClient::request_body(const std::string& prompt, const std::vector<ToolSpec>& tools) const {
    Document body = Document::object();
    body["model"] = model_;
    body["temperature"] = 0;
    body["messages"] = Document::array({Document{{"role", "user"}, {"content", prompt}}});
    Document list = Document::array();
    for (const auto& t : tools) {
        list.push_back(Document{{"type", "function"},
                                {"function",
                                 {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
    }
    body["tools"] = std::move(list);
    body["tool_choice"] = "required";
    return body;
}

std::vector<ToolInvocation> HttpModelClient::parse_response(const Document& body) {
    std::vector<ToolInvocation> out;
    if (!body.is_object() || !body.contains("choices") || !body.at("choices").is_array() ||
        body.at("choices").empty()) {
        throw ProtocolError("model response has no choices");
    }
    const Document& message = body.at("choices").at(0).value("message", Document::object());
    if (!message.contains("tool_calls") || !message.at("tool_calls").is_array()) {
        return out;
    }
    for (const auto& call : message.at("tool_calls")) {
        const Document fn = call.value("function", Document::object());
        ToolInvocation inv;
        inv.name = fn.value("name", std::string());
        const Document raw = fn.value("arguments", Document("{}"));
        if (raw.is_string()) {
            try {
                inv.arguments = Document::parse(raw.get<std::string>());
            } catch (const nlohmann::json::parse_error&) {
                inv.arguments = raw;
            }
        } else {
            inv.arguments = raw;
        }
        out.push_back(std::move(inv));
    }
    return out;
}

std::vector<ToolInvocation> HttpModelClient::submit(const std::string& prompt, const std::vector<ToolSpec>& tools) {
    auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError("model URL must include a scheme: " + url_);
    }
    auto path_start = url_.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!key_.empty()) {
        headers.emplace("Authorization", "Bearer " + key_);
    }
    auto result = client.Post(path, headers, request_body(prompt, tools).dump(), "application/json");
    if (!result) {
        throw TransportError("model request failed: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw TransportError("model endpoint answered HTTP " + std::to_string(result->status));
    }
    Document body;
    try {
        body = Document::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("model response is not JSON: ") + e.what());
    }
    return parse_response(body);
}

}  // namespace gse
