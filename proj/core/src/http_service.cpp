#include "gse/http_service.hpp"

#include <charconv>

#include <httplib.h>

#include "gse/assembler.hpp"

namespace gse {

namespace {

void reply(httplib::Response& res, int status, const Document& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                 Document extra = Document::object()) {
    Document body = Document::object();
    body["error"] = code;
    body["message"] = message;
    for (auto& [k, v] : extra.items()) {
        body[k] = v;
    }
    reply(res, status, body);
}

Document report_to_document(const CompatReport& report) {
    Document d = Document::object();
    d["mode"] = std::string(to_string(report.mode));
    d["compatible"] = report.compatible();
    Document list = Document::array();
    for (const auto& v : report.violations) {
        list.push_back(Document{{"path", v.path}, {"rule", v.rule}, {"message", v.message}});
    }
    d["violations"] = std::move(list);
    return d;
}

std::uint32_t parse_id(const std::string& text) {
    std::uint32_t id = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("invalid schema id '" + text + "'");
    }
    return id;
}

Document body_document(const httplib::Request& req) {
    return parse_document(req.body);
}

std::string string_field(const Document& body, const char* key) {
    if (!body.is_object() || !body.contains(key) || !body.at(key).is_string()) {
        throw ParseError(std::string("request body needs a string '") + key + "'");
    }
    return body.at(key).get<std::string>();
}

std::uint32_t id_field(const Document& body, const char* key) {
    if (!body.is_object() || !body.contains(key) || !body.at(key).is_number_integer() ||
        body.at(key).get<std::int64_t>() < 0 || body.at(key).get<std::int64_t>() > UINT32_MAX) {
        throw ParseError(std::string("request body needs a non-negative integer '") + key + "'");
    }
    return static_cast<std::uint32_t>(body.at(key).get<std::int64_t>());
}

Document schema_entry(const RegisteredSchema& s) {
    Document d = Document::object();
    d["id"] = s.id.id;
    d["subject"] = s.subject;
    d["version"] = s.version;
    d["fingerprint"] = s.id.fingerprint;
    d["schema"] = schema_to_document(s.schema);
    return d;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const RegistryError& e) {
            switch (e.kind()) {
                case RegistryErrorKind::NotFound: reply_error(res, 404, "not-found", e.what()); break;
                case RegistryErrorKind::Conflict: reply_error(res, 409, "conflict", e.what()); break;
                case RegistryErrorKind::Incompatible:
                    reply_error(res, 409, "incompatible", e.what(),
                                Document{{"report", report_to_document(*e.report())}});
                    break;
                case RegistryErrorKind::Rejected: reply_error(res, 422, "rejected", e.what()); break;
            }
        } catch (const ParseError& e) {
            reply_error(res, 400, "parse", e.what());
        } catch (const TransformError& e) {
            reply_error(res, 422, "transform", e.what(),
                        Document{{"kind", std::string(to_string(e.kind()))}, {"path", e.path().value_or("")}});
        } catch (const CompileError& e) {
            reply_error(res, 422, "compile", e.what());
        } catch (const TransportError& e) {
            reply_error(res, 502, "transport", e.what());
        } catch (const ProtocolError& e) {
            reply_error(res, 502, "protocol", e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, "internal", e.what());
        }
    };
}

}  // namespace

std::pair<std::string, int> parse_listen_addr(std::string_view addr) {
    std::string host = "0.0.0.0";
    std::string_view port_text = addr;
    if (auto colon = addr.rfind(':'); colon != std::string_view::npos) {
        host = std::string(addr.substr(0, colon));
        port_text = addr.substr(colon + 1);
    }
    int port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw ParseError("invalid listen address '" + std::string(addr) + "'");
    }
    return {host.empty() ? "0.0.0.0" : host, port};
}

struct HttpService::Impl {
    Registry& registry;
    httplib::Server server;

    explicit Impl(Registry& r) : registry(r) { routes(); }

    void routes() {
        server.Post(R"(/subjects/([^/]+)/versions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        auto entry = registry.register_schema(req.matches[1], req.body);
                        reply(res, 200, Document{{"id", entry.id.id}, {"version", entry.version}});
                    }));
        server.Get("/subjects", guarded([this](const httplib::Request&, httplib::Response& res) {
                       reply(res, 200, Document(registry.subjects()));
                   }));
        server.Get(R"(/subjects/([^/]+)/versions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       reply(res, 200, Document(registry.versions(req.matches[1])));
                   }));
        server.Get(R"(/subjects/([^/]+)/versions/([^/]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       std::string v = req.matches[2];
                       RegisteredSchema entry = v == "latest" ? registry.latest(req.matches[1])
                                                              : registry.get_version(req.matches[1], parse_id(v));
                       reply(res, 200, schema_entry(entry));
                   }));
        server.Get(R"(/schemas/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       reply(res, 200, schema_entry(registry.get_schema(parse_id(req.matches[1]))));
                   }));
        server.Get(R"(/config/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       reply(res, 200, Document{{"compatibility", to_string(registry.config(req.matches[1]))}});
                   }));
        server.Put(R"(/config/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       std::string name = string_field(body_document(req), "compatibility");
                       auto mode = parse_compatibility_mode(name);
                       if (!mode) {
                           throw ParseError("unknown compatibility mode '" + name + "'");
                       }
                       registry.set_config(req.matches[1], *mode);
                       reply(res, 200, Document{{"compatibility", to_string(*mode)}});
                   }));
        server.Post(R"(/compat/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        reply(res, 200, report_to_document(registry.check_compat(req.matches[1], req.body)));
                    }));
        server.Post("/mappings", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        Document body = body_document(req);
                        std::string engine_name =
                            body.is_object() && body.contains("engine") ? string_field(body, "engine") : "heuristic";
                        auto engine = parse_engine(engine_name);
                        if (!engine) {
                            throw ParseError("unknown engine '" + engine_name + "'");
                        }
                        std::optional<StlProgram> manual;
                        if (body.contains("program")) {
                            manual = body.at("program").is_string()
                                         ? parse_program(body.at("program").get<std::string>())
                                         : program_from_document(body.at("program"));
                        }
                        auto record = registry.create_mapping(id_field(body, "source_id"),
                                                              id_field(body, "target_id"), *engine, manual);
                        reply(res, 201, mapping_record_to_document(record));
                    }));
        server.Get(R"(/mappings/(\d+)/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto record = registry.get_mapping(parse_id(req.matches[1]), parse_id(req.matches[2]));
                       reply(res, 200, mapping_record_to_document(record));
                   }));
        server.Post(R"(/mappings/(\d+)/(\d+)/decision)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        std::string name = string_field(body_document(req), "decision");
                        auto decision = parse_decision(name);
                        if (!decision) {
                            throw ParseError("decision must be 'approve' or 'reject'");
                        }
                        auto record =
                            registry.decide_mapping(parse_id(req.matches[1]), parse_id(req.matches[2]), *decision);
                        reply(res, 200, mapping_record_to_document(record));
                    }));
        server.Post(R"(/mappings/(\d+)/(\d+)/compile)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        std::string backend = string_field(body_document(req), "backend");
                        auto src = parse_id(req.matches[1]);
                        auto tgt = parse_id(req.matches[2]);
                        auto record = registry.get_mapping(src, tgt);
                        auto artifact = compile(record.program, registry.get_schema(src).schema,
                                                registry.get_schema(tgt).schema, backend);
                        reply(res, 200,
                              Document{{"backend", artifact.backend_name},
                                       {"media_type", artifact.media_type},
                                       {"body", artifact.body}});
                    }));
        server.Post("/transform", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        if (!req.has_header("X-Consumer-Schema-Id")) {
                            throw ParseError("missing X-Consumer-Schema-Id header");
                        }
                        auto consumer = parse_id(req.get_header_value("X-Consumer-Schema-Id"));
                        res.status = 200;
                        res.set_content(registry.transform_framed(req.body, consumer), "application/octet-stream");
                    }));
    }
};

HttpService::HttpService(Registry& registry) : impl_(std::make_unique<Impl>(registry)) {}

HttpService::~HttpService() = default;

bool HttpService::listen(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int HttpService::bind_to_any_port(const std::string& host) {
    return impl_->server.bind_to_any_port(host);
}

bool HttpService::listen_after_bind() {
    return impl_->server.listen_after_bind();
}

void HttpService::wait_until_ready() const {
    impl_->server.wait_until_ready();
}

void HttpService::stop() {
    impl_->server.stop();
}

}  // namespace gse
