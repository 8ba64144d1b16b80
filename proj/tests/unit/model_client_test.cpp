#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "gse/error.hpp"
#include "gse/model_client.hpp"
#include "gse/planner.hpp"
#include "printers.hpp"

namespace gse {
namespace {

TEST(ToolCatalog, OneToolPerCommandMatchFirst) {
    const auto& tools = stl_tool_catalog();
    ASSERT_EQ(tools.size(), 13u);
    EXPECT_EQ(tools[0].name, "match");
    for (const auto& t : tools) {
        EXPECT_FALSE(t.description.empty()) << t.name;
        EXPECT_EQ(t.parameters.at("type"), "object") << t.name;
    }
}

TEST(Scripted, RepeatsLastResponse) {
    ScriptedModelClient client({{ToolInvocation{"match", Document::object()}}, {}});
    EXPECT_EQ(client.submit("a", {}).size(), 1u);
    EXPECT_EQ(client.submit("b", {}).size(), 0u);
    EXPECT_EQ(client.submit("c", {}).size(), 0u);
    EXPECT_EQ(client.prompts(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Scripted, RejectsBadTranscript) {
    EXPECT_THROW(ScriptedModelClient::from_document(Document{{"responses", 3}}), Error);
    EXPECT_THROW(ScriptedModelClient::from_file("/nonexistent/transcript.json"), Error);
}

TEST(HttpClient, RequestBodyShape) {
    HttpModelClient client("http://localhost/v1/chat/completions", "k", "m");
    Document body = client.request_body("hello", stl_tool_catalog());
    EXPECT_EQ(body["model"], "m");
    EXPECT_EQ(body["messages"][0]["content"], "hello");
    EXPECT_EQ(body["tools"].size(), stl_tool_catalog().size());
    EXPECT_EQ(body["tools"][0]["function"]["name"], "match");
}

TEST(HttpClient, ParsesToolCalls) {
    Document body = Document::parse(R"({"choices":[{"message":{"tool_calls":[
        {"function":{"name":"match","arguments":"{\"same_entity\":true}"}},
        {"function":{"name":"rename","arguments":"{not json"}}]}}]})");
    auto calls = HttpModelClient::parse_response(body);
    ASSERT_EQ(calls.size(), 2u);
    EXPECT_EQ(calls[0].arguments["same_entity"], true);
    EXPECT_TRUE(calls[1].arguments.is_string());
    EXPECT_THROW(HttpModelClient::parse_response(Document::object()), ProtocolError);
}

TEST(HttpClient, TalksToEndpoint) {
    httplib::Server server;
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        auto reply = R"({"choices":[{"message":{"tool_calls":[
            {"function":{"name":"match","arguments":"{\"same_entity\":true}"}},
            {"function":{"name":"rename","arguments":"{\"source\":\"motion\",\"target\":\"movement\"}"}}]}}]})";
        res.set_content(reply, "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::string origin = "http://127.0.0.1:" + std::to_string(port);
    HttpModelClient client(origin + "/v1/chat/completions", "secret", "m");
    Schema s = parse_schema("subject: m\nversion: 2\nfields:\n  - {name: motion, type: boolean}\n");
    Schema t = parse_schema("subject: m\nversion: 1\nfields:\n  - {name: movement, type: boolean}\n");
    PlanResult r = plan_with_model(client, s, t);
    EXPECT_TRUE(r.diagnostics.empty());
    EXPECT_EQ(seen_auth, "Bearer secret");

    HttpModelClient broken(origin + "/broken", "", "m");
    EXPECT_THROW(broken.submit("x", {}), TransportError);
    server.stop();
    thread.join();

    HttpModelClient unreachable(origin + "/v1/chat/completions", "", "m");
    EXPECT_THROW(unreachable.submit("x", {}), TransportError);
    HttpModelClient no_scheme("localhost/x", "", "m");
    EXPECT_THROW(no_scheme.submit("x", {}), TransportError);
}

}  // namespace
}  // namespace gse
