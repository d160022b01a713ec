#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "modelmatch/service.hpp"

using namespace modelmatch;

namespace {

ModelRecord make_record(std::string name, std::string function, std::string license) {
    ModelRecord record;
    record.registry_name = std::move(name);
    record.attributes[AttributeKey::function] =
        AttributeEntry{AttributeValue::text(std::move(function)), {}};
    if (!license.empty()) {
        record.attributes[AttributeKey::license] =
            AttributeEntry{AttributeValue::token(std::move(license)), {}};
    }
    return record;
}

std::vector<ModelRecord> demo_corpus() {
    return {
        make_record("aster", "labels support tickets by urgency", "mit"),
        make_record("briar", "labels images of houseplants", "gpl-3.0"),
        make_record("clover", "transcribes meeting audio", "apache-2.0"),
    };
}

SearchService make_service() {
    SelectionConfig config;
    return SearchService(config, make_default_checker(config.policy));
}

std::string search_body(const std::string& function, const std::string& license) {
    nlohmann::json attributes = {
        {"function", {{"value_kind", "text"}, {"value", function}}},
    };
    if (!license.empty()) {
        attributes["license"] = {{"value_kind", "token"}, {"value", license}};
    }
    return nlohmann::json{{"request_id", "dev#1"}, {"attributes", attributes}}.dump();
}

}  // namespace

TEST_CASE("service reports loading state before a corpus arrives") {
    auto service = make_service();
    CHECK_FALSE(service.loaded());

    auto health = service.handle_health();
    CHECK(health.status == 503);
    CHECK(nlohmann::json::parse(health.body)["status"] == "loading");

    CHECK(service.handle_model("aster").status == 503);
    CHECK(service.handle_search(search_body("anything", "")).status == 503);
}

TEST_CASE("load validates the snapshot") {
    auto service = make_service();

    SUBCASE("empty corpus is refused") {
        auto outcome = service.load({}, Bm25Index{});
        REQUIRE_FALSE(outcome.ok());
        CHECK(outcome.error().code == Errc::empty_corpus);
        CHECK_FALSE(service.loaded());
    }

    SUBCASE("index naming a foreign document is refused") {
        auto corpus = demo_corpus();
        auto stale = demo_corpus();
        stale.push_back(make_record("dandelion", "does something else", ""));
        auto index = build_index(stale).value();
        auto outcome = service.load(corpus, std::move(index));
        REQUIRE_FALSE(outcome.ok());
        CHECK(outcome.error().code == Errc::unknown_doc);
    }
}

TEST_CASE("loaded service answers health, model, and search") {
    auto service = make_service();
    auto corpus = demo_corpus();
    auto index = build_index(corpus).value();
    REQUIRE(service.load(corpus, std::move(index)).ok());
    CHECK(service.loaded());

    SUBCASE("health carries corpus counts") {
        auto health = service.handle_health();
        CHECK(health.status == 200);
        auto body = nlohmann::json::parse(health.body);
        CHECK(body["status"] == "ok");
        CHECK(body["models"] == 3);
        CHECK(body["fields"].get<std::size_t>() >= 1);
    }

    SUBCASE("model lookup returns the stored record") {
        auto reply = service.handle_model("briar");
        CHECK(reply.status == 200);
        auto body = nlohmann::json::parse(reply.body);
        CHECK(body["registry_name"] == "briar");
        CHECK(body["attributes"].contains("license"));
    }

    SUBCASE("unknown model is a 404") {
        auto reply = service.handle_model("nonesuch");
        CHECK(reply.status == 404);
        auto body = nlohmann::json::parse(reply.body);
        CHECK(std::string(body["error"]).find("nonesuch") != std::string::npos);
    }

    SUBCASE("search ranks and carries verdicts") {
        auto reply = service.handle_search(search_body("labels support tickets", "mit"));
        CHECK(reply.status == 200);
        auto body = nlohmann::json::parse(reply.body);
        REQUIRE(body["matches"].is_array());
        REQUIRE_FALSE(body["matches"].empty());
        const auto& best = body["matches"][0];
        CHECK(best["registry_name"] == "aster");
        CHECK(best["rank"] == 1);
        CHECK(best["similarity"].get<double>() > 0.0);
        REQUIRE(best["verdicts"].is_array());
        REQUIRE(best["verdicts"].size() == 1);
        CHECK(best["verdicts"][0]["key"] == "license");
        CHECK(best["verdicts"][0]["outcome"] == "satisfied");
        CHECK(best["verdicts"][0]["method"] == "rule");

        for (const auto& match : body["matches"]) {
            CHECK(match["registry_name"] != "briar");
        }
    }

    SUBCASE("malformed JSON body is a 400") {
        auto reply = service.handle_search("{not json");
        CHECK(reply.status == 400);
        auto body = nlohmann::json::parse(reply.body);
        CHECK(std::string(body["error"]).find("JSON") != std::string::npos);
    }

    SUBCASE("structurally wrong request is a 400") {
        auto reply = service.handle_search(R"({"attributes": 17})");
        CHECK(reply.status == 400);
    }

    SUBCASE("request without trivial fields is a 400") {
        nlohmann::json body = {
            {"request_id", "dev#2"},
            {"attributes",
             {{"license", {{"value_kind", "token"}, {"value", "mit"}}}}},
        };
        auto reply = service.handle_search(body.dump());
        CHECK(reply.status == 400);
    }

    SUBCASE("a fresh load swaps the snapshot atomically") {
        std::vector<ModelRecord> next = {
            make_record("dahlia", "answers questions about gardening", "mit"),
        };
        auto next_index = build_index(next).value();
        REQUIRE(service.load(next, std::move(next_index)).ok());
        auto health = nlohmann::json::parse(service.handle_health().body);
        CHECK(health["models"] == 1);
        CHECK(service.handle_model("aster").status == 404);
        CHECK(service.handle_model("dahlia").status == 200);
    }
}

TEST_CASE("service server answers over HTTP") {
    auto service = make_service();
    auto corpus = demo_corpus();
    auto index = build_index(corpus).value();
    REQUIRE(service.load(corpus, std::move(index)).ok());

    ServiceServer server(service);
    auto port = server.start("127.0.0.1", 0);
    REQUIRE(port.ok());
    REQUIRE(port.value() > 0);

    httplib::Client client("127.0.0.1", port.value());
    client.set_connection_timeout(5);
    client.set_read_timeout(5);

    auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(nlohmann::json::parse(health->body)["status"] == "ok");

    auto model = client.Get("/models/clover");
    REQUIRE(model);
    CHECK(model->status == 200);
    CHECK(nlohmann::json::parse(model->body)["registry_name"] == "clover");

    auto missing = client.Get("/models/never-built");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    auto search = client.Post("/search", search_body("transcribes meeting audio", ""),
                              "application/json");
    REQUIRE(search);
    CHECK(search->status == 200);
    auto matches = nlohmann::json::parse(search->body)["matches"];
    REQUIRE_FALSE(matches.empty());
    CHECK(matches[0]["registry_name"] == "clover");

    auto bad = client.Post("/search", "%%%", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    server.stop();
    server.stop();  // idempotent
    server.wait();
}
