#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "modelmatch/card.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/extraction.hpp"

using namespace modelmatch;

namespace {

ModelCard fixture_card(const std::string& name) {
    std::ifstream in(std::string(MODELMATCH_FIXTURES_DIR) + "/cards/" + name + "/README.md",
                     std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto card = parse_card(buffer.str(), name);
    REQUIRE(card.ok());
    return card.value();
}

ModelCard tiny_card(const std::string& body) {
    auto card = parse_card(body, "tiny");
    REQUIRE(card.ok());
    return card.value();
}

}  // namespace

TEST_CASE("three few shot pairs ship with the binary") {
    auto shots = default_shots();
    REQUIRE(shots.size() == 3);
    for (const FewShotExample& shot : shots) {
        CHECK_FALSE(shot.input.empty());
        auto parsed = nlohmann::json::parse(shot.output, nullptr, false);
        CHECK(parsed.is_object());
    }
}

TEST_CASE("prompt layout is system, shot pairs, then the card") {
    auto prompt = build_extraction_prompt(tiny_card("A small spaniel detector."),
                                          default_shots());
    REQUIRE(prompt.messages.size() == 2 + 2 * default_shots().size());
    CHECK(prompt.messages.front().role == "system");
    for (std::size_t i = 0; i < default_shots().size(); ++i) {
        CHECK(prompt.messages[1 + 2 * i].role == "user");
        CHECK(prompt.messages[2 + 2 * i].role == "assistant");
    }
    CHECK(prompt.messages.back().role == "user");
    CHECK(prompt.messages.back().content.find("spaniel") != std::string::npos);
    CHECK_FALSE(prompt.truncated);
    CHECK(prompt.estimated_tokens > 0);
}

TEST_CASE("long cards are tail truncated on utf8 boundaries") {
    std::string body = "HEAD marker paragraph.\n\n";
    for (int i = 0; i < 3000; ++i) {
        body += "filler word ";
    }
    body += "caf\xc3\xa9";

    ExtractionOptions options;
    options.context_budget_tokens = 2048;
    auto prompt = build_extraction_prompt(tiny_card(body), default_shots(), options);
    CHECK(prompt.truncated);
    CHECK(prompt.messages.back().content.find("HEAD marker") != std::string::npos);
    CHECK(prompt.estimated_tokens <= options.context_budget_tokens);

    // Whatever was kept must still be valid UTF-8.
    for (const ChatMessage& message : prompt.messages) {
        CHECK(nlohmann::json(message.content).dump().size() > 0);
    }
}

TEST_CASE("coercion assigns per key default units to bare numbers") {
    CHECK(coerce_value(AttributeKey::parameter_size, nlohmann::json(125000000)) ==
          AttributeValue::quantity(125000000, "params"));
    CHECK(coerce_value(AttributeKey::model_size, nlohmann::json(500)) ==
          AttributeValue::quantity(500, "bytes"));
    CHECK(coerce_value(AttributeKey::training_cost, nlohmann::json(1200.5)) ==
          AttributeValue::quantity(1200.5, "usd"));
    CHECK(coerce_value(AttributeKey::inference_cost, nlohmann::json(2)) ==
          AttributeValue::quantity(2, "usd"));
    CHECK(coerce_value(AttributeKey::carbon_emitted, nlohmann::json(11)) ==
          AttributeValue::quantity(11, "kg"));
    CHECK(coerce_value(AttributeKey::evaluation, nlohmann::json(7)) ==
          AttributeValue::quantity(7, "count"));
}

TEST_CASE("coercion handles booleans, strings, arrays, objects, null") {
    CHECK(coerce_value(AttributeKey::fine_tuning, nlohmann::json(true)) ==
          AttributeValue::text("yes"));
    CHECK(coerce_value(AttributeKey::fine_tuning, nlohmann::json(false)) ==
          AttributeValue::text("no"));

    CHECK(coerce_value(AttributeKey::model_size, nlohmann::json("2.5 GB")) ==
          AttributeValue::quantity(2.5, "gb"));
    CHECK(coerce_value(AttributeKey::language, nlohmann::json("english, french")) ==
          AttributeValue::text_list({"english", "french"}));
    CHECK(coerce_value(AttributeKey::function, nlohmann::json("plain sentence")) ==
          AttributeValue::text("plain sentence"));

    CHECK(coerce_value(AttributeKey::dataset, nlohmann::json::array({"imdb", "sst2"})) ==
          AttributeValue::text_list({"imdb", "sst2"}));
    CHECK(coerce_value(AttributeKey::hyper_parameters,
                       nlohmann::json{{"lr", 0.001}})
              .kind() == ValueKind::text);
    CHECK(coerce_value(AttributeKey::grant, nlohmann::json()) == AttributeValue::absent());
    CHECK(coerce_value(AttributeKey::grant, nlohmann::json("  ")) ==
          AttributeValue::absent());
}

TEST_CASE("extraction parses a clean reply on the first attempt") {
    FixtureChatClient client;
    client.push_response(R"({
        "function": "classifies reviews",
        "base_model": "bert-base-uncased",
        "parameter_size": 11000000,
        "fine_tuning": true,
        "language": ["english"],
        "downloads": 999,
        "grant": null
    })");

    auto result = extract_metadata(tiny_card("some card"), client);
    REQUIRE(result.ok());
    const ExtractionResult& extraction = result.value();
    CHECK(extraction.schema_valid);
    CHECK(extraction.attempts == 1);
    CHECK(extraction.fields.at(AttributeKey::function) ==
          AttributeValue::text("classifies reviews"));
    CHECK(extraction.fields.at(AttributeKey::parameter_size).as_quantity().unit == "params");
    CHECK(extraction.fields.at(AttributeKey::fine_tuning) == AttributeValue::text("yes"));
    // downloads is a publicity key: never accepted from card extraction.
    CHECK(extraction.fields.count(AttributeKey::downloads) == 0);
    // null means the card does not say; the key is simply absent.
    CHECK(extraction.fields.count(AttributeKey::grant) == 0);
}

TEST_CASE("garbage replies trigger repair turns before succeeding") {
    FixtureChatClient client;
    client.push_response("I think the answer is roughly this:");
    client.push_response(R"({"function": "detects vehicles"})");

    auto result = extract_metadata(tiny_card("card"), client);
    REQUIRE(result.ok());
    CHECK(result.value().schema_valid);
    CHECK(result.value().attempts == 2);
    CHECK(client.call_count() == 2);
    CHECK(result.value().fields.at(AttributeKey::function).rendered() ==
          "detects vehicles");
}

TEST_CASE("repair exhaustion yields schema_valid false, not an error") {
    FixtureChatClient client;
    client.push_response("nope");
    client.push_response("still nope");
    client.push_response("never json");

    auto result = extract_metadata(tiny_card("card"), client);
    REQUIRE(result.ok());
    CHECK_FALSE(result.value().schema_valid);
    CHECK(result.value().fields.empty());
    CHECK(result.value().attempts == 3);
    CHECK(result.value().raw_response == "never json");
}

TEST_CASE("a reply with json embedded in prose still parses") {
    FixtureChatClient client;
    client.push_response("Here you go:\n{\"function\": \"ranks passages\"} hope that helps");
    auto result = extract_metadata(tiny_card("card"), client);
    REQUIRE(result.ok());
    CHECK(result.value().schema_valid);
    CHECK(result.value().fields.at(AttributeKey::function).rendered() == "ranks passages");
}

TEST_CASE("an impossible budget is a budget error") {
    FixtureChatClient client;
    ExtractionOptions options;
    options.context_budget_tokens = 10;  // smaller than the fixed prompt parts
    auto result = extract_metadata(tiny_card("card"), client, default_shots(), options);
    REQUIRE_FALSE(result.ok());
    CHECK(result.error().code == Errc::budget_exceeded);
    CHECK(client.call_count() == 0);
}

TEST_CASE("transport failures propagate as errors") {
    FixtureChatClient client;  // no canned responses at all
    auto result = extract_metadata(tiny_card("card"), client);
    REQUIRE_FALSE(result.ok());
    CHECK(result.error().code == Errc::not_found);
}

TEST_CASE("offline fallback mines links, lineage, and the lead paragraph") {
    ModelCard card = fixture_card("bert-mini-sentiment");
    ExtractionResult result = fallback_extract(card);
    CHECK(result.schema_valid);
    CHECK(result.attempts == 1);

    CHECK(result.fields.at(AttributeKey::github_repo).rendered() ==
          "https://github.com/example/bert-mini-sentiment");
    CHECK(result.fields.at(AttributeKey::report).rendered() ==
          "https://arxiv.org/abs/1910.01108");
    CHECK(result.fields.at(AttributeKey::base_model).rendered() == "bert-base-uncased");
    CHECK(result.fields.at(AttributeKey::fine_tuning).rendered() == "yes");
    CHECK(result.fields.at(AttributeKey::language).as_list() ==
          std::vector<std::string>{"english"});
    CHECK(result.fields.at(AttributeKey::dataset).as_list() ==
          std::vector<std::string>{"imdb"});

    std::string function = result.fields.at(AttributeKey::function).rendered();
    CHECK(function.find("Classifies short movie reviews") == 0);
    CHECK(function.find("quokkavine") != std::string::npos);
}

TEST_CASE("fallback leaves unrelated fields absent") {
    ExtractionResult result = fallback_extract(
        tiny_card("# bare\n\nNothing about training or links.\n"));
    CHECK(result.schema_valid);
    CHECK(result.fields.count(AttributeKey::github_repo) == 0);
    CHECK(result.fields.count(AttributeKey::base_model) == 0);
    CHECK(result.fields.count(AttributeKey::fine_tuning) == 0);
    CHECK(result.fields.at(AttributeKey::function).rendered() ==
          "Nothing about training or links.");
}

TEST_CASE("offline validation checks values against the card text") {
    ModelCard card = fixture_card("bert-mini-sentiment");
    ExtractionResult result = fallback_extract(card);

    auto verdicts = validate_extraction(card, result);
    REQUIRE(verdicts.ok());
    CHECK(verdicts.value().at(AttributeKey::github_repo) == SupportVerdict::supported);
    CHECK(verdicts.value().at(AttributeKey::function) == SupportVerdict::supported);

    result.fields[AttributeKey::copyright] = AttributeValue::text("totally invented holder");
    auto tainted = validate_extraction(card, result);
    REQUIRE(tainted.ok());
    CHECK(tainted.value().at(AttributeKey::copyright) == SupportVerdict::unknown);
}

TEST_CASE("validation refuses schema invalid extractions") {
    ExtractionResult bad;
    bad.schema_valid = false;
    auto verdicts = validate_extraction(fixture_card("canola-qa"), bad);
    REQUIRE_FALSE(verdicts.ok());
    CHECK(verdicts.error().code == Errc::invalid_argument);
}

TEST_CASE("llm validation maps per key verdict words") {
    ModelCard card = tiny_card("The reader answers questions.\n");
    ExtractionResult result;
    result.schema_valid = true;
    result.fields[AttributeKey::function] = AttributeValue::text("answers questions");
    result.fields[AttributeKey::base_model] = AttributeValue::text("made-up-model");

    FixtureChatClient client;
    client.push_response(R"({"function": "supported", "base_model": "unsupported"})");
    auto verdicts = validate_extraction(card, result, &client);
    REQUIRE(verdicts.ok());
    CHECK(verdicts.value().at(AttributeKey::function) == SupportVerdict::supported);
    CHECK(verdicts.value().at(AttributeKey::base_model) == SupportVerdict::unsupported);

    FixtureChatClient vague;
    vague.push_response("cannot say");
    vague.push_response("really cannot say");
    vague.push_response("final non-answer");
    auto fallback = validate_extraction(card, result, &vague);
    REQUIRE(fallback.ok());
    CHECK(fallback.value().at(AttributeKey::function) == SupportVerdict::unknown);
    CHECK(fallback.value().at(AttributeKey::base_model) == SupportVerdict::unknown);
}
