#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>

#include "modelmatch/attributes.hpp"

using namespace modelmatch;

TEST_CASE("key partitions cover the template exactly") {
    CHECK(all_attribute_keys().size() == kAttributeCount);
    CHECK(literature_attribute_keys().size() == kLiteratureAttributeCount);
    CHECK(special_attribute_keys().size() == kSpecialAttributeCount);
    // 26 literature + 9 publicity keys overlap on dataset and framework,
    // leaving 33 distinct attributes.
    CHECK(publicity_attribute_keys().size() == 9);

    std::set<AttributeKey> all(all_attribute_keys().begin(), all_attribute_keys().end());
    CHECK(all.size() == kAttributeCount);

    std::set<AttributeKey> literature(literature_attribute_keys().begin(),
                                      literature_attribute_keys().end());
    std::set<AttributeKey> publicity(publicity_attribute_keys().begin(),
                                     publicity_attribute_keys().end());
    std::set<AttributeKey> split = literature;
    split.insert(publicity.begin(), publicity.end());
    CHECK(split == all);

    std::set<AttributeKey> overlap;
    for (AttributeKey key : publicity) {
        if (literature.count(key) != 0) {
            overlap.insert(key);
        }
    }
    CHECK(overlap == std::set<AttributeKey>{AttributeKey::dataset, AttributeKey::framework});

    std::set<AttributeKey> trivial(trivial_attribute_keys().begin(),
                                   trivial_attribute_keys().end());
    for (AttributeKey key : special_attribute_keys()) {
        CHECK(is_special(key));
        CHECK(trivial.count(key) == 0);
        CHECK(all.count(key) == 1);
    }
    CHECK(trivial.size() + kSpecialAttributeCount == kAttributeCount);
}

TEST_CASE("the nine special attributes are the documented set") {
    std::set<std::string> names;
    for (AttributeKey key : special_attribute_keys()) {
        names.insert(std::string(to_string(key)));
    }
    CHECK(names == std::set<std::string>{"license", "copyright", "hardware", "software",
                                         "training_cost", "inference_cost", "limitation",
                                         "biases", "model_size"});
}

TEST_CASE("attribute names round trip") {
    for (AttributeKey key : all_attribute_keys()) {
        auto back = attribute_key_from(to_string(key));
        REQUIRE(back.has_value());
        CHECK(*back == key);
    }
    CHECK_FALSE(attribute_key_from("not_a_key").has_value());
    CHECK_FALSE(attribute_key_from("").has_value());
}

TEST_CASE("parse_quantity accepts number plus optional unit word") {
    auto q = parse_quantity("7");
    REQUIRE(q.has_value());
    CHECK(q->amount == doctest::Approx(7.0));
    CHECK(q->unit == "");

    q = parse_quantity("3.5 GB");
    REQUIRE(q.has_value());
    CHECK(q->amount == doctest::Approx(3.5));
    CHECK(q->unit == "gb");

    q = parse_quantity("1,200,000 params");
    REQUIRE(q.has_value());
    CHECK(q->amount == doctest::Approx(1200000.0));
    CHECK(q->unit == "params");

    q = parse_quantity("0 usd");
    REQUIRE(q.has_value());
    CHECK(q->amount == doctest::Approx(0.0));
}

TEST_CASE("parse_quantity rejects everything else") {
    CHECK_FALSE(parse_quantity("").has_value());
    CHECK_FALSE(parse_quantity("abc").has_value());
    CHECK_FALSE(parse_quantity("-4").has_value());
    CHECK_FALSE(parse_quantity("about 7").has_value());
    CHECK_FALSE(parse_quantity("7 giga bytes").has_value());
}

TEST_CASE("attribute values expose kind and rendering") {
    auto text = AttributeValue::text("Hello World");
    CHECK(text.kind() == ValueKind::text);
    CHECK(text.rendered() == "Hello World");

    auto token = AttributeValue::token("Apache 2.0");
    CHECK(token.kind() == ValueKind::token);
    CHECK(token.rendered() == "apache-2.0");

    auto quantity = AttributeValue::quantity(2000, "count");
    CHECK(quantity.kind() == ValueKind::quantity);
    CHECK(quantity.rendered() == "2000 count");
    CHECK(AttributeValue::quantity(3.5, "gb").rendered() == "3.5 gb");
    CHECK(AttributeValue::quantity(5, "").rendered() == "5");

    auto list = AttributeValue::text_list({"english", "french"});
    CHECK(list.kind() == ValueKind::text_list);
    CHECK(list.rendered() == "english french");

    CHECK(AttributeValue::absent().is_absent());
    CHECK(AttributeValue().is_absent());
    CHECK(AttributeValue::absent().rendered() == "");
}

TEST_CASE("normalize_token folds case and punctuation but keeps dots") {
    CHECK(normalize_token("Apache 2.0") == "apache-2.0");
    CHECK(normalize_token("  GPL__3.0 ") == "gpl-3.0");
    CHECK(normalize_token("text-classification") == "text-classification");
    CHECK(normalize_token("MIT") == "mit");
    CHECK(normalize_token("") == "");
}

TEST_CASE("record find skips absent values") {
    ModelRecord record;
    record.registry_name = "m";
    record.attributes[AttributeKey::function] = {AttributeValue::text("ranks things"), {}};
    record.attributes[AttributeKey::license] = {AttributeValue::absent(), {}};

    CHECK(record.find(AttributeKey::function) != nullptr);
    CHECK(record.find(AttributeKey::license) == nullptr);
    CHECK(record.find(AttributeKey::task) == nullptr);
}

TEST_CASE("partition splits request keys by the special list") {
    SearchRequest request;
    request.attributes[AttributeKey::function] = AttributeValue::text("summarizes articles");
    request.attributes[AttributeKey::license] = AttributeValue::token("mit");
    request.attributes[AttributeKey::model_size] = AttributeValue::quantity(2, "gb");
    request.attributes[AttributeKey::task] = AttributeValue::token("summarization");
    request.attributes[AttributeKey::domain] = AttributeValue::absent();

    auto partition = partition_attributes(request);
    CHECK(partition.trivial ==
          std::set<AttributeKey>{AttributeKey::function, AttributeKey::task});
    CHECK(partition.special ==
          std::set<AttributeKey>{AttributeKey::license, AttributeKey::model_size});
}

TEST_CASE("validate_request_shape requires a trivial attribute") {
    SearchRequest request;
    request.request_id = "r";
    CHECK_FALSE(validate_request_shape(request).ok());

    request.attributes[AttributeKey::license] = AttributeValue::token("mit");
    auto only_special = validate_request_shape(request);
    REQUIRE_FALSE(only_special.ok());
    CHECK(only_special.error().code == Errc::no_trivial_fields);

    request.attributes[AttributeKey::function] = AttributeValue::text("detects vehicles");
    CHECK(validate_request_shape(request).ok());
}

TEST_CASE("consolidation prefers publicity values and marks them") {
    std::map<AttributeKey, AttributeValue> literature;
    literature[AttributeKey::dataset] = AttributeValue::text_list({"imdb"});
    literature[AttributeKey::function] = AttributeValue::text("classifies reviews");

    std::map<AttributeKey, AttributeValue> publicity;
    publicity[AttributeKey::dataset] = AttributeValue::text_list({"imdb", "sst2"});
    publicity[AttributeKey::downloads] = AttributeValue::quantity(10, "count");

    auto merged = consolidate_fields(literature, Extractor::llm, publicity);

    REQUIRE(merged.count(AttributeKey::dataset) == 1);
    CHECK(merged[AttributeKey::dataset].value.as_list().size() == 2);
    CHECK(merged[AttributeKey::dataset].provenance.source == Source::consolidated);

    CHECK(merged[AttributeKey::function].provenance.source == Source::card_extracted);
    CHECK(merged[AttributeKey::function].provenance.extractor == Extractor::llm);
    CHECK(merged[AttributeKey::downloads].provenance.source == Source::publicity_tag);
}

TEST_CASE("record validation flags type invariant breaks") {
    ModelRecord record;
    record.registry_name = "m";
    record.attributes[AttributeKey::model_size] = {AttributeValue::quantity(-1, "gb"), {}};
    auto issues = validate_record(record);
    CHECK_FALSE(issues.empty());

    ModelRecord ok;
    ok.registry_name = "m2";
    ok.attributes[AttributeKey::model_size] = {AttributeValue::quantity(1, "gb"), {}};
    ok.attributes[AttributeKey::function] = {AttributeValue::text("does things"), {}};
    CHECK(validate_record(ok).empty());

    ModelRecord unnamed;
    CHECK_FALSE(validate_record(unnamed).empty());
}

TEST_CASE("value json codec round trips every kind") {
    const AttributeValue values[] = {
        AttributeValue::text("free text"),
        AttributeValue::token("mit"),
        AttributeValue::quantity(1.5, "gb"),
        AttributeValue::text_list({"a", "b"}),
        AttributeValue::absent(),
    };
    for (const AttributeValue& value : values) {
        auto back = value_from_json(value_to_json(value));
        REQUIRE(back.ok());
        CHECK(back.value() == value);
    }
    CHECK_FALSE(value_from_json(nlohmann::json::array()).ok());
    CHECK_FALSE(value_from_json(nlohmann::json{{"value_kind", "nope"}, {"value", 1}}).ok());
}

TEST_CASE("record json codec round trips with provenance") {
    ModelRecord record;
    record.registry_name = "demo";
    record.card_digest = "abc123";
    record.attributes[AttributeKey::function] = {
        AttributeValue::text("segments scenes"),
        {Source::card_extracted, Extractor::heuristic}};
    record.attributes[AttributeKey::downloads] = {
        AttributeValue::quantity(42, "count"), {Source::publicity_tag, Extractor::manual}};

    auto back = record_from_json(record_to_json(record));
    REQUIRE(back.ok());
    CHECK(back.value() == record);
}

TEST_CASE("request json codec keeps origin and mutation info") {
    SearchRequest request;
    request.request_id = "origin#1";
    request.attributes[AttributeKey::function] = AttributeValue::text("translates manuals");
    request.attributes[AttributeKey::license] = AttributeValue::token("mit");
    request.origin.synthesized = SynthesisOrigin{"origin", {"closed_set:license"}, 42};
    request.mutated_keys = {AttributeKey::license};

    auto back = request_from_json(request_to_json(request));
    REQUIRE(back.ok());
    CHECK(back.value() == request);

    SearchRequest developer;
    developer.request_id = "dev#1";
    developer.attributes[AttributeKey::function] = AttributeValue::text("ranks results");
    auto dev_back = request_from_json(request_to_json(developer));
    REQUIRE(dev_back.ok());
    CHECK_FALSE(dev_back.value().origin.is_synthesized());
}
