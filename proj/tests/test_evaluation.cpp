#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "modelmatch/evaluation.hpp"

using namespace modelmatch;

namespace {

ModelRecord make_record(std::string name,
                        std::map<AttributeKey, AttributeValue> values) {
    ModelRecord record;
    record.registry_name = std::move(name);
    for (auto& [key, value] : values) {
        record.attributes[key] = AttributeEntry{std::move(value), {}};
    }
    return record;
}

SearchRequest make_request(std::string id,
                           std::map<AttributeKey, AttributeValue> values) {
    SearchRequest request;
    request.request_id = std::move(id);
    request.attributes = std::move(values);
    return request;
}

RankedMatch make_match(std::string name, std::vector<FieldScore> scores,
                       std::vector<ConstraintVerdict> verdicts) {
    RankedMatch match;
    match.registry_name = std::move(name);
    match.field_scores = std::move(scores);
    match.verdicts = std::move(verdicts);
    match.rank = 1;
    return match;
}

/// Four records whose function text overlaps the query phrase
/// "alpha beta gamma delta" in strictly decreasing amounts, so the rank
/// order is deterministic.
std::vector<ModelRecord> overlap_corpus() {
    return {
        make_record("r1", {{AttributeKey::function,
                            AttributeValue::text("alpha beta gamma delta")}}),
        make_record("r2", {{AttributeKey::function,
                            AttributeValue::text("alpha beta gamma quartz")}}),
        make_record("r3", {{AttributeKey::function,
                            AttributeValue::text("alpha beta quartz zephyr")}}),
        make_record("r4", {{AttributeKey::function,
                            AttributeValue::text("alpha quartz zephyr willow")}}),
    };
}

}  // namespace

TEST_CASE("satisfaction labels render") {
    CHECK(to_string(SatisfactionLabel::full) == "full");
    CHECK(to_string(SatisfactionLabel::partial) == "partial");
    CHECK(to_string(SatisfactionLabel::none) == "none");
}

TEST_CASE("deterministic judge labels by per-field satisfaction") {
    auto judge = deterministic_judge(0.8);
    auto request = make_request(
        "dev#1", {{AttributeKey::function, AttributeValue::text("summarizes text")},
                  {AttributeKey::license, AttributeValue::token("mit")}});
    ModelRecord record = make_record("cand", {});

    SUBCASE("all requested fields satisfied is full") {
        auto match = make_match(
            "cand", {{AttributeKey::function, 2.0, 2.2, 0.91}},
            {{AttributeKey::license, ConstraintOutcome::satisfied, "", CheckMethod::rule}});
        CHECK(judge(request, record, match) == SatisfactionLabel::full);
    }

    SUBCASE("one of two satisfied is partial") {
        auto match = make_match(
            "cand", {{AttributeKey::function, 2.0, 2.2, 0.91}},
            {{AttributeKey::license, ConstraintOutcome::unknown, "", CheckMethod::rule}});
        CHECK(judge(request, record, match) == SatisfactionLabel::partial);
    }

    SUBCASE("nothing satisfied is none") {
        auto match = make_match(
            "cand", {{AttributeKey::function, 0.5, 2.2, 0.23}},
            {{AttributeKey::license, ConstraintOutcome::violated, "x", CheckMethod::rule}});
        CHECK(judge(request, record, match) == SatisfactionLabel::none);
    }

    SUBCASE("threshold boundary is inclusive") {
        auto match = make_match(
            "cand", {{AttributeKey::function, 1.6, 2.0, 0.8}},
            {{AttributeKey::license, ConstraintOutcome::satisfied, "", CheckMethod::rule}});
        CHECK(judge(request, record, match) == SatisfactionLabel::full);
        match.field_scores[0].normalized = 0.7999;
        CHECK(judge(request, record, match) == SatisfactionLabel::partial);
    }

    SUBCASE("unknown verdict does not count as satisfied") {
        auto only_license =
            make_request("dev#2", {{AttributeKey::license, AttributeValue::token("mit")},
                                   {AttributeKey::task, AttributeValue::token("fill-mask")}});
        auto match = make_match(
            "cand", {{AttributeKey::task, 1.0, 1.0, 1.0}},
            {{AttributeKey::license, ConstraintOutcome::unknown, "", CheckMethod::fallback}});
        CHECK(judge(only_license, record, match) == SatisfactionLabel::partial);
    }

    SUBCASE("absent request slots are ignored") {
        auto padded = request;
        padded.attributes[AttributeKey::task] = AttributeValue::absent();
        auto match = make_match(
            "cand", {{AttributeKey::function, 2.0, 2.2, 0.91}},
            {{AttributeKey::license, ConstraintOutcome::satisfied, "", CheckMethod::rule}});
        CHECK(judge(padded, record, match) == SatisfactionLabel::full);
    }

    SUBCASE("missing field score counts as unsatisfied") {
        auto match = make_match(
            "cand", {},
            {{AttributeKey::license, ConstraintOutcome::satisfied, "", CheckMethod::rule}});
        CHECK(judge(request, record, match) == SatisfactionLabel::partial);
    }

    SUBCASE("custom threshold tightens the judgement") {
        auto strict = deterministic_judge(0.95);
        auto match = make_match(
            "cand", {{AttributeKey::function, 2.0, 2.2, 0.91}},
            {{AttributeKey::license, ConstraintOutcome::satisfied, "", CheckMethod::rule}});
        CHECK(strict(request, record, match) == SatisfactionLabel::partial);
    }
}

TEST_CASE("run_benchmark aggregates labels from a scripted judge") {
    auto corpus = overlap_corpus();
    auto index = build_index(corpus).value();

    JudgeFn scripted = [](const SearchRequest&, const ModelRecord& record,
                          const RankedMatch&) {
        if (record.registry_name == "r2") {
            return SatisfactionLabel::full;
        }
        if (record.registry_name == "r1" || record.registry_name == "r4") {
            return SatisfactionLabel::partial;
        }
        return SatisfactionLabel::none;
    };

    std::vector<SearchRequest> requests = {
        make_request("z#1", {{AttributeKey::function,
                              AttributeValue::text("alpha beta gamma delta")}}),
        make_request("a#1", {{AttributeKey::function,
                              AttributeValue::text("unrelated cormorant phrase")}}),
    };
    auto report = run_benchmark(requests, corpus, index, {}, scripted).value();

    CHECK(report.requests == 2);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].request_id == "a#1");
    CHECK(report.rows[1].request_id == "z#1");

    const RequestOutcome& hit = report.rows[1];
    REQUIRE(hit.top.size() == 4);
    CHECK(hit.top[0].first == "r1");
    CHECK(hit.top[0].second == SatisfactionLabel::partial);
    CHECK(hit.top[1].first == "r2");
    CHECK(hit.top[1].second == SatisfactionLabel::full);
    CHECK(hit.first_full_rank == 2);
    CHECK(hit.any_partial);

    const RequestOutcome& cold = report.rows[0];
    CHECK(cold.top.empty());
    CHECK(cold.first_full_rank == 0);
    CHECK_FALSE(cold.any_partial);

    CHECK(report.full_at_1 == 0);
    CHECK(report.full_at_3 == 1);
    CHECK(report.full_at_5 == 1);
    CHECK(report.full_at_10 == 1);
    CHECK(report.full == 1);
    CHECK(report.partial_only == 0);
    CHECK(report.miss == 1);
    CHECK(report.full + report.partial_only + report.miss == report.requests);
}

TEST_CASE("run_benchmark with the deterministic judge end to end") {
    std::vector<ModelRecord> corpus = {
        make_record("exact", {{AttributeKey::function,
                               AttributeValue::text("ranks reranks candidate passages")},
                              {AttributeKey::license, AttributeValue::token("mit")}}),
        make_record("loose", {{AttributeKey::function,
                               AttributeValue::text("ranks articles for feeds")},
                              {AttributeKey::license, AttributeValue::token("gpl-3.0")}}),
    };
    auto index = build_index(corpus).value();
    auto request = make_request(
        "dev#1", {{AttributeKey::function,
                   AttributeValue::text("ranks reranks candidate passages")},
                  {AttributeKey::license, AttributeValue::token("mit")}});

    auto report = run_benchmark({request}, corpus, index).value();
    REQUIRE(report.rows.size() == 1);
    const RequestOutcome& row = report.rows[0];
    REQUIRE_FALSE(row.top.empty());
    CHECK(row.top[0].first == "exact");
    CHECK(row.top[0].second == SatisfactionLabel::full);
    CHECK(row.first_full_rank == 1);
    CHECK(report.full_at_1 == 1);

    SUBCASE("a stricter judge threshold demotes inexact matches") {
        EvalConfig strict;
        strict.judge_threshold = 1.01;
        auto demoted = run_benchmark({request}, corpus, index, strict).value();
        CHECK(demoted.full_at_1 == 0);
        CHECK(demoted.full == 0);
    }
}

TEST_CASE("exclude_origins removes the origin record from the pool") {
    auto corpus = overlap_corpus();
    auto index = build_index(corpus).value();
    auto request = make_request(
        "r1#1",
        {{AttributeKey::function, AttributeValue::text("alpha beta gamma delta")}});
    request.origin.synthesized = SynthesisOrigin{"r1", {"free_text:function"}, 7};
    request.mutated_keys = {AttributeKey::function};

    EvalConfig keep;
    auto with_origin = run_benchmark({request}, corpus, index, keep).value();
    REQUIRE_FALSE(with_origin.rows[0].top.empty());
    CHECK(with_origin.rows[0].top[0].first == "r1");

    EvalConfig drop;
    drop.exclude_origins = true;
    auto without = run_benchmark({request}, corpus, index, drop).value();
    REQUIRE_FALSE(without.rows[0].top.empty());
    for (const auto& [name, label] : without.rows[0].top) {
        CHECK(name != "r1");
    }
    CHECK(without.rows[0].top[0].first == "r2");
}

TEST_CASE("run_benchmark rejects an empty request list") {
    auto corpus = overlap_corpus();
    auto index = build_index(corpus).value();
    auto report = run_benchmark({}, corpus, index);
    REQUIRE_FALSE(report.ok());
    CHECK(report.error().code == Errc::empty_requests);
}

TEST_CASE("report JSON carries rows and config") {
    auto corpus = overlap_corpus();
    auto index = build_index(corpus).value();
    auto request = make_request(
        "dev#1",
        {{AttributeKey::function, AttributeValue::text("alpha beta gamma delta")}});
    EvalConfig config;
    config.selection.top_k = 3;
    auto report = run_benchmark({request}, corpus, index, config).value();

    nlohmann::json encoded = report_to_json(report);
    CHECK(encoded["requests"] == 1);
    CHECK(encoded["full"].is_number_unsigned());
    CHECK(encoded["config"]["top_k"] == 3);
    CHECK(encoded["config"]["exclude_origins"] == false);
    CHECK(encoded["config"]["judge_threshold"] == doctest::Approx(0.8));
    REQUIRE(encoded["rows"].is_array());
    REQUIRE(encoded["rows"].size() == 1);
    const auto& row = encoded["rows"][0];
    CHECK(row["request_id"] == "dev#1");
    REQUIRE(row["top"].is_array());
    REQUIRE_FALSE(row["top"].empty());
    CHECK(row["top"][0]["rank"] == 1);
    CHECK(row["top"][0]["registry_name"] == "r1");
    CHECK(row["top"][0]["label"] == "full");
    CHECK(row["first_full_rank"] == 1);

    std::string text = format_report(report);
    CHECK(text.find("requests: 1") != std::string::npos);
    CHECK(text.find("full in top 1: 1 (100.0%)") != std::string::npos);
    CHECK(text.find("full in top 3:") != std::string::npos);
    CHECK(text.find("full in top 5:") != std::string::npos);
    CHECK(text.find("full in top 10:") != std::string::npos);
    CHECK(text.find("partial only: 0 (0.0%)") != std::string::npos);
    CHECK(text.find("miss: 0 (0.0%)") != std::string::npos);
}

TEST_CASE("full_at buckets stay cumulative over mixed outcomes") {
    auto corpus = overlap_corpus();
    auto index = build_index(corpus).value();

    JudgeFn fourth_only = [](const SearchRequest&, const ModelRecord& record,
                             const RankedMatch&) {
        return record.registry_name == "r4" ? SatisfactionLabel::full
                                            : SatisfactionLabel::none;
    };
    auto request = make_request(
        "dev#1",
        {{AttributeKey::function, AttributeValue::text("alpha beta gamma delta")}});
    auto report = run_benchmark({request}, corpus, index, {}, fourth_only).value();
    CHECK(report.rows[0].first_full_rank == 4);
    CHECK(report.full_at_1 == 0);
    CHECK(report.full_at_3 == 0);
    CHECK(report.full_at_5 == 1);
    CHECK(report.full_at_10 == 1);
    CHECK(report.full_at_1 <= report.full_at_3);
    CHECK(report.full_at_3 <= report.full_at_5);
    CHECK(report.full_at_5 <= report.full_at_10);
    CHECK(report.full_at_10 <= report.full);
}
