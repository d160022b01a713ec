#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelmatch/attributes.hpp"
#include "modelmatch/bm25.hpp"
#include "modelmatch/selection.hpp"

namespace modelmatch {

enum class SatisfactionLabel : std::uint8_t {
    full,
    partial,
    none,
};

std::string_view to_string(SatisfactionLabel label);

/// Labels one ranked candidate for one request.
using JudgeFn = std::function<SatisfactionLabel(const SearchRequest&, const ModelRecord&,
                                                const RankedMatch&)>;

/// Proxy for the human protocol, and labeled as such in reports: a requested
/// trivial field counts as satisfied when its normalized similarity reaches
/// `threshold`, a special field when its verdict is satisfied. full = all
/// requested fields satisfied, partial = at least one, none otherwise.
JudgeFn deterministic_judge(double threshold = 0.8);

struct EvalConfig {
    SelectionConfig selection;
    /// Drop every synthesis-origin record from the candidate pool (and
    /// rebuild the index over the remainder) before searching.
    bool exclude_origins = false;
    double judge_threshold = 0.8;
};

struct RequestOutcome {
    std::string request_id;
    std::vector<std::pair<std::string, SatisfactionLabel>> top;  // rank order
    std::size_t first_full_rank = 0;                             // 0 = no full hit
    bool any_partial = false;
};

struct EvalReport {
    std::vector<RequestOutcome> rows;  // sorted by request_id
    std::size_t requests = 0;
    std::size_t full_at_1 = 0;
    std::size_t full_at_3 = 0;
    std::size_t full_at_5 = 0;
    std::size_t full_at_10 = 0;
    std::size_t full = 0;  // full hit anywhere in the returned list
    std::size_t partial_only = 0;
    std::size_t miss = 0;
    nlohmann::json config_snapshot;
};

/// Runs every request through selection and aggregates the labels.
/// full + partial_only + miss always equals the request count, and the
/// full_at_k buckets are cumulative.
Result<EvalReport> run_benchmark(const std::vector<SearchRequest>& requests,
                                 const std::vector<ModelRecord>& corpus, const Bm25Index& index,
                                 const EvalConfig& config, const JudgeFn& judge,
                                 const ConstraintChecker& checker = {});

inline Result<EvalReport> run_benchmark(const std::vector<SearchRequest>& requests,
                                        const std::vector<ModelRecord>& corpus,
                                        const Bm25Index& index, const EvalConfig& config = {}) {
    return run_benchmark(requests, corpus, index, config,
                         deterministic_judge(config.judge_threshold));
}

nlohmann::json report_to_json(const EvalReport& report);

/// Plain-text summary: the four cumulative full buckets plus partial-only
/// and miss counts, each with a percentage.
std::string format_report(const EvalReport& report);

}  // namespace modelmatch
