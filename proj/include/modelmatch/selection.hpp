#pragma once

#include <functional>
#include <string>
#include <vector>

#include "modelmatch/attributes.hpp"
#include "modelmatch/bm25.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/constraints.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

struct SelectionConfig {
    std::size_t top_k = 10;
    double sim_threshold = 0.0;
    bool lazy_constraint_checking = true;
    ConstraintPolicy policy;
};

struct RankedMatch {
    std::string registry_name;
    double similarity = 0.0;
    std::vector<FieldScore> field_scores;
    std::vector<ConstraintVerdict> verdicts;
    std::size_t rank = 0;  // 1-based
};

/// Evaluates one special attribute of the request against a candidate
/// record. Pluggable so tests can substitute scripted checkers.
using ConstraintChecker = std::function<Result<ConstraintVerdict>(
    AttributeKey, const AttributeValue&, const ModelRecord&)>;

/// check_special over the bundled license table. Unit mismatches surface as
/// unknown verdicts rather than hard errors so one odd record cannot sink a
/// whole search.
ConstraintChecker make_default_checker(ConstraintPolicy policy, ChatClient* client = nullptr);

/// Ranks every candidate by request similarity, drops those at or below
/// sim_threshold, filters on special constraints (checking candidates in
/// descending-similarity order and stopping at top_k survivors when lazy,
/// else checking all), and returns at most top_k matches sorted by
/// similarity descending with alphabetical tie-break. Lazy and eager modes
/// agree for any deterministic checker.
Result<std::vector<RankedMatch>> select(const SearchRequest& request,
                                        const std::vector<ModelRecord>& corpus,
                                        const Bm25Index& index, const SelectionConfig& config,
                                        const ConstraintChecker& checker);

/// Deterministic multi-line report: similarity, per-field contributions,
/// and each constraint verdict with its rationale.
std::string explain(const RankedMatch& match);

}  // namespace modelmatch
