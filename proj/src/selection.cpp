#include "modelmatch/selection.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace modelmatch {

namespace {

std::string fixed4(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

struct Candidate {
    const ModelRecord* record = nullptr;
    double similarity = 0.0;
    std::vector<FieldScore> field_scores;
};

}  // namespace

ConstraintChecker make_default_checker(ConstraintPolicy policy, ChatClient* client) {
    return [policy, client](AttributeKey key, const AttributeValue& required,
                            const ModelRecord& record) -> Result<ConstraintVerdict> {
        const AttributeValue* found = record.find(key);
        const AttributeValue candidate = found ? *found : AttributeValue::absent();
        auto verdict = check_special(key, required, candidate, client, policy);
        if (!verdict.ok() && verdict.code() == Errc::unit_mismatch) {
            ConstraintVerdict mismatch;
            mismatch.key = key;
            mismatch.outcome = ConstraintOutcome::unknown;
            mismatch.method = CheckMethod::rule;
            mismatch.rationale = verdict.error().message;
            return mismatch;
        }
        return verdict;
    };
}

Result<std::vector<RankedMatch>> select(const SearchRequest& request,
                                        const std::vector<ModelRecord>& corpus,
                                        const Bm25Index& index, const SelectionConfig& config,
                                        const ConstraintChecker& checker) {
    using Matches = std::vector<RankedMatch>;
    if (corpus.empty()) {
        return Result<Matches>::failure(Errc::empty_corpus, "no candidates to select from");
    }
    if (config.top_k == 0) {
        return Result<Matches>::failure(Errc::invalid_argument, "top_k must be at least 1");
    }

    std::vector<Candidate> candidates;
    candidates.reserve(corpus.size());
    for (const ModelRecord& record : corpus) {
        auto scores = field_similarities(index, request, record.registry_name);
        if (!scores.ok()) {
            return scores.error();
        }
        double sum = 0.0;
        for (const FieldScore& score : scores.value()) {
            sum += score.normalized;
        }
        double similarity =
            std::clamp(sum / static_cast<double>(scores.value().size()), 0.0, 1.0);
        if (similarity > config.sim_threshold) {
            candidates.push_back({&record, similarity, std::move(scores).value()});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) {
            return a.similarity > b.similarity;
        }
        return a.record->registry_name < b.record->registry_name;
    });

    const KeyPartition partition = partition_attributes(request);
    Matches survivors;
    for (const Candidate& candidate : candidates) {
        if (config.lazy_constraint_checking && survivors.size() == config.top_k) {
            break;
        }
        std::vector<ConstraintVerdict> verdicts;
        bool excluded = false;
        for (AttributeKey key : partition.special) {
            const AttributeValue* required = request.find(key);
            auto verdict = checker(key, *required, *candidate.record);
            if (!verdict.ok()) {
                return verdict.error();
            }
            verdicts.push_back(verdict.value());
            const ConstraintOutcome outcome = verdict.value().outcome;
            if (outcome == ConstraintOutcome::violated ||
                (outcome == ConstraintOutcome::unknown &&
                 config.policy.unknown_handling == UnknownHandling::treat_as_violated)) {
                excluded = true;
                break;
            }
        }
        if (excluded) {
            continue;
        }
        RankedMatch match;
        match.registry_name = candidate.record->registry_name;
        match.similarity = candidate.similarity;
        match.field_scores = candidate.field_scores;
        match.verdicts = std::move(verdicts);
        survivors.push_back(std::move(match));
    }
    if (survivors.size() > config.top_k) {
        survivors.resize(config.top_k);
    }
    for (std::size_t i = 0; i < survivors.size(); ++i) {
        survivors[i].rank = i + 1;
    }
    return survivors;
}

std::string explain(const RankedMatch& match) {
    std::ostringstream out;
    out << match.registry_name << " (rank " << match.rank << ")\n";
    out << "similarity: " << fixed4(match.similarity) << "\n";
    out << "field contributions:\n";
    for (const FieldScore& score : match.field_scores) {
        out << "  " << to_string(score.key) << ": " << fixed4(score.normalized) << " (raw "
            << fixed4(score.raw) << ", self " << fixed4(score.self_score) << ")\n";
    }
    if (match.verdicts.empty()) {
        out << "constraints: no special constraints\n";
    } else {
        out << "constraints:\n";
        for (const ConstraintVerdict& verdict : match.verdicts) {
            out << "  " << to_string(verdict.key) << ": " << to_string(verdict.outcome)
                << " via " << to_string(verdict.method);
            if (!verdict.rationale.empty()) {
                out << " (" << verdict.rationale << ")";
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace modelmatch
