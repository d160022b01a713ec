#include "modelmatch/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace modelmatch {

namespace {

std::string percent(std::size_t count, std::size_t total) {
    double value = total == 0 ? 0.0 : 100.0 * static_cast<double>(count) /
                                          static_cast<double>(total);
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", value);
    return buffer;
}

nlohmann::json snapshot_config(const EvalConfig& config) {
    return {
        {"top_k", config.selection.top_k},
        {"sim_threshold", config.selection.sim_threshold},
        {"lazy_constraint_checking", config.selection.lazy_constraint_checking},
        {"unknown_handling", std::string(to_string(config.selection.policy.unknown_handling))},
        {"epsilon", config.selection.policy.epsilon},
        {"exclude_origins", config.exclude_origins},
        {"judge_threshold", config.judge_threshold},
    };
}

}  // namespace

std::string_view to_string(SatisfactionLabel label) {
    switch (label) {
        case SatisfactionLabel::full:
            return "full";
        case SatisfactionLabel::partial:
            return "partial";
        case SatisfactionLabel::none:
            return "none";
    }
    return "none";
}

JudgeFn deterministic_judge(double threshold) {
    return [threshold](const SearchRequest& request, const ModelRecord& record,
                       const RankedMatch& match) {
        (void)record;
        std::size_t requested = 0;
        std::size_t satisfied = 0;
        for (const auto& [key, value] : request.attributes) {
            if (value.is_absent()) {
                continue;
            }
            ++requested;
            if (is_special(key)) {
                auto it = std::find_if(match.verdicts.begin(), match.verdicts.end(),
                                       [key](const ConstraintVerdict& verdict) {
                                           return verdict.key == key;
                                       });
                if (it != match.verdicts.end() &&
                    it->outcome == ConstraintOutcome::satisfied) {
                    ++satisfied;
                }
            } else {
                auto it = std::find_if(match.field_scores.begin(), match.field_scores.end(),
                                       [key](const FieldScore& score) {
                                           return score.key == key;
                                       });
                if (it != match.field_scores.end() && it->normalized >= threshold) {
                    ++satisfied;
                }
            }
        }
        if (requested > 0 && satisfied == requested) {
            return SatisfactionLabel::full;
        }
        if (satisfied > 0) {
            return SatisfactionLabel::partial;
        }
        return SatisfactionLabel::none;
    };
}

Result<EvalReport> run_benchmark(const std::vector<SearchRequest>& requests,
                                 const std::vector<ModelRecord>& corpus, const Bm25Index& index,
                                 const EvalConfig& config, const JudgeFn& judge,
                                 const ConstraintChecker& checker) {
    if (requests.empty()) {
        return Result<EvalReport>::failure(Errc::empty_requests, "no requests to evaluate");
    }

    std::vector<ModelRecord> reduced;
    const std::vector<ModelRecord>* candidates = &corpus;
    Bm25Index rebuilt;
    const Bm25Index* scoring = &index;
    if (config.exclude_origins) {
        std::set<std::string> origins;
        for (const SearchRequest& request : requests) {
            if (request.origin.synthesized.has_value()) {
                origins.insert(request.origin.synthesized->origin_model);
            }
        }
        reduced.reserve(corpus.size());
        for (const ModelRecord& record : corpus) {
            if (origins.count(record.registry_name) == 0) {
                reduced.push_back(record);
            }
        }
        auto fresh = build_index(reduced, index.params);
        if (!fresh.ok()) {
            return fresh.error();
        }
        rebuilt = std::move(fresh).value();
        candidates = &reduced;
        scoring = &rebuilt;
    }

    std::map<std::string, const ModelRecord*> by_name;
    for (const ModelRecord& record : *candidates) {
        by_name.emplace(record.registry_name, &record);
    }
    const ConstraintChecker effective =
        checker ? checker : make_default_checker(config.selection.policy);

    EvalReport report;
    report.config_snapshot = snapshot_config(config);
    report.requests = requests.size();
    report.rows.reserve(requests.size());
    for (const SearchRequest& request : requests) {
        auto matches = select(request, *candidates, *scoring, config.selection, effective);
        if (!matches.ok()) {
            return matches.error();
        }
        RequestOutcome row;
        row.request_id = request.request_id;
        for (const RankedMatch& match : matches.value()) {
            const ModelRecord* record = by_name.at(match.registry_name);
            SatisfactionLabel label = judge(request, *record, match);
            row.top.emplace_back(match.registry_name, label);
            if (label == SatisfactionLabel::full && row.first_full_rank == 0) {
                row.first_full_rank = match.rank;
            }
            if (label == SatisfactionLabel::partial) {
                row.any_partial = true;
            }
        }
        report.rows.push_back(std::move(row));
    }
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const RequestOutcome& a, const RequestOutcome& b) {
                         return a.request_id < b.request_id;
                     });

    for (const RequestOutcome& row : report.rows) {
        if (row.first_full_rank >= 1) {
            ++report.full;
            report.full_at_1 += row.first_full_rank <= 1 ? 1 : 0;
            report.full_at_3 += row.first_full_rank <= 3 ? 1 : 0;
            report.full_at_5 += row.first_full_rank <= 5 ? 1 : 0;
            report.full_at_10 += row.first_full_rank <= 10 ? 1 : 0;
        } else if (row.any_partial) {
            ++report.partial_only;
        } else {
            ++report.miss;
        }
    }
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const RequestOutcome& row : report.rows) {
        nlohmann::json top = nlohmann::json::array();
        std::size_t rank = 0;
        for (const auto& [name, label] : row.top) {
            ++rank;
            top.push_back({{"rank", rank},
                           {"registry_name", name},
                           {"label", std::string(to_string(label))}});
        }
        rows.push_back({{"request_id", row.request_id},
                        {"top", std::move(top)},
                        {"first_full_rank", row.first_full_rank},
                        {"any_partial", row.any_partial}});
    }
    return {{"requests", report.requests},
            {"full_at_1", report.full_at_1},
            {"full_at_3", report.full_at_3},
            {"full_at_5", report.full_at_5},
            {"full_at_10", report.full_at_10},
            {"full", report.full},
            {"partial_only", report.partial_only},
            {"miss", report.miss},
            {"config", report.config_snapshot},
            {"rows", std::move(rows)}};
}

std::string format_report(const EvalReport& report) {
    std::string out;
    out += "requests: " + std::to_string(report.requests) + "\n";
    const std::pair<const char*, std::size_t> buckets[] = {
        {"full in top 1", report.full_at_1},
        {"full in top 3", report.full_at_3},
        {"full in top 5", report.full_at_5},
        {"full in top 10", report.full_at_10},
    };
    for (const auto& [label, count] : buckets) {
        out += std::string(label) + ": " + std::to_string(count) + " (" +
               percent(count, report.requests) + ")\n";
    }
    out += "partial only: " + std::to_string(report.partial_only) + " (" +
           percent(report.partial_only, report.requests) + ")\n";
    out += "miss: " + std::to_string(report.miss) + " (" +
           percent(report.miss, report.requests) + ")\n";
    return out;
}

}  // namespace modelmatch
