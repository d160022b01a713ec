#include "modelmatch/constraints.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <utility>

#include "modelmatch/assets.hpp"
#include "modelmatch/bm25.hpp"
#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

constexpr std::string_view kVerdictRepair =
    "Reply with exactly one of satisfied, violated, or unknown, followed by a colon and a "
    "one-sentence rationale.";

std::string render_quantity(const Quantity& quantity) {
    std::string text = AttributeValue::quantity(quantity.amount, quantity.unit).rendered();
    while (!text.empty() && text.back() == ' ') {
        text.pop_back();
    }
    return text;
}

struct UnitScale {
    std::string_view family;
    double factor;
};

std::optional<UnitScale> unit_scale(const std::string& unit) {
    static const std::map<std::string_view, UnitScale> kTable = {
        {"", {"count", 1.0}},
        {"count", {"count", 1.0}},
        {"counts", {"count", 1.0}},
        {"b", {"bytes", 1.0}},
        {"byte", {"bytes", 1.0}},
        {"bytes", {"bytes", 1.0}},
        {"kb", {"bytes", 1e3}},
        {"mb", {"bytes", 1e6}},
        {"gb", {"bytes", 1e9}},
        {"tb", {"bytes", 1e12}},
        {"kib", {"bytes", 1024.0}},
        {"mib", {"bytes", 1024.0 * 1024.0}},
        {"gib", {"bytes", 1024.0 * 1024.0 * 1024.0}},
        {"param", {"params", 1.0}},
        {"params", {"params", 1.0}},
        {"parameter", {"params", 1.0}},
        {"parameters", {"params", 1.0}},
        {"usd", {"usd", 1.0}},
        {"dollar", {"usd", 1.0}},
        {"dollars", {"usd", 1.0}},
        {"h", {"hours", 1.0}},
        {"hr", {"hours", 1.0}},
        {"hrs", {"hours", 1.0}},
        {"hour", {"hours", 1.0}},
        {"hours", {"hours", 1.0}},
        {"gpu", {"gpus", 1.0}},
        {"gpus", {"gpus", 1.0}},
        {"cpu", {"cpus", 1.0}},
        {"cpus", {"cpus", 1.0}},
    };
    auto it = kTable.find(to_lower_ascii(unit));
    if (it == kTable.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::set<std::string> term_set(const AttributeValue& value) {
    std::vector<std::string> tokens = tokenize(value.rendered());
    return {tokens.begin(), tokens.end()};
}

std::optional<ConstraintOutcome> outcome_from_word(std::string word) {
    word = to_lower_ascii(trim(word));
    if (word == "satisfied") {
        return ConstraintOutcome::satisfied;
    }
    if (word == "violated") {
        return ConstraintOutcome::violated;
    }
    if (word == "unknown") {
        return ConstraintOutcome::unknown;
    }
    return std::nullopt;
}

struct ParsedVerdict {
    ConstraintOutcome outcome;
    std::string rationale;
};

std::optional<ParsedVerdict> parse_verdict_reply(std::string_view reply) {
    for (std::string_view line : split(reply, '\n')) {
        std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        if (starts_with_ci(trimmed, "answer:")) {
            trimmed = trim(std::string_view(trimmed).substr(7));
        }
        std::string head = trimmed;
        std::string rest;
        if (auto colon = trimmed.find(':'); colon != std::string::npos) {
            head = trimmed.substr(0, colon);
            rest = trim(std::string_view(trimmed).substr(colon + 1));
        }
        auto outcome = outcome_from_word(head);
        if (!outcome) {
            return std::nullopt;
        }
        return ParsedVerdict{*outcome, std::move(rest)};
    }
    return std::nullopt;
}

std::optional<Quantity> value_as_quantity(const AttributeValue& value) {
    if (value.is_absent()) {
        return std::nullopt;
    }
    if (value.kind() == ValueKind::quantity) {
        return value.as_quantity();
    }
    return parse_quantity(value.rendered());
}

bool quantity_requirement_key(AttributeKey key) {
    return key == AttributeKey::model_size || key == AttributeKey::training_cost ||
           key == AttributeKey::inference_cost;
}

}  // namespace

std::string_view to_string(ConstraintOutcome outcome) {
    switch (outcome) {
        case ConstraintOutcome::satisfied:
            return "satisfied";
        case ConstraintOutcome::violated:
            return "violated";
        case ConstraintOutcome::unknown:
            return "unknown";
    }
    return "unknown";
}

std::string_view to_string(CheckMethod method) {
    switch (method) {
        case CheckMethod::rule:
            return "rule";
        case CheckMethod::llm:
            return "llm";
        case CheckMethod::fallback:
            return "fallback";
    }
    return "rule";
}

std::string_view to_string(UnknownHandling handling) {
    switch (handling) {
        case UnknownHandling::treat_as_satisfied:
            return "treat_as_satisfied";
        case UnknownHandling::treat_as_violated:
            return "treat_as_violated";
        case UnknownHandling::keep_unknown_and_rank:
            return "keep_unknown_and_rank";
    }
    return "treat_as_satisfied";
}

std::optional<UnknownHandling> unknown_handling_from(std::string_view name) {
    if (name == "treat_as_satisfied") {
        return UnknownHandling::treat_as_satisfied;
    }
    if (name == "treat_as_violated") {
        return UnknownHandling::treat_as_violated;
    }
    if (name == "keep_unknown_and_rank") {
        return UnknownHandling::keep_unknown_and_rank;
    }
    return std::nullopt;
}

ConstraintVerdict license_compatible(const LicenseId& required, const LicenseId& candidate) {
    ConstraintVerdict verdict;
    verdict.key = AttributeKey::license;
    verdict.method = CheckMethod::rule;
    if (candidate.token == required.token) {
        verdict.outcome = ConstraintOutcome::satisfied;
        verdict.rationale = "candidate license " + candidate.token + " matches the requirement";
        return verdict;
    }
    if (candidate.klass == LicenseClass::permissive) {
        verdict.outcome = ConstraintOutcome::satisfied;
        verdict.rationale =
            "permissive license " + candidate.token + " satisfies any requirement";
        return verdict;
    }
    if (candidate.klass == LicenseClass::unknown || required.klass == LicenseClass::unknown) {
        verdict.outcome = ConstraintOutcome::unknown;
        verdict.rationale = "license class of " +
                            (candidate.klass == LicenseClass::unknown ? candidate.token
                                                                      : required.token) +
                            " is unknown";
        return verdict;
    }
    if (candidate.klass == LicenseClass::non_commercial) {
        if (required.klass == LicenseClass::non_commercial) {
            verdict.outcome = ConstraintOutcome::satisfied;
            verdict.rationale = "non-commercial candidate " + candidate.token +
                                " satisfies a non-commercial requirement";
        } else {
            verdict.outcome = ConstraintOutcome::violated;
            verdict.rationale = "non-commercial license " + candidate.token +
                                " cannot be used under " + required.token;
        }
        return verdict;
    }
    if (required.klass == LicenseClass::strong_copyleft &&
        (candidate.klass == LicenseClass::weak_copyleft ||
         candidate.klass == LicenseClass::strong_copyleft)) {
        verdict.outcome = ConstraintOutcome::satisfied;
        verdict.rationale = "copyleft candidate " + candidate.token +
                            " is compatible with the " + required.token + " requirement";
        return verdict;
    }
    verdict.outcome = ConstraintOutcome::violated;
    verdict.rationale = "license " + candidate.token + " (" +
                        std::string(to_string(candidate.klass)) + ") conflicts with required " +
                        required.token + " (" + std::string(to_string(required.klass)) + ")";
    return verdict;
}

Result<ConstraintVerdict> numeric_within(AttributeKey key, const Quantity& required,
                                         const std::optional<Quantity>& candidate,
                                         Direction direction, double epsilon) {
    ConstraintVerdict verdict;
    verdict.key = key;
    verdict.method = CheckMethod::rule;
    if (!candidate.has_value()) {
        verdict.outcome = ConstraintOutcome::unknown;
        verdict.rationale = "no numeric candidate value to compare";
        return verdict;
    }
    auto required_scale = unit_scale(required.unit);
    auto candidate_scale = unit_scale(candidate->unit);
    double required_base = required.amount;
    double candidate_base = candidate->amount;
    if (required_scale && candidate_scale && required_scale->family == candidate_scale->family) {
        required_base *= required_scale->factor;
        candidate_base *= candidate_scale->factor;
    } else if (to_lower_ascii(required.unit) != to_lower_ascii(candidate->unit)) {
        return Result<ConstraintVerdict>::failure(
            Errc::unit_mismatch, "cannot compare " + std::string(to_string(key)) + " unit '" +
                                     candidate->unit + "' against '" + required.unit + "'");
    }
    const std::string required_text = render_quantity(required);
    const std::string candidate_text = render_quantity(*candidate);
    if (direction == Direction::max) {
        if (candidate_base <= required_base * (1.0 + epsilon)) {
            verdict.outcome = ConstraintOutcome::satisfied;
            verdict.rationale =
                "candidate " + candidate_text + " is within the required maximum " + required_text;
        } else {
            verdict.outcome = ConstraintOutcome::violated;
            verdict.rationale =
                "candidate " + candidate_text + " exceeds the required maximum " + required_text;
        }
    } else {
        if (candidate_base >= required_base * (1.0 - epsilon)) {
            verdict.outcome = ConstraintOutcome::satisfied;
            verdict.rationale =
                "candidate " + candidate_text + " meets the required minimum " + required_text;
        } else {
            verdict.outcome = ConstraintOutcome::violated;
            verdict.rationale =
                "candidate " + candidate_text + " is below the required minimum " + required_text;
        }
    }
    return verdict;
}

ConstraintVerdict check_special_fallback(AttributeKey key, const AttributeValue& required,
                                         const AttributeValue& candidate) {
    ConstraintVerdict verdict;
    verdict.key = key;
    verdict.method = CheckMethod::fallback;
    if (candidate.is_absent()) {
        verdict.outcome = ConstraintOutcome::unknown;
        verdict.rationale = "candidate has no " + std::string(to_string(key)) + " value";
        return verdict;
    }
    std::set<std::string> required_terms = term_set(required);
    std::set<std::string> candidate_terms = term_set(candidate);
    bool covered = std::all_of(required_terms.begin(), required_terms.end(),
                               [&](const std::string& term) {
                                   return candidate_terms.count(term) > 0;
                               });
    if (covered) {
        verdict.outcome = ConstraintOutcome::satisfied;
        verdict.rationale = "candidate text covers every required term";
    } else {
        verdict.outcome = ConstraintOutcome::unknown;
        verdict.rationale = "term overlap cannot decide the requirement";
    }
    return verdict;
}

Result<ConstraintVerdict> check_special_llm(AttributeKey key, const AttributeValue& required,
                                            const AttributeValue& candidate, ChatClient& client) {
    std::string prompt(assets::constraint_prompt(key));
    const std::string required_text = required.rendered();
    const std::string candidate_text = candidate.is_absent() ? "(absent)" : candidate.rendered();
    for (std::string_view tag : {"{{required}}", "{{candidate}}"}) {
        const std::string& replacement = tag == "{{required}}" ? required_text : candidate_text;
        for (std::size_t pos = prompt.find(tag); pos != std::string::npos;
             pos = prompt.find(tag, pos + replacement.size())) {
            prompt.replace(pos, tag.size(), replacement);
        }
    }
    std::vector<ChatMessage> messages{{"user", std::move(prompt)}};
    GenerationParams params;
    for (int attempt = 0; attempt < 3; ++attempt) {
        auto reply = client.complete(messages, params);
        if (!reply.ok()) {
            return reply.error();
        }
        if (auto parsed = parse_verdict_reply(reply.value())) {
            ConstraintVerdict verdict;
            verdict.key = key;
            verdict.method = CheckMethod::llm;
            verdict.outcome = parsed->outcome;
            verdict.rationale = std::move(parsed->rationale);
            if (verdict.outcome == ConstraintOutcome::violated && verdict.rationale.empty()) {
                verdict.rationale = "judged incompatible with the requirement";
            }
            return verdict;
        }
        messages.push_back({"assistant", reply.value()});
        messages.push_back({"user", std::string(kVerdictRepair)});
    }
    ConstraintVerdict verdict;
    verdict.key = key;
    verdict.method = CheckMethod::llm;
    verdict.outcome = ConstraintOutcome::unknown;
    verdict.rationale = "verdict reply unparseable after retries";
    return verdict;
}

Result<ConstraintVerdict> check_special(AttributeKey key, const AttributeValue& required,
                                        const AttributeValue& candidate, ChatClient* client,
                                        const ConstraintPolicy& policy,
                                        const LicenseTable& licenses) {
    if (!is_special(key)) {
        return Result<ConstraintVerdict>::failure(
            Errc::invalid_argument, std::string(to_string(key)) + " is not a special attribute");
    }
    if (required.is_absent()) {
        return Result<ConstraintVerdict>::failure(
            Errc::invalid_argument,
            "no required value for special attribute " + std::string(to_string(key)));
    }
    if (key == AttributeKey::license) {
        LicenseId required_id = licenses.normalize(required.rendered());
        LicenseId candidate_id =
            licenses.normalize(candidate.is_absent() ? "" : candidate.rendered());
        if (required_id.token != "unknown" || candidate_id.token != "unknown") {
            return license_compatible(required_id, candidate_id);
        }
        // Both sides fell through the alias table; only semantics can help.
        if (client != nullptr) {
            return check_special_llm(key, required, candidate, *client);
        }
        return check_special_fallback(key, required, candidate);
    }
    if (quantity_requirement_key(key) && required.kind() == ValueKind::quantity) {
        return numeric_within(key, required.as_quantity(), value_as_quantity(candidate),
                              Direction::max, policy.epsilon);
    }
    if (key == AttributeKey::hardware) {
        auto required_q = value_as_quantity(required);
        auto candidate_q = value_as_quantity(candidate);
        if (required_q.has_value() && candidate_q.has_value()) {
            return numeric_within(key, *required_q, candidate_q, Direction::max, policy.epsilon);
        }
    }
    if (client != nullptr) {
        return check_special_llm(key, required, candidate, *client);
    }
    return check_special_fallback(key, required, candidate);
}

}  // namespace modelmatch
