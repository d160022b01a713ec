#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "modelmatch/attributes.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/license.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

enum class ConstraintOutcome : std::uint8_t {
    satisfied,
    violated,
    unknown,
};

enum class CheckMethod : std::uint8_t {
    rule,
    llm,
    fallback,
};

std::string_view to_string(ConstraintOutcome outcome);
std::string_view to_string(CheckMethod method);

/// Verdict for one special attribute of one candidate. A violated outcome
/// always carries a non-empty rationale.
struct ConstraintVerdict {
    AttributeKey key = AttributeKey::license;
    ConstraintOutcome outcome = ConstraintOutcome::unknown;
    std::string rationale;
    CheckMethod method = CheckMethod::rule;
};

enum class UnknownHandling : std::uint8_t {
    treat_as_satisfied,
    treat_as_violated,
    keep_unknown_and_rank,
};

std::string_view to_string(UnknownHandling handling);
std::optional<UnknownHandling> unknown_handling_from(std::string_view name);

/// treat_as_satisfied keeps candidates whose evidence is merely missing:
/// absence of evidence is not incompatibility. Strict deployments can flip
/// to treat_as_violated.
struct ConstraintPolicy {
    UnknownHandling unknown_handling = UnknownHandling::treat_as_satisfied;
    double epsilon = 0.0;  // relative tolerance for numeric comparisons, >= 0
};

/// Use-compatibility, not textual equality: a permissive candidate license
/// satisfies any requirement, identical tokens always match, and copyleft
/// requirements admit anything up to the same copyleft strength. Unknown
/// classes on either side yield unknown.
ConstraintVerdict license_compatible(const LicenseId& required, const LicenseId& candidate);

enum class Direction : std::uint8_t { max, min };

/// Threshold comparison with unit conversion inside a family (byte sizes,
/// counts, currency, hours). Units outside the table compare only when the
/// strings match exactly. direction=max demands candidate <= required scaled
/// by (1 + epsilon); min is the dual. A missing candidate is unknown, not an
/// error.
Result<ConstraintVerdict> numeric_within(AttributeKey key, const Quantity& required,
                                         const std::optional<Quantity>& candidate,
                                         Direction direction, double epsilon);

/// Deterministic stand-in for the model-judged path: if every required term
/// occurs among the candidate's terms the requirement is visibly met;
/// anything else is undecidable by overlap and stays unknown.
ConstraintVerdict check_special_fallback(AttributeKey key, const AttributeValue& required,
                                         const AttributeValue& candidate);

/// Renders the key-specific prompt and asks for "satisfied|violated|unknown:
/// rationale". Unparseable replies are retried with a repair instruction;
/// exhaustion yields unknown with method=llm. Transport errors propagate.
Result<ConstraintVerdict> check_special_llm(AttributeKey key, const AttributeValue& required,
                                            const AttributeValue& candidate, ChatClient& client);

/// Dispatch for one special attribute: license goes through the rule table
/// (the judged path only when both sides normalize to unknown), size and
/// cost keys with a numeric requirement go through numeric_within, and the
/// judgment-call keys go to the LLM when a client is configured, else to the
/// deterministic fallback. Without a client the result is fully
/// deterministic.
Result<ConstraintVerdict> check_special(AttributeKey key, const AttributeValue& required,
                                        const AttributeValue& candidate, ChatClient* client,
                                        const ConstraintPolicy& policy,
                                        const LicenseTable& licenses = LicenseTable::bundled());

}  // namespace modelmatch
