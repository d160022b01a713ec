#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "modelmatch/attributes.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/constraints.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

enum class MutationKind : std::uint8_t {
    closed_set_substitute,
    free_text_infill,
};

struct MutationStrategy {
    MutationKind kind = MutationKind::closed_set_substitute;
    AttributeKey target_key = AttributeKey::license;

    bool operator==(const MutationStrategy&) const = default;
};

/// "closed_set:license", "free_text:function"; the form recorded in request
/// provenance.
std::string to_string(const MutationStrategy& strategy);

/// The default rotation: licenses and modality tokens first, prose fields
/// last, so small n values still exercise both mutation kinds.
std::vector<MutationStrategy> default_strategies();

/// Alternatives for closed-set substitution, one value list per key.
class ClosedValueSets {
  public:
    static const ClosedValueSets& bundled();
    static Result<ClosedValueSets> parse(std::string_view json_text);

    const std::vector<std::string>* find(AttributeKey key) const;

    std::map<AttributeKey, std::vector<std::string>> sets;
};

/// word -> alternatives, used by the offline free-text fallback.
class SynonymTable {
  public:
    static const SynonymTable& bundled();
    static Result<SynonymTable> parse(std::string_view tsv);

    const std::vector<std::string>* find(const std::string& word) const;

    std::map<std::string, std::vector<std::string>> alternatives;
};

/// Pairs of attribute values that cannot appear in one request.
class IncompatTable {
  public:
    struct Rule {
        AttributeKey key_a = AttributeKey::input_format;
        std::string value_a;
        AttributeKey key_b = AttributeKey::task;
        std::string value_b;
    };

    static const IncompatTable& bundled();
    static Result<IncompatTable> parse(std::string_view tsv);

    std::vector<Rule> rules;
};

/// Substitutes the record's value for `key` with a seeded uniform draw from
/// the bundled set minus the original and minus `exclude`. The request keeps
/// a fixed projection of the record: function, the mutated key, and license
/// when the record has one.
Result<SearchRequest> mutate_closed_set(const ModelRecord& record, AttributeKey key,
                                        std::uint64_t seed,
                                        const std::set<std::string>& exclude = {},
                                        const ClosedValueSets& sets = ClosedValueSets::bundled());

/// Rewrites the record's text for `key`. With a client, 1-3 seeded content
/// words are masked and the endpoint infills them; an echo of the original
/// is retried once and then fails. Without a client, one content word is
/// swapped via the synonym table, seeded.
Result<SearchRequest> mutate_free_text(const ModelRecord& record, AttributeKey key,
                                       ChatClient* client, std::uint64_t seed,
                                       const std::set<std::string>& exclude = {},
                                       const SynonymTable& synonyms = SynonymTable::bundled());

struct SynthesisShortfall {
    std::string registry_name;
    std::size_t produced = 0;
    std::size_t requested = 0;
    std::string reason;
};

struct SynthesisOutput {
    std::vector<SearchRequest> requests;
    std::vector<SynthesisShortfall> shortfalls;
};

/// Produces up to n pairwise-distinct requests from one record by cycling
/// the strategies with per-attempt derived seeds. Strategy failures move on
/// to the next attempt; transport errors abort. Falling short of n is
/// reported, never silent.
Result<SynthesisOutput> synthesize_requests(const ModelRecord& record, std::size_t n,
                                            const std::vector<MutationStrategy>& strategies,
                                            std::uint64_t seed, ChatClient* client = nullptr);

/// synthesize_requests over every record, ids "name#1".."name#n".
Result<SynthesisOutput> synthesize_corpus(const std::vector<ModelRecord>& records, std::size_t n,
                                          std::uint64_t seed, ChatClient* client = nullptr);

struct ValidityVerdict {
    bool valid = true;
    std::string rationale;
    CheckMethod method = CheckMethod::rule;
};

/// Internal-conflict check only; downstream application constraints are out
/// of scope by design. The rule path consults the bundled incompatibility
/// table; the LLM path falls back to it when the reply cannot be parsed.
Result<ValidityVerdict> validate_request(const SearchRequest& request,
                                         ChatClient* client = nullptr,
                                         const IncompatTable& table = IncompatTable::bundled());

}  // namespace modelmatch
