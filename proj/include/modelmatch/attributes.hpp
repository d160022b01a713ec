#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelmatch/result.hpp"

namespace modelmatch {

/// The fixed 33-attribute template shared by candidate models and search
/// requests. The first 26 members are literature attributes (extracted from
/// card text); the rest come only from registry publicity tags. `dataset`
/// and `framework` can originate from either side and are consolidated.
enum class AttributeKey : std::uint8_t {
    framework,
    copyright,
    evaluation,
    hardware,
    carbon_emitted,
    language,
    software,
    biases,
    limitation,
    hyper_parameters,
    fine_tuning,
    base_model,
    input_format,
    grant,
    demo,
    report,
    dataset,
    domain,
    inference_cost,
    output_format,
    github_repo,
    training_cost,
    model_size,
    parameter_size,
    function,
    others,
    model_name,
    likes,
    downloads,
    license,
    contributors,
    commits,
    task,
};

inline constexpr std::size_t kAttributeCount = 33;
inline constexpr std::size_t kLiteratureAttributeCount = 26;
inline constexpr std::size_t kSpecialAttributeCount = 9;

std::span<const AttributeKey> all_attribute_keys();
std::span<const AttributeKey> literature_attribute_keys();
std::span<const AttributeKey> publicity_attribute_keys();

/// The nine attributes that need rule- or judgment-based compatibility checks
/// instead of text similarity.
std::span<const AttributeKey> special_attribute_keys();
std::span<const AttributeKey> trivial_attribute_keys();

bool is_special(AttributeKey key);
bool is_literature(AttributeKey key);

std::string_view to_string(AttributeKey key);
std::optional<AttributeKey> attribute_key_from(std::string_view name);

enum class ValueKind : std::uint8_t { text, token, quantity, text_list, absent };
std::string_view to_string(ValueKind kind);

struct Quantity {
    double amount = 0.0;
    std::string unit;  // "count", "bytes", "gb", "params", "usd", ...

    bool operator==(const Quantity&) const = default;
};

/// Strict numeric parse: "<number>[ <unit-word>]" with nothing else, commas
/// in the number allowed, unit lower-cased. Negative numbers and any extra
/// wording yield nullopt.
std::optional<Quantity> parse_quantity(std::string_view text);

/// Tagged union for one attribute slot. Token values are closed-set
/// identifiers normalized to lower-case-with-hyphens; Quantity amounts must
/// be finite and non-negative (enforced by validate_record, not here).
class AttributeValue {
  public:
    AttributeValue() : data_(Absent{}) {}

    static AttributeValue text(std::string value);
    static AttributeValue token(std::string value);  // normalizes case/spacing
    static AttributeValue quantity(double amount, std::string unit);
    static AttributeValue text_list(std::vector<std::string> values);
    static AttributeValue absent();

    ValueKind kind() const;
    bool is_absent() const { return kind() == ValueKind::absent; }

    const std::string& as_text() const;            // text or token
    const Quantity& as_quantity() const;           // quantity only
    const std::vector<std::string>& as_list() const;  // text_list only

    /// Flat text rendering used for indexing and prompt interpolation:
    /// text/token as-is, lists space-joined, quantities as "<amount> <unit>".
    std::string rendered() const;

    bool operator==(const AttributeValue&) const = default;

  private:
    struct Absent {
        bool operator==(const Absent&) const = default;
    };
    using Storage = std::variant<Absent, std::string, Quantity, std::vector<std::string>>;

    AttributeValue(Storage data, bool is_token) : data_(std::move(data)), token_(is_token) {}

    Storage data_;
    bool token_ = false;
};

/// Normalization applied to Token values and closed-set lookups: lower-case,
/// runs of spaces/underscores/punctuation collapsed to single hyphens.
std::string normalize_token(std::string_view raw);

enum class Source : std::uint8_t { card_extracted, publicity_tag, consolidated };
enum class Extractor : std::uint8_t { llm, heuristic, manual };

std::string_view to_string(Source source);
std::string_view to_string(Extractor extractor);
std::optional<Source> source_from(std::string_view name);
std::optional<Extractor> extractor_from(std::string_view name);

struct Provenance {
    Source source = Source::card_extracted;
    Extractor extractor = Extractor::heuristic;

    bool operator==(const Provenance&) const = default;
};

struct AttributeEntry {
    AttributeValue value;
    Provenance provenance;

    bool operator==(const AttributeEntry&) const = default;
};

/// One model's populated template instance.
struct ModelRecord {
    std::string registry_name;
    std::map<AttributeKey, AttributeEntry> attributes;
    std::string card_digest;

    /// Value for `key`, or nullptr when the key is missing or Absent.
    const AttributeValue* find(AttributeKey key) const;

    bool operator==(const ModelRecord&) const = default;
};

struct SynthesisOrigin {
    std::string origin_model;
    std::vector<std::string> strategies;
    std::uint64_t seed = 0;

    bool operator==(const SynthesisOrigin&) const = default;
};

/// Developer-written requests carry no origin info; synthesized ones record
/// the generator model, the strategies used, and the seed.
struct RequestOrigin {
    std::optional<SynthesisOrigin> synthesized;  // nullopt == developer

    bool is_synthesized() const { return synthesized.has_value(); }
    bool operator==(const RequestOrigin&) const = default;
};

/// A developer- or synthesizer-populated template instance. Must carry at
/// least one trivial attribute or ranking is undefined.
struct SearchRequest {
    std::string request_id;
    std::map<AttributeKey, AttributeValue> attributes;
    RequestOrigin origin;
    std::set<AttributeKey> mutated_keys;  // non-empty only for synthesized requests

    const AttributeValue* find(AttributeKey key) const;

    bool operator==(const SearchRequest&) const = default;
};

struct KeyPartition {
    std::set<AttributeKey> special;
    std::set<AttributeKey> trivial;
};

/// Splits the request's present (non-Absent) keys by the fixed special list.
KeyPartition partition_attributes(const SearchRequest& request);

/// Merges literature-extracted values with publicity-tag values into one
/// record attribute map. When both sides carry a value for a key, the
/// publicity value wins and the entry is marked consolidated.
std::map<AttributeKey, AttributeEntry> consolidate_fields(
    const std::map<AttributeKey, AttributeValue>& literature, Extractor literature_extractor,
    const std::map<AttributeKey, AttributeValue>& publicity);

struct ValidationIssue {
    std::optional<AttributeKey> key;  // nullopt for record-level issues
    std::string message;
};

/// Empty iff all type invariants hold; each issue names the key (when
/// applicable) and the violated invariant.
std::vector<ValidationIssue> validate_record(const ModelRecord& record);

/// Structural request check: rejects requests with no trivial attribute.
Result<void> validate_request_shape(const SearchRequest& request);

// Corpus/request wire codecs. Objects use canonically sorted keys so stored
// lines (and digests over them) are stable.
nlohmann::json value_to_json(const AttributeValue& value);
Result<AttributeValue> value_from_json(const nlohmann::json& encoded);
nlohmann::json record_to_json(const ModelRecord& record);
Result<ModelRecord> record_from_json(const nlohmann::json& encoded);
nlohmann::json request_to_json(const SearchRequest& request);
Result<SearchRequest> request_from_json(const nlohmann::json& encoded);

}  // namespace modelmatch
