#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelmatch/attributes.hpp"
#include "modelmatch/card.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

/// One worked example in the extraction prompt: a card-style input and the
/// JSON object the model should emit for it.
struct FewShotExample {
    std::string input;
    std::string output;
};

/// The three bundled examples.
std::vector<FewShotExample> default_shots();

struct ExtractionOptions {
    std::size_t context_budget_tokens = 4096;  // estimated at 4 characters per token
    int repair_retries = 2;
};

struct ExtractionPrompt {
    std::vector<ChatMessage> messages;
    bool truncated = false;
    std::size_t estimated_tokens = 0;
};

/// Deterministic prompt assembly: system instruction, the shot pairs as
/// user/assistant turns, then the card body. When the body pushes the
/// estimate over budget it is cut tail-first (the head survives) on a UTF-8
/// boundary and the truncation is flagged.
ExtractionPrompt build_extraction_prompt(const ModelCard& card,
                                         const std::vector<FewShotExample>& shots,
                                         const ExtractionOptions& options = {});

struct ExtractionResult {
    std::map<AttributeKey, AttributeValue> fields;  // literature keys only
    bool schema_valid = false;
    std::string raw_response;
    int attempts = 0;
    bool truncated_prompt = false;
};

/// Maps one JSON value onto the attribute kinds: numbers become quantities
/// in the key's customary unit, strings are parsed as quantities when they
/// look like one and split on commas when they look like a list, arrays
/// become text lists, and null becomes Absent.
AttributeValue coerce_value(AttributeKey key, const nlohmann::json& value);

/// Asks the chat endpoint for a JSON object of literature attributes. An
/// unparseable reply triggers a repair turn, up to repair_retries extra
/// attempts; exhaustion returns schema_valid=false with an empty mapping
/// rather than an error. Transport failures and an over-budget prompt are
/// errors.
Result<ExtractionResult> extract_metadata(const ModelCard& card, ChatClient& client,
                                          const std::vector<FewShotExample>& shots,
                                          const ExtractionOptions& options = {});

inline Result<ExtractionResult> extract_metadata(const ModelCard& card, ChatClient& client,
                                                 const ExtractionOptions& options = {}) {
    return extract_metadata(card, client, default_shots(), options);
}

/// Offline heuristics: first prose paragraph as the function summary plus
/// pattern captures for repository, report, base model, fine-tuning,
/// languages, and datasets. Deterministic, never fails.
ExtractionResult fallback_extract(const ModelCard& card);

enum class SupportVerdict : std::uint8_t {
    supported,
    unsupported,
    unknown,
};

std::string_view to_string(SupportVerdict verdict);

/// Checks each extracted value against the card. With a client, one prompt
/// per record asks for a per-key verdict object; without one, a normalized
/// containment check marks values supported or unknown (never unsupported).
Result<std::map<AttributeKey, SupportVerdict>> validate_extraction(
    const ModelCard& card, const ExtractionResult& result, ChatClient* client = nullptr,
    const ExtractionOptions& options = {});

}  // namespace modelmatch
