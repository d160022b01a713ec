#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modelmatch/attributes.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

/// A raw model card split into YAML front matter and Markdown body.
/// front_matter_block + body reconstructs raw byte-exactly. When the front
/// matter is malformed the block is empty, body == raw, and the warning flag
/// is set instead of failing.
struct ModelCard {
    std::string registry_name;
    std::map<std::string, std::vector<std::string>> front_matter;  // scalars as 1-element lists
    std::string front_matter_block;
    std::string body;
    std::string raw;
    bool front_matter_warning = false;
};

/// Splits raw card text into front matter and body. Never fails on malformed
/// front matter; the only error is invalid UTF-8 input.
Result<ModelCard> parse_card(std::string_view raw, std::string registry_name);

/// False iff body and front matter are both empty after whitespace stripping.
bool is_valid_card(const ModelCard& card);

/// Hub-supplied listing data for one model: engagement counters plus tags.
struct HubListing {
    std::string registry_name;
    long long downloads = 0;
    long long likes = 0;
    long long contributors = 0;
    long long commits = 0;
    std::vector<std::string> tags;
    std::optional<std::string> task;
    std::optional<int> first_commit_year;
    std::optional<int> last_commit_year;

    bool operator==(const HubListing&) const = default;
};

nlohmann::json listing_to_json(const HubListing& listing);
Result<HubListing> listing_from_json(const nlohmann::json& encoded);

struct PublicityFields {
    std::map<AttributeKey, AttributeValue> fields;
    std::size_t ignored_front_matter_keys = 0;
};

/// Maps the front-matter allowlist (license, language, datasets,
/// library_name, pipeline_tag) and the listing counters onto template
/// attributes. model_name is always populated from the card's registry name.
/// Unknown front-matter keys are ignored and counted.
PublicityFields publicity_to_fields(const ModelCard& card,
                                    const std::optional<HubListing>& listing);

/// Fetches one model's public listing from a hub endpoint (network).
/// Requests GET <endpoint>/api/models/<registry_name>.
Result<HubListing> fetch_hub_listing(const std::string& registry_name,
                                     const std::string& endpoint);

}  // namespace modelmatch
