#include "modelmatch/card.hpp"

#include <yaml-cpp/yaml.h>

#include <httplib.h>

#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

bool is_fence_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line == "---";
}

/// Extracts top-level string values from a parsed front-matter node.
/// Returns false when the node cannot serve as key→value front matter.
bool front_matter_from_node(const YAML::Node& node,
                            std::map<std::string, std::vector<std::string>>& out) {
    if (node.IsNull() || !node.IsDefined()) {
        return true;
    }
    if (!node.IsMap()) {
        return false;
    }
    for (const auto& item : node) {
        if (!item.first.IsScalar()) {
            return false;
        }
        std::string key = item.first.as<std::string>();
        std::vector<std::string> values;
        const YAML::Node& value = item.second;
        if (value.IsScalar()) {
            values.push_back(value.as<std::string>());
        } else if (value.IsSequence()) {
            for (const auto& element : value) {
                if (element.IsScalar()) {
                    values.push_back(element.as<std::string>());
                }
            }
        }
        out[std::move(key)] = std::move(values);
    }
    return true;
}

AttributeValue list_or_absent(const std::vector<std::string>& values) {
    std::vector<std::string> kept;
    for (const auto& v : values) {
        std::string t = trim(v);
        if (!t.empty()) {
            kept.push_back(std::move(t));
        }
    }
    if (kept.empty()) {
        return AttributeValue::absent();
    }
    return AttributeValue::text_list(std::move(kept));
}

std::optional<long long> count_from_json(const nlohmann::json& encoded, const char* key) {
    if (!encoded.contains(key) || !encoded[key].is_number()) {
        return std::nullopt;
    }
    double v = encoded[key].get<double>();
    if (v < 0) {
        return -1;  // sentinel, rejected by caller
    }
    return static_cast<long long>(v);
}

}  // namespace

Result<ModelCard> parse_card(std::string_view raw, std::string registry_name) {
    if (!is_valid_utf8(raw)) {
        return Result<ModelCard>::failure(
            Errc::invalid_encoding, "card for '" + registry_name + "' is not valid UTF-8");
    }
    ModelCard card;
    card.registry_name = std::move(registry_name);
    card.raw = std::string(raw);
    card.body = card.raw;

    std::size_t first_nl = raw.find('\n');
    if (first_nl == std::string_view::npos || !is_fence_line(raw.substr(0, first_nl))) {
        return card;
    }

    // Scan for the closing fence line; until found the card has an opening
    // fence with no matching close, which counts as malformed front matter.
    std::size_t close_begin = std::string_view::npos;
    std::size_t close_end = std::string_view::npos;
    std::size_t cursor = first_nl + 1;
    while (cursor <= raw.size()) {
        std::size_t nl = raw.find('\n', cursor);
        std::size_t line_end = (nl == std::string_view::npos) ? raw.size() : nl;
        if (is_fence_line(raw.substr(cursor, line_end - cursor))) {
            close_begin = cursor;
            close_end = (nl == std::string_view::npos) ? raw.size() : nl + 1;
            break;
        }
        if (nl == std::string_view::npos) {
            break;
        }
        cursor = nl + 1;
    }

    bool malformed = true;
    if (close_begin != std::string_view::npos) {
        std::string inner = card.raw.substr(first_nl + 1, close_begin - first_nl - 1);
        std::map<std::string, std::vector<std::string>> parsed;
        try {
            YAML::Node node = YAML::Load(inner);
            if (front_matter_from_node(node, parsed)) {
                card.front_matter = std::move(parsed);
                card.front_matter_block = card.raw.substr(0, close_end);
                card.body = card.raw.substr(close_end);
                malformed = false;
            }
        } catch (...) {
            malformed = true;
        }
    }
    if (malformed) {
        card.front_matter.clear();
        card.front_matter_block.clear();
        card.body = card.raw;
        card.front_matter_warning = true;
    }
    return card;
}

bool is_valid_card(const ModelCard& card) {
    if (!trim(card.body).empty()) {
        return true;
    }
    return !card.front_matter.empty();
}

nlohmann::json listing_to_json(const HubListing& listing) {
    nlohmann::json out{{"registry_name", listing.registry_name},
                       {"downloads", listing.downloads},
                       {"likes", listing.likes},
                       {"contributors", listing.contributors},
                       {"commits", listing.commits},
                       {"tags", listing.tags}};
    if (listing.task) {
        out["task"] = *listing.task;
    }
    if (listing.first_commit_year) {
        out["first_commit_year"] = *listing.first_commit_year;
    }
    if (listing.last_commit_year) {
        out["last_commit_year"] = *listing.last_commit_year;
    }
    return out;
}

Result<HubListing> listing_from_json(const nlohmann::json& encoded) {
    if (!encoded.is_object()) {
        return Result<HubListing>::failure(Errc::malformed_line, "listing is not an object");
    }
    HubListing listing;
    if (encoded.contains("registry_name") && encoded["registry_name"].is_string()) {
        listing.registry_name = encoded["registry_name"].get<std::string>();
    } else if (encoded.contains("modelId") && encoded["modelId"].is_string()) {
        listing.registry_name = encoded["modelId"].get<std::string>();
    } else if (encoded.contains("id") && encoded["id"].is_string()) {
        listing.registry_name = encoded["id"].get<std::string>();
    }
    if (listing.registry_name.empty()) {
        return Result<HubListing>::failure(Errc::malformed_line, "listing has no registry_name");
    }

    struct CountField {
        const char* key;
        long long HubListing::* member;
    };
    static const CountField kCounts[] = {{"downloads", &HubListing::downloads},
                                         {"likes", &HubListing::likes},
                                         {"contributors", &HubListing::contributors},
                                         {"commits", &HubListing::commits}};
    for (const auto& field : kCounts) {
        auto value = count_from_json(encoded, field.key);
        if (!value) {
            continue;
        }
        if (*value < 0) {
            return Result<HubListing>::failure(
                Errc::malformed_line,
                std::string("listing count '") + field.key + "' is negative");
        }
        listing.*(field.member) = *value;
    }

    if (encoded.contains("tags") && encoded["tags"].is_array()) {
        for (const auto& tag : encoded["tags"]) {
            if (tag.is_string()) {
                listing.tags.push_back(tag.get<std::string>());
            }
        }
    }
    for (const char* key : {"task", "pipeline_tag"}) {
        if (!listing.task && encoded.contains(key) && encoded[key].is_string()) {
            listing.task = encoded[key].get<std::string>();
        }
    }
    for (const char* key : {"first_commit_year", "last_commit_year"}) {
        if (encoded.contains(key) && encoded[key].is_number_integer()) {
            int year = encoded[key].get<int>();
            if (key[0] == 'f') {
                listing.first_commit_year = year;
            } else {
                listing.last_commit_year = year;
            }
        }
    }
    return listing;
}

PublicityFields publicity_to_fields(const ModelCard& card,
                                    const std::optional<HubListing>& listing) {
    PublicityFields out;
    out.fields[AttributeKey::model_name] = AttributeValue::text(card.registry_name);

    for (const auto& [key, values] : card.front_matter) {
        if (key == "license") {
            if (!values.empty() && !trim(values.front()).empty()) {
                out.fields[AttributeKey::license] = AttributeValue::token(values.front());
            }
        } else if (key == "language") {
            AttributeValue v = list_or_absent(values);
            if (!v.is_absent()) {
                out.fields[AttributeKey::language] = std::move(v);
            }
        } else if (key == "datasets") {
            AttributeValue v = list_or_absent(values);
            if (!v.is_absent()) {
                out.fields[AttributeKey::dataset] = std::move(v);
            }
        } else if (key == "library_name") {
            if (!values.empty() && !trim(values.front()).empty()) {
                out.fields[AttributeKey::framework] = AttributeValue::token(values.front());
            }
        } else if (key == "pipeline_tag") {
            if (!values.empty() && !trim(values.front()).empty()) {
                out.fields[AttributeKey::task] = AttributeValue::token(values.front());
            }
        } else {
            ++out.ignored_front_matter_keys;
        }
    }

    if (listing) {
        out.fields[AttributeKey::downloads] =
            AttributeValue::quantity(static_cast<double>(listing->downloads), "count");
        out.fields[AttributeKey::likes] =
            AttributeValue::quantity(static_cast<double>(listing->likes), "count");
        out.fields[AttributeKey::contributors] =
            AttributeValue::quantity(static_cast<double>(listing->contributors), "count");
        out.fields[AttributeKey::commits] =
            AttributeValue::quantity(static_cast<double>(listing->commits), "count");
        if (listing->task && !out.fields.count(AttributeKey::task)) {
            out.fields[AttributeKey::task] = AttributeValue::token(*listing->task);
        }
    }
    return out;
}

Result<HubListing> fetch_hub_listing(const std::string& registry_name,
                                     const std::string& endpoint) {
    if (registry_name.empty()) {
        return Result<HubListing>::failure(Errc::not_found, "empty registry name");
    }
    httplib::Client client(endpoint);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    client.set_follow_location(true);

    auto res = client.Get("/api/models/" + registry_name);
    if (!res) {
        return Result<HubListing>::failure(
            Errc::network_error,
            "hub request failed: " + std::string(httplib::to_string(res.error())));
    }
    if (res->status == 404) {
        return Result<HubListing>::failure(Errc::not_found,
                                           "hub has no model '" + registry_name + "'");
    }
    if (res->status == 429) {
        std::string after = res->get_header_value("Retry-After");
        return Result<HubListing>::failure(
            Errc::rate_limited,
            after.empty() ? "hub rate limit hit" : "hub rate limit hit, retry after " + after + "s");
    }
    if (res->status != 200) {
        return Result<HubListing>::failure(
            Errc::network_error, "hub returned status " + std::to_string(res->status));
    }
    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        return Result<HubListing>::failure(Errc::network_error, "hub response is not an object");
    }
    if (!body.contains("registry_name")) {
        body["registry_name"] = registry_name;
    }
    return listing_from_json(body);
}

}  // namespace modelmatch
