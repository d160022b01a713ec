#include "modelmatch/attributes.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

constexpr std::array<AttributeKey, kAttributeCount> kAllKeys = {
    AttributeKey::framework,        AttributeKey::copyright,
    AttributeKey::evaluation,       AttributeKey::hardware,
    AttributeKey::carbon_emitted,   AttributeKey::language,
    AttributeKey::software,         AttributeKey::biases,
    AttributeKey::limitation,       AttributeKey::hyper_parameters,
    AttributeKey::fine_tuning,      AttributeKey::base_model,
    AttributeKey::input_format,     AttributeKey::grant,
    AttributeKey::demo,             AttributeKey::report,
    AttributeKey::dataset,          AttributeKey::domain,
    AttributeKey::inference_cost,   AttributeKey::output_format,
    AttributeKey::github_repo,      AttributeKey::training_cost,
    AttributeKey::model_size,       AttributeKey::parameter_size,
    AttributeKey::function,         AttributeKey::others,
    AttributeKey::model_name,       AttributeKey::likes,
    AttributeKey::downloads,        AttributeKey::license,
    AttributeKey::contributors,     AttributeKey::commits,
    AttributeKey::task,
};

constexpr std::array<const char*, kAttributeCount> kKeyNames = {
    "framework",      "copyright",      "evaluation",     "hardware",
    "carbon_emitted", "language",       "software",       "biases",
    "limitation",     "hyper_parameters", "fine_tuning",  "base_model",
    "input_format",   "grant",          "demo",           "report",
    "dataset",        "domain",         "inference_cost", "output_format",
    "github_repo",    "training_cost",  "model_size",     "parameter_size",
    "function",       "others",         "model_name",     "likes",
    "downloads",      "license",        "contributors",   "commits",
    "task",
};

constexpr std::array<AttributeKey, kSpecialAttributeCount> kSpecialKeys = {
    AttributeKey::license,        AttributeKey::copyright,
    AttributeKey::hardware,       AttributeKey::software,
    AttributeKey::training_cost,  AttributeKey::inference_cost,
    AttributeKey::limitation,     AttributeKey::biases,
    AttributeKey::model_size,
};

// Publicity side of Table 1: model name, dataset, likes, downloads,
// library (merged into framework), license, contributors, commits, task.
constexpr std::array<AttributeKey, 9> kPublicityKeys = {
    AttributeKey::model_name, AttributeKey::dataset,      AttributeKey::likes,
    AttributeKey::downloads,  AttributeKey::framework,    AttributeKey::license,
    AttributeKey::contributors, AttributeKey::commits,    AttributeKey::task,
};

std::array<AttributeKey, kAttributeCount - kSpecialAttributeCount> build_trivial_keys() {
    std::array<AttributeKey, kAttributeCount - kSpecialAttributeCount> out{};
    std::size_t next = 0;
    for (AttributeKey key : kAllKeys) {
        if (std::find(kSpecialKeys.begin(), kSpecialKeys.end(), key) == kSpecialKeys.end()) {
            out[next++] = key;
        }
    }
    return out;
}

const std::array<AttributeKey, kAttributeCount - kSpecialAttributeCount> kTrivialKeys =
    build_trivial_keys();

std::string format_amount(double amount) {
    // integral amounts render without a decimal point
    if (std::isfinite(amount) && amount == std::floor(amount) &&
        std::abs(amount) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(amount);
        return os.str();
    }
    std::ostringstream os;
    os << amount;
    return os.str();
}

}  // namespace

std::span<const AttributeKey> all_attribute_keys() { return kAllKeys; }

std::span<const AttributeKey> literature_attribute_keys() {
    return std::span<const AttributeKey>(kAllKeys.data(), kLiteratureAttributeCount);
}

std::span<const AttributeKey> publicity_attribute_keys() { return kPublicityKeys; }

std::span<const AttributeKey> special_attribute_keys() { return kSpecialKeys; }

std::span<const AttributeKey> trivial_attribute_keys() { return kTrivialKeys; }

bool is_special(AttributeKey key) {
    return std::find(kSpecialKeys.begin(), kSpecialKeys.end(), key) != kSpecialKeys.end();
}

bool is_literature(AttributeKey key) {
    return static_cast<std::size_t>(key) < kLiteratureAttributeCount;
}

std::string_view to_string(AttributeKey key) {
    return kKeyNames[static_cast<std::size_t>(key)];
}

std::optional<AttributeKey> attribute_key_from(std::string_view name) {
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
        if (name == kKeyNames[i]) {
            return kAllKeys[i];
        }
    }
    return std::nullopt;
}

std::string_view to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::text: return "text";
        case ValueKind::token: return "token";
        case ValueKind::quantity: return "quantity";
        case ValueKind::text_list: return "text_list";
        case ValueKind::absent: return "absent";
    }
    return "absent";
}

std::optional<Quantity> parse_quantity(std::string_view text) {
    std::string s = trim(text);
    if (s.empty()) {
        return std::nullopt;
    }
    std::size_t i = 0;
    std::string digits;
    bool seen_dot = false;
    while (i < s.size()) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
        } else if (c == ',' && !digits.empty() && !seen_dot) {
            // thousands separator, dropped
        } else if (c == '.' && !seen_dot && !digits.empty()) {
            seen_dot = true;
            digits.push_back(c);
        } else {
            break;
        }
        ++i;
    }
    if (digits.empty() || digits.back() == '.') {
        return std::nullopt;
    }
    std::string unit;
    if (i < s.size()) {
        if (s[i] != ' ' && !std::isalpha(static_cast<unsigned char>(s[i]))) {
            return std::nullopt;
        }
        while (i < s.size() && s[i] == ' ') {
            ++i;
        }
        for (; i < s.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(s[i]);
            if (std::isalpha(c) || c == '-' || c == '_') {
                unit.push_back(static_cast<char>(std::tolower(c)));
            } else {
                return std::nullopt;
            }
        }
        if (unit.empty()) {
            return std::nullopt;
        }
    }
    try {
        return Quantity{std::stod(digits), std::move(unit)};
    } catch (...) {
        return std::nullopt;
    }
}

std::string normalize_token(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_hyphen = false;
    for (unsigned char c : raw) {
        bool word = std::isalnum(c) || c == '.' || c >= 0x80;
        if (word) {
            if (pending_hyphen && !out.empty()) {
                out.push_back('-');
            }
            pending_hyphen = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_hyphen = true;
        }
    }
    return out;
}

AttributeValue AttributeValue::text(std::string value) {
    return AttributeValue(Storage(std::move(value)), false);
}

AttributeValue AttributeValue::token(std::string value) {
    return AttributeValue(Storage(normalize_token(value)), true);
}

AttributeValue AttributeValue::quantity(double amount, std::string unit) {
    return AttributeValue(Storage(Quantity{amount, std::move(unit)}), false);
}

AttributeValue AttributeValue::text_list(std::vector<std::string> values) {
    return AttributeValue(Storage(std::move(values)), false);
}

AttributeValue AttributeValue::absent() { return AttributeValue(); }

ValueKind AttributeValue::kind() const {
    if (std::holds_alternative<Absent>(data_)) {
        return ValueKind::absent;
    }
    if (std::holds_alternative<std::string>(data_)) {
        return token_ ? ValueKind::token : ValueKind::text;
    }
    if (std::holds_alternative<Quantity>(data_)) {
        return ValueKind::quantity;
    }
    return ValueKind::text_list;
}

const std::string& AttributeValue::as_text() const { return std::get<std::string>(data_); }

const Quantity& AttributeValue::as_quantity() const { return std::get<Quantity>(data_); }

const std::vector<std::string>& AttributeValue::as_list() const {
    return std::get<std::vector<std::string>>(data_);
}

std::string AttributeValue::rendered() const {
    switch (kind()) {
        case ValueKind::absent:
            return "";
        case ValueKind::text:
        case ValueKind::token:
            return as_text();
        case ValueKind::quantity: {
            const Quantity& q = as_quantity();
            if (q.unit.empty()) {
                return format_amount(q.amount);
            }
            return format_amount(q.amount) + " " + q.unit;
        }
        case ValueKind::text_list: {
            std::string out;
            for (const auto& item : as_list()) {
                if (!out.empty()) {
                    out.push_back(' ');
                }
                out += item;
            }
            return out;
        }
    }
    return "";
}

std::string_view to_string(Source source) {
    switch (source) {
        case Source::card_extracted: return "card_extracted";
        case Source::publicity_tag: return "publicity_tag";
        case Source::consolidated: return "consolidated";
    }
    return "card_extracted";
}

std::string_view to_string(Extractor extractor) {
    switch (extractor) {
        case Extractor::llm: return "llm";
        case Extractor::heuristic: return "heuristic";
        case Extractor::manual: return "manual";
    }
    return "heuristic";
}

std::optional<Source> source_from(std::string_view name) {
    if (name == "card_extracted") return Source::card_extracted;
    if (name == "publicity_tag") return Source::publicity_tag;
    if (name == "consolidated") return Source::consolidated;
    return std::nullopt;
}

std::optional<Extractor> extractor_from(std::string_view name) {
    if (name == "llm") return Extractor::llm;
    if (name == "heuristic") return Extractor::heuristic;
    if (name == "manual") return Extractor::manual;
    return std::nullopt;
}

const AttributeValue* ModelRecord::find(AttributeKey key) const {
    auto it = attributes.find(key);
    if (it == attributes.end() || it->second.value.is_absent()) {
        return nullptr;
    }
    return &it->second.value;
}

const AttributeValue* SearchRequest::find(AttributeKey key) const {
    auto it = attributes.find(key);
    if (it == attributes.end() || it->second.is_absent()) {
        return nullptr;
    }
    return &it->second;
}

KeyPartition partition_attributes(const SearchRequest& request) {
    KeyPartition out;
    for (const auto& [key, value] : request.attributes) {
        if (value.is_absent()) {
            continue;
        }
        if (is_special(key)) {
            out.special.insert(key);
        } else {
            out.trivial.insert(key);
        }
    }
    return out;
}

std::map<AttributeKey, AttributeEntry> consolidate_fields(
    const std::map<AttributeKey, AttributeValue>& literature, Extractor literature_extractor,
    const std::map<AttributeKey, AttributeValue>& publicity) {
    std::map<AttributeKey, AttributeEntry> out;
    for (const auto& [key, value] : literature) {
        if (value.is_absent()) {
            continue;
        }
        out[key] = AttributeEntry{value, Provenance{Source::card_extracted, literature_extractor}};
    }
    for (const auto& [key, value] : publicity) {
        if (value.is_absent()) {
            continue;
        }
        auto it = out.find(key);
        if (it == out.end()) {
            out[key] = AttributeEntry{value, Provenance{Source::publicity_tag, Extractor::manual}};
        } else {
            // both sources populated the key: publicity value wins, entry is
            // marked consolidated so both contributions stay visible
            it->second =
                AttributeEntry{value, Provenance{Source::consolidated, Extractor::manual}};
        }
    }
    return out;
}

std::vector<ValidationIssue> validate_record(const ModelRecord& record) {
    std::vector<ValidationIssue> issues;
    if (record.registry_name.empty()) {
        issues.push_back({std::nullopt, "registry_name is empty"});
    }
    bool any_present = false;
    for (const auto& [key, entry] : record.attributes) {
        const AttributeValue& value = entry.value;
        switch (value.kind()) {
            case ValueKind::absent:
                break;
            case ValueKind::quantity: {
                any_present = true;
                const Quantity& q = value.as_quantity();
                if (!std::isfinite(q.amount)) {
                    issues.push_back({key, "quantity is not finite"});
                } else if (q.amount < 0.0) {
                    issues.push_back({key, "quantity is negative"});
                }
                break;
            }
            case ValueKind::token: {
                any_present = true;
                const std::string& token = value.as_text();
                if (token.empty()) {
                    issues.push_back({key, "token is empty"});
                } else if (token != normalize_token(token)) {
                    issues.push_back({key, "token is not normalized"});
                }
                break;
            }
            default:
                any_present = true;
                break;
        }
    }
    if (!any_present) {
        issues.push_back({std::nullopt, "empty record: all attribute values absent"});
    }
    return issues;
}

Result<void> validate_request_shape(const SearchRequest& request) {
    KeyPartition partition = partition_attributes(request);
    if (partition.trivial.empty()) {
        return Result<void>::failure(
            Errc::no_trivial_fields,
            "request '" + request.request_id + "' has no trivial attribute; ranking is undefined");
    }
    return Result<void>::success();
}

nlohmann::json value_to_json(const AttributeValue& value) {
    nlohmann::json out;
    out["value_kind"] = std::string(to_string(value.kind()));
    switch (value.kind()) {
        case ValueKind::absent:
            break;
        case ValueKind::text:
        case ValueKind::token:
            out["value"] = value.as_text();
            break;
        case ValueKind::quantity:
            out["value"] = {{"amount", value.as_quantity().amount},
                            {"unit", value.as_quantity().unit}};
            break;
        case ValueKind::text_list:
            out["value"] = value.as_list();
            break;
    }
    return out;
}

Result<AttributeValue> value_from_json(const nlohmann::json& encoded) {
    if (!encoded.is_object() || !encoded.contains("value_kind") ||
        !encoded["value_kind"].is_string()) {
        return Result<AttributeValue>::failure(Errc::malformed_line,
                                               "attribute value missing value_kind");
    }
    const std::string kind = encoded["value_kind"].get<std::string>();
    if (kind == "absent") {
        return AttributeValue::absent();
    }
    if (!encoded.contains("value")) {
        return Result<AttributeValue>::failure(Errc::malformed_line,
                                               "attribute value missing value");
    }
    const nlohmann::json& v = encoded["value"];
    if (kind == "text" && v.is_string()) {
        return AttributeValue::text(v.get<std::string>());
    }
    if (kind == "token" && v.is_string()) {
        return AttributeValue::token(v.get<std::string>());
    }
    if (kind == "quantity" && v.is_object() && v.contains("amount") && v.contains("unit") &&
        v["amount"].is_number() && v["unit"].is_string()) {
        return AttributeValue::quantity(v["amount"].get<double>(), v["unit"].get<std::string>());
    }
    if (kind == "text_list" && v.is_array()) {
        std::vector<std::string> items;
        for (const auto& item : v) {
            if (!item.is_string()) {
                return Result<AttributeValue>::failure(Errc::malformed_line,
                                                       "text_list item is not a string");
            }
            items.push_back(item.get<std::string>());
        }
        return AttributeValue::text_list(std::move(items));
    }
    return Result<AttributeValue>::failure(Errc::malformed_line,
                                           "attribute value kind/payload mismatch: " + kind);
}

nlohmann::json record_to_json(const ModelRecord& record) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [key, entry] : record.attributes) {
        nlohmann::json encoded = value_to_json(entry.value);
        encoded["source"] = std::string(to_string(entry.provenance.source));
        encoded["extractor"] = std::string(to_string(entry.provenance.extractor));
        attrs[std::string(to_string(key))] = std::move(encoded);
    }
    return nlohmann::json{{"registry_name", record.registry_name},
                          {"attributes", std::move(attrs)},
                          {"card_digest", record.card_digest}};
}

Result<ModelRecord> record_from_json(const nlohmann::json& encoded) {
    if (!encoded.is_object() || !encoded.contains("registry_name") ||
        !encoded["registry_name"].is_string() || !encoded.contains("attributes") ||
        !encoded["attributes"].is_object()) {
        return Result<ModelRecord>::failure(Errc::malformed_line, "record shape invalid");
    }
    ModelRecord record;
    record.registry_name = encoded["registry_name"].get<std::string>();
    if (encoded.contains("card_digest") && encoded["card_digest"].is_string()) {
        record.card_digest = encoded["card_digest"].get<std::string>();
    }
    for (const auto& [name, payload] : encoded["attributes"].items()) {
        auto key = attribute_key_from(name);
        if (!key) {
            return Result<ModelRecord>::failure(Errc::malformed_line,
                                                "unknown attribute key: " + name);
        }
        auto value = value_from_json(payload);
        if (!value.ok()) {
            return value.error();
        }
        Provenance prov;
        if (payload.contains("source") && payload["source"].is_string()) {
            auto source = source_from(payload["source"].get<std::string>());
            if (!source) {
                return Result<ModelRecord>::failure(Errc::malformed_line,
                                                    "unknown provenance source");
            }
            prov.source = *source;
        }
        if (payload.contains("extractor") && payload["extractor"].is_string()) {
            auto extractor = extractor_from(payload["extractor"].get<std::string>());
            if (!extractor) {
                return Result<ModelRecord>::failure(Errc::malformed_line,
                                                    "unknown provenance extractor");
            }
            prov.extractor = *extractor;
        }
        record.attributes[*key] = AttributeEntry{std::move(value).value(), prov};
    }
    return record;
}

nlohmann::json request_to_json(const SearchRequest& request) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [key, value] : request.attributes) {
        attrs[std::string(to_string(key))] = value_to_json(value);
    }
    nlohmann::json out{{"request_id", request.request_id}, {"attributes", std::move(attrs)}};
    if (request.origin.is_synthesized()) {
        const SynthesisOrigin& origin = *request.origin.synthesized;
        out["origin"] = {{"origin_model", origin.origin_model},
                         {"strategies", origin.strategies},
                         {"seed", origin.seed}};
        nlohmann::json mutated = nlohmann::json::array();
        for (AttributeKey key : request.mutated_keys) {
            mutated.push_back(std::string(to_string(key)));
        }
        out["mutated_keys"] = std::move(mutated);
    } else {
        out["origin"] = "developer";
    }
    return out;
}

Result<SearchRequest> request_from_json(const nlohmann::json& encoded) {
    if (!encoded.is_object() || !encoded.contains("attributes") ||
        !encoded["attributes"].is_object()) {
        return Result<SearchRequest>::failure(Errc::malformed_line, "request shape invalid");
    }
    SearchRequest request;
    if (encoded.contains("request_id") && encoded["request_id"].is_string()) {
        request.request_id = encoded["request_id"].get<std::string>();
    }
    for (const auto& [name, payload] : encoded["attributes"].items()) {
        auto key = attribute_key_from(name);
        if (!key) {
            return Result<SearchRequest>::failure(Errc::malformed_line,
                                                  "unknown attribute key: " + name);
        }
        auto value = value_from_json(payload);
        if (!value.ok()) {
            return value.error();
        }
        request.attributes[*key] = std::move(value).value();
    }
    if (encoded.contains("origin") && encoded["origin"].is_object()) {
        const nlohmann::json& origin = encoded["origin"];
        SynthesisOrigin synth;
        if (origin.contains("origin_model") && origin["origin_model"].is_string()) {
            synth.origin_model = origin["origin_model"].get<std::string>();
        }
        if (origin.contains("strategies") && origin["strategies"].is_array()) {
            for (const auto& s : origin["strategies"]) {
                if (s.is_string()) {
                    synth.strategies.push_back(s.get<std::string>());
                }
            }
        }
        if (origin.contains("seed") && origin["seed"].is_number_unsigned()) {
            synth.seed = origin["seed"].get<std::uint64_t>();
        }
        request.origin.synthesized = std::move(synth);
    }
    if (encoded.contains("mutated_keys") && encoded["mutated_keys"].is_array()) {
        for (const auto& name : encoded["mutated_keys"]) {
            if (name.is_string()) {
                auto key = attribute_key_from(name.get<std::string>());
                if (key) {
                    request.mutated_keys.insert(*key);
                }
            }
        }
    }
    return request;
}

}  // namespace modelmatch
