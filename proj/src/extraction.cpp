#include "modelmatch/extraction.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>
#include <utility>

#include "modelmatch/assets.hpp"
#include "modelmatch/bm25.hpp"
#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

constexpr std::string_view kRepairInstruction =
    "Your previous reply was not a single valid JSON object. Reply again with exactly one JSON "
    "object using only the allowed attribute keys, and nothing else.";

constexpr std::string_view kValidationRepair =
    "Reply with a single JSON object mapping every extracted key to exactly one of "
    "\"supported\", \"unsupported\", \"unknown\".";

std::size_t estimate_tokens(std::size_t chars) { return (chars + 3) / 4; }

std::size_t message_chars(const std::vector<ChatMessage>& messages) {
    std::size_t total = 0;
    for (const ChatMessage& message : messages) {
        total += message.content.size();
    }
    return total;
}

/// Cuts `text` to at most `limit` bytes without splitting a UTF-8 sequence.
std::string cut_utf8(const std::string& text, std::size_t limit) {
    if (text.size() <= limit) {
        return text;
    }
    std::size_t cut = limit;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
        --cut;
    }
    return text.substr(0, cut);
}

std::optional<nlohmann::json> parse_object_reply(const std::string& reply) {
    std::size_t open = reply.find('{');
    std::size_t close = reply.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        return std::nullopt;
    }
    nlohmann::json parsed =
        nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        return std::nullopt;
    }
    return parsed;
}

std::string default_unit(AttributeKey key) {
    switch (key) {
        case AttributeKey::parameter_size:
            return "params";
        case AttributeKey::model_size:
            return "bytes";
        case AttributeKey::training_cost:
        case AttributeKey::inference_cost:
            return "usd";
        case AttributeKey::carbon_emitted:
            return "kg";
        default:
            return "count";
    }
}

std::string strip_trailing_punct(std::string text) {
    while (!text.empty() && (text.back() == '.' || text.back() == ',' || text.back() == ';' ||
                             text.back() == ')' || text.back() == ']')) {
        text.pop_back();
    }
    return text;
}

std::optional<std::string> first_match(const std::string& text, const std::regex& pattern) {
    std::smatch match;
    if (std::regex_search(text, match, pattern)) {
        return strip_trailing_punct(match[match.size() > 1 ? 1 : 0].str());
    }
    return std::nullopt;
}

std::vector<std::string> body_paragraphs(const std::string& body) {
    std::vector<std::string> paragraphs;
    std::string current;
    for (std::string_view line : split(body, '\n')) {
        std::string trimmed = trim(line);
        if (trimmed.empty()) {
            if (!current.empty()) {
                paragraphs.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        if (!current.empty()) {
            current += ' ';
        }
        current += trimmed;
    }
    if (!current.empty()) {
        paragraphs.push_back(std::move(current));
    }
    return paragraphs;
}

std::optional<std::string> function_summary(const std::string& body) {
    for (const std::string& paragraph : body_paragraphs(body)) {
        char first = paragraph.front();
        if (first == '#' || first == '`' || first == '|' || first == '<') {
            continue;
        }
        std::string summary;
        std::size_t words = 0;
        for (const std::string& word : split(paragraph, ' ')) {
            if (word.empty()) {
                continue;
            }
            if (words == 40) {
                break;
            }
            if (!summary.empty()) {
                summary += ' ';
            }
            summary += word;
            ++words;
        }
        if (words == 0) {
            continue;
        }
        return summary;
    }
    return std::nullopt;
}

const std::vector<std::pair<std::string, std::string>>& language_names() {
    static const std::vector<std::pair<std::string, std::string>> kNames = {
        {"english", "en"}, {"french", "fr"},     {"german", "de"},  {"spanish", "es"},
        {"chinese", "zh"}, {"japanese", "ja"},   {"korean", "ko"},  {"arabic", "ar"},
        {"russian", "ru"}, {"portuguese", "pt"}, {"italian", "it"}, {"dutch", "nl"},
        {"hindi", "hi"},   {"turkish", "tr"},    {"polish", "pl"},
    };
    return kNames;
}

std::set<std::string> raw_term_set(const std::string& text) {
    std::vector<std::string> tokens = tokenize(text);
    return {tokens.begin(), tokens.end()};
}

}  // namespace

std::vector<FewShotExample> default_shots() {
    nlohmann::json parsed = nlohmann::json::parse(assets::extraction_shots_json());
    std::vector<FewShotExample> shots;
    for (const auto& entry : parsed) {
        shots.push_back({entry.at("input").get<std::string>(), entry.at("output").dump()});
    }
    return shots;
}

ExtractionPrompt build_extraction_prompt(const ModelCard& card,
                                         const std::vector<FewShotExample>& shots,
                                         const ExtractionOptions& options) {
    ExtractionPrompt prompt;
    prompt.messages.push_back({"system", std::string(assets::extraction_system_prompt())});
    for (const FewShotExample& shot : shots) {
        prompt.messages.push_back({"user", shot.input});
        prompt.messages.push_back({"assistant", shot.output});
    }
    const std::size_t budget_chars = options.context_budget_tokens * 4;
    const std::size_t fixed_chars = message_chars(prompt.messages);
    std::string body = card.body;
    if (fixed_chars + body.size() > budget_chars) {
        std::size_t allowed = budget_chars > fixed_chars ? budget_chars - fixed_chars : 0;
        body = cut_utf8(body, allowed);
        prompt.truncated = true;
    }
    prompt.messages.push_back({"user", std::move(body)});
    prompt.estimated_tokens = estimate_tokens(message_chars(prompt.messages));
    return prompt;
}

AttributeValue coerce_value(AttributeKey key, const nlohmann::json& value) {
    if (value.is_null()) {
        return AttributeValue::absent();
    }
    if (value.is_boolean()) {
        return AttributeValue::text(value.get<bool>() ? "yes" : "no");
    }
    if (value.is_number()) {
        return AttributeValue::quantity(value.get<double>(), std::string(default_unit(key)));
    }
    if (value.is_array()) {
        std::vector<std::string> items;
        for (const auto& element : value) {
            std::string item =
                element.is_string() ? element.get<std::string>() : element.dump();
            item = trim(item);
            if (!item.empty()) {
                items.push_back(std::move(item));
            }
        }
        if (items.empty()) {
            return AttributeValue::absent();
        }
        return AttributeValue::text_list(std::move(items));
    }
    if (value.is_object()) {
        return AttributeValue::text(value.dump());
    }
    std::string text = trim(value.get<std::string>());
    if (text.empty()) {
        return AttributeValue::absent();
    }
    if (auto quantity = parse_quantity(text)) {
        return AttributeValue::quantity(quantity->amount, quantity->unit);
    }
    if (text.find(',') != std::string::npos) {
        std::vector<std::string> items;
        for (std::string_view part : split(text, ',')) {
            std::string item = trim(part);
            if (!item.empty()) {
                items.push_back(std::move(item));
            }
        }
        if (items.size() > 1) {
            return AttributeValue::text_list(std::move(items));
        }
    }
    return AttributeValue::text(std::move(text));
}

Result<ExtractionResult> extract_metadata(const ModelCard& card, ChatClient& client,
                                          const std::vector<FewShotExample>& shots,
                                          const ExtractionOptions& options) {
    ExtractionPrompt prompt = build_extraction_prompt(card, shots, options);
    if (prompt.estimated_tokens > options.context_budget_tokens) {
        return Result<ExtractionResult>::failure(
            Errc::budget_exceeded,
            "extraction prompt needs about " + std::to_string(prompt.estimated_tokens) +
                " tokens, budget is " + std::to_string(options.context_budget_tokens));
    }
    std::vector<ChatMessage> messages = prompt.messages;
    ExtractionResult result;
    result.truncated_prompt = prompt.truncated;
    GenerationParams params;
    const int max_attempts = options.repair_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto reply = client.complete(messages, params);
        if (!reply.ok()) {
            return reply.error();
        }
        result.attempts = attempt;
        result.raw_response = reply.value();
        if (auto parsed = parse_object_reply(reply.value())) {
            for (const auto& [name, raw] : parsed->items()) {
                auto key = attribute_key_from(name);
                if (!key || !is_literature(*key)) {
                    continue;
                }
                AttributeValue coerced = coerce_value(*key, raw);
                if (!coerced.is_absent()) {
                    result.fields.emplace(*key, std::move(coerced));
                }
            }
            result.schema_valid = true;
            return result;
        }
        messages.push_back({"assistant", reply.value()});
        messages.push_back({"user", std::string(kRepairInstruction)});
    }
    result.schema_valid = false;
    result.fields.clear();
    return result;
}

ExtractionResult fallback_extract(const ModelCard& card) {
    static const std::regex kGithub(R"(https?://github\.com/[^\s)\]>"']+)");
    static const std::regex kReport(
        R"(https?://(?:arxiv\.org|doi\.org)/[^\s)\]>"']+|arXiv:[0-9]{4}\.[0-9]{4,5})");
    static const std::regex kBaseModel(
        R"([Ff]ine[- ]?tun\w*\s+from\s+([A-Za-z0-9][A-Za-z0-9_./-]*))");

    ExtractionResult result;
    result.schema_valid = true;
    result.attempts = 1;

    if (auto summary = function_summary(card.body)) {
        result.fields.emplace(AttributeKey::function, AttributeValue::text(*summary));
    }
    if (auto repo = first_match(card.body, kGithub)) {
        result.fields.emplace(AttributeKey::github_repo, AttributeValue::text(*repo));
    }
    if (auto report = first_match(card.body, kReport)) {
        result.fields.emplace(AttributeKey::report, AttributeValue::text(*report));
    }
    if (auto it = card.front_matter.find("base_model");
        it != card.front_matter.end() && !it->second.empty()) {
        result.fields.emplace(AttributeKey::base_model,
                              AttributeValue::text(trim(it->second.front())));
    } else if (auto base = first_match(card.body, kBaseModel)) {
        result.fields.emplace(AttributeKey::base_model, AttributeValue::text(*base));
    }
    if (to_lower_ascii(card.body).find("fine-tun") != std::string::npos ||
        result.fields.count(AttributeKey::base_model) > 0) {
        result.fields.emplace(AttributeKey::fine_tuning, AttributeValue::text("yes"));
    }
    std::vector<std::string> languages;
    if (auto it = card.front_matter.find("language"); it != card.front_matter.end()) {
        for (const std::string& value : it->second) {
            std::string code = to_lower_ascii(trim(value));
            if (!code.empty() &&
                std::find(languages.begin(), languages.end(), code) == languages.end()) {
                languages.push_back(std::move(code));
            }
        }
    }
    if (languages.empty()) {
        const std::string body_lower = to_lower_ascii(card.body);
        for (const auto& [name, code] : language_names()) {
            if (body_lower.find(name) != std::string::npos &&
                std::find(languages.begin(), languages.end(), code) == languages.end()) {
                languages.push_back(code);
            }
        }
    }
    if (!languages.empty()) {
        result.fields.emplace(AttributeKey::language,
                              AttributeValue::text_list(std::move(languages)));
    }
    if (auto it = card.front_matter.find("datasets");
        it != card.front_matter.end() && !it->second.empty()) {
        std::vector<std::string> datasets;
        for (const std::string& value : it->second) {
            std::string name = trim(value);
            if (!name.empty()) {
                datasets.push_back(std::move(name));
            }
        }
        if (!datasets.empty()) {
            result.fields.emplace(AttributeKey::dataset,
                                  AttributeValue::text_list(std::move(datasets)));
        }
    }
    return result;
}

std::string_view to_string(SupportVerdict verdict) {
    switch (verdict) {
        case SupportVerdict::supported:
            return "supported";
        case SupportVerdict::unsupported:
            return "unsupported";
        case SupportVerdict::unknown:
            return "unknown";
    }
    return "unknown";
}

Result<std::map<AttributeKey, SupportVerdict>> validate_extraction(
    const ModelCard& card, const ExtractionResult& result, ChatClient* client,
    const ExtractionOptions& options) {
    using Verdicts = std::map<AttributeKey, SupportVerdict>;
    if (!result.schema_valid) {
        return Result<Verdicts>::failure(Errc::invalid_argument,
                                         "cannot validate a schema-invalid extraction");
    }
    Verdicts verdicts;
    if (client == nullptr) {
        const std::string card_lower = to_lower_ascii(card.raw);
        const std::set<std::string> card_terms = raw_term_set(card.raw);
        for (const auto& [key, value] : result.fields) {
            const std::string rendered = value.rendered();
            bool contained = card_lower.find(to_lower_ascii(rendered)) != std::string::npos;
            if (!contained) {
                std::set<std::string> value_terms = raw_term_set(rendered);
                contained = !value_terms.empty() &&
                            std::all_of(value_terms.begin(), value_terms.end(),
                                        [&](const std::string& term) {
                                            return card_terms.count(term) > 0;
                                        });
            }
            verdicts[key] = contained ? SupportVerdict::supported : SupportVerdict::unknown;
        }
        return verdicts;
    }

    nlohmann::json values = nlohmann::json::object();
    for (const auto& [key, value] : result.fields) {
        values[std::string(to_string(key))] = value.rendered();
    }
    std::string prompt(assets::extraction_validation_prompt());
    const std::size_t budget_chars = options.context_budget_tokens * 4;
    std::string body = card.body;
    if (prompt.size() + values.dump().size() + body.size() > budget_chars) {
        std::size_t fixed = prompt.size() + values.dump().size();
        body = cut_utf8(body, budget_chars > fixed ? budget_chars - fixed : 0);
    }
    for (auto [tag, replacement] :
         {std::pair<std::string_view, std::string>{"{{card}}", body},
          std::pair<std::string_view, std::string>{"{{values}}", values.dump(2)}}) {
        if (auto pos = prompt.find(tag); pos != std::string::npos) {
            prompt.replace(pos, tag.size(), replacement);
        }
    }
    std::vector<ChatMessage> messages{{"user", std::move(prompt)}};
    GenerationParams params;
    const int max_attempts = options.repair_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto reply = client->complete(messages, params);
        if (!reply.ok()) {
            return reply.error();
        }
        if (auto parsed = parse_object_reply(reply.value())) {
            for (const auto& [key, value] : result.fields) {
                SupportVerdict verdict = SupportVerdict::unknown;
                auto it = parsed->find(std::string(to_string(key)));
                if (it != parsed->end() && it->is_string()) {
                    std::string word = to_lower_ascii(trim(it->get<std::string>()));
                    if (word == "supported") {
                        verdict = SupportVerdict::supported;
                    } else if (word == "unsupported") {
                        verdict = SupportVerdict::unsupported;
                    }
                }
                verdicts[key] = verdict;
            }
            return verdicts;
        }
        messages.push_back({"assistant", reply.value()});
        messages.push_back({"user", std::string(kValidationRepair)});
    }
    for (const auto& [key, value] : result.fields) {
        verdicts[key] = SupportVerdict::unknown;
    }
    return verdicts;
}

}  // namespace modelmatch
