#include "modelmatch/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "modelmatch/assets.hpp"
#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

std::string fold(std::string_view text) { return to_lower_ascii(trim(text)); }

bool transport_error(Errc code) {
    return code == Errc::network_error || code == Errc::timeout || code == Errc::rate_limited ||
           code == Errc::not_found;
}

AttributeValue closed_set_value(AttributeKey key, std::string pick) {
    if (key == AttributeKey::language) {
        return AttributeValue::text_list({std::move(pick)});
    }
    return AttributeValue::token(pick);
}

/// Every string the record's current value occupies in the set, lowercased;
/// list values exclude each element.
std::set<std::string> original_forms(const AttributeValue& value) {
    std::set<std::string> forms;
    if (value.kind() == ValueKind::text_list) {
        for (const std::string& item : value.as_list()) {
            forms.insert(fold(item));
        }
    }
    forms.insert(fold(value.rendered()));
    return forms;
}

SearchRequest project_request(const ModelRecord& record, AttributeKey mutated_key,
                              AttributeValue mutated_value, const std::string& strategy,
                              std::uint64_t seed) {
    SearchRequest request;
    if (const AttributeValue* function = record.find(AttributeKey::function)) {
        request.attributes.emplace(AttributeKey::function, *function);
    }
    if (const AttributeValue* license = record.find(AttributeKey::license)) {
        request.attributes.emplace(AttributeKey::license, *license);
    }
    request.attributes[mutated_key] = std::move(mutated_value);
    request.mutated_keys = {mutated_key};
    request.origin.synthesized = SynthesisOrigin{record.registry_name, {strategy}, seed};
    return request;
}

struct WordParts {
    std::string prefix;
    std::string core;
    std::string suffix;
};

WordParts split_word(const std::string& word) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && !std::isalnum(static_cast<unsigned char>(word[begin]))) {
        ++begin;
    }
    while (end > begin && !std::isalnum(static_cast<unsigned char>(word[end - 1]))) {
        --end;
    }
    return {word.substr(0, begin), word.substr(begin, end - begin), word.substr(end)};
}

std::string match_case(const std::string& original, std::string replacement) {
    if (!original.empty() && !replacement.empty() &&
        std::isupper(static_cast<unsigned char>(original.front()))) {
        replacement.front() =
            static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
    }
    return replacement;
}

bool is_stopword(const std::string& word) {
    static const std::set<std::string> kStopwords = {
        "the", "a",  "an", "and", "or",   "for",  "with", "from", "that", "this", "are",
        "is",  "was", "were", "of", "to", "in", "on", "at", "by", "it", "its"};
    return kStopwords.count(word) > 0;
}

std::vector<std::string> request_words(const std::string& text) {
    std::vector<std::string> words;
    for (const std::string& word : split(text, ' ')) {
        if (!word.empty()) {
            words.push_back(word);
        }
    }
    return words;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string joined;
    for (const std::string& word : words) {
        if (!joined.empty()) {
            joined += ' ';
        }
        joined += word;
    }
    return joined;
}

std::string first_line(const std::string& reply) {
    for (const std::string& line : split(reply, '\n')) {
        std::string trimmed = trim(line);
        if (!trimmed.empty()) {
            return trimmed;
        }
    }
    return {};
}

std::string render_request_lines(const SearchRequest& request) {
    std::string lines;
    for (const auto& [key, value] : request.attributes) {
        if (value.is_absent()) {
            continue;
        }
        lines += "  ";
        lines += to_string(key);
        lines += ": ";
        lines += value.rendered();
        lines += '\n';
    }
    if (!lines.empty()) {
        lines.pop_back();
    }
    return lines;
}

bool value_matches(const AttributeValue& value, const std::string& target) {
    if (value.kind() == ValueKind::text_list) {
        for (const std::string& item : value.as_list()) {
            if (fold(item) == target) {
                return true;
            }
        }
        return false;
    }
    return fold(value.rendered()) == target;
}

ValidityVerdict rule_validate(const SearchRequest& request, const IncompatTable& table) {
    for (const IncompatTable::Rule& rule : table.rules) {
        const AttributeValue* a = request.find(rule.key_a);
        const AttributeValue* b = request.find(rule.key_b);
        if (a != nullptr && b != nullptr && value_matches(*a, rule.value_a) &&
            value_matches(*b, rule.value_b)) {
            ValidityVerdict verdict;
            verdict.valid = false;
            verdict.method = CheckMethod::rule;
            verdict.rationale = std::string(to_string(rule.key_a)) + " " + rule.value_a +
                                " conflicts with " + std::string(to_string(rule.key_b)) + " " +
                                rule.value_b;
            return verdict;
        }
    }
    return {true, "no internal conflicts found", CheckMethod::rule};
}

}  // namespace

std::string to_string(const MutationStrategy& strategy) {
    std::string name = strategy.kind == MutationKind::closed_set_substitute ? "closed_set:"
                                                                            : "free_text:";
    name += to_string(strategy.target_key);
    return name;
}

std::vector<MutationStrategy> default_strategies() {
    return {
        {MutationKind::closed_set_substitute, AttributeKey::license},
        {MutationKind::free_text_infill, AttributeKey::function},
        {MutationKind::closed_set_substitute, AttributeKey::task},
        {MutationKind::closed_set_substitute, AttributeKey::input_format},
        {MutationKind::closed_set_substitute, AttributeKey::output_format},
        {MutationKind::closed_set_substitute, AttributeKey::language},
        {MutationKind::free_text_infill, AttributeKey::limitation},
        {MutationKind::free_text_infill, AttributeKey::biases},
    };
}

const ClosedValueSets& ClosedValueSets::bundled() {
    static const ClosedValueSets table = [] {
        auto parsed = ClosedValueSets::parse(assets::closed_sets_json());
        if (!parsed.ok()) {
            throw std::runtime_error("bundled closed_sets asset is invalid: " +
                                     parsed.error().message);
        }
        return std::move(parsed).value();
    }();
    return table;
}

Result<ClosedValueSets> ClosedValueSets::parse(std::string_view json_text) {
    nlohmann::json parsed = nlohmann::json::parse(json_text, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        return Result<ClosedValueSets>::failure(Errc::malformed_line,
                                                "closed value sets must be a JSON object");
    }
    ClosedValueSets sets;
    for (const auto& [name, values] : parsed.items()) {
        auto key = attribute_key_from(name);
        if (!key) {
            return Result<ClosedValueSets>::failure(Errc::malformed_line,
                                                    "unknown attribute key '" + name + "'");
        }
        if (!values.is_array() || values.empty()) {
            return Result<ClosedValueSets>::failure(
                Errc::malformed_line, "value set for '" + name + "' must be a non-empty array");
        }
        std::vector<std::string> entries;
        for (const auto& value : values) {
            if (!value.is_string() || trim(value.get<std::string>()).empty()) {
                return Result<ClosedValueSets>::failure(
                    Errc::malformed_line, "value set for '" + name + "' holds a non-string");
            }
            entries.push_back(trim(value.get<std::string>()));
        }
        sets.sets.emplace(*key, std::move(entries));
    }
    return sets;
}

const std::vector<std::string>* ClosedValueSets::find(AttributeKey key) const {
    auto it = sets.find(key);
    return it == sets.end() ? nullptr : &it->second;
}

const SynonymTable& SynonymTable::bundled() {
    static const SynonymTable table = [] {
        auto parsed = SynonymTable::parse(assets::synonyms_tsv());
        if (!parsed.ok()) {
            throw std::runtime_error("bundled synonyms asset is invalid: " +
                                     parsed.error().message);
        }
        return std::move(parsed).value();
    }();
    return table;
}

Result<SynonymTable> SynonymTable::parse(std::string_view tsv) {
    SynonymTable table;
    std::size_t line_no = 0;
    for (const std::string& line : split(tsv, '\n')) {
        ++line_no;
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        std::vector<std::string> columns = split(trimmed, '\t');
        if (columns.size() != 2) {
            return Result<SynonymTable>::failure(
                Errc::malformed_line,
                "synonyms line " + std::to_string(line_no) + ": expected word<TAB>alternatives");
        }
        std::vector<std::string> alternatives;
        for (const std::string& alt : split(columns[1], ',')) {
            std::string entry = trim(alt);
            if (!entry.empty()) {
                alternatives.push_back(std::move(entry));
            }
        }
        if (alternatives.empty()) {
            return Result<SynonymTable>::failure(
                Errc::malformed_line,
                "synonyms line " + std::to_string(line_no) + ": no alternatives");
        }
        table.alternatives[fold(columns[0])] = std::move(alternatives);
    }
    return table;
}

const std::vector<std::string>* SynonymTable::find(const std::string& word) const {
    auto it = alternatives.find(word);
    return it == alternatives.end() ? nullptr : &it->second;
}

const IncompatTable& IncompatTable::bundled() {
    static const IncompatTable table = [] {
        auto parsed = IncompatTable::parse(assets::request_incompat_tsv());
        if (!parsed.ok()) {
            throw std::runtime_error("bundled incompatibility asset is invalid: " +
                                     parsed.error().message);
        }
        return std::move(parsed).value();
    }();
    return table;
}

Result<IncompatTable> IncompatTable::parse(std::string_view tsv) {
    IncompatTable table;
    std::size_t line_no = 0;
    for (const std::string& line : split(tsv, '\n')) {
        ++line_no;
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        std::vector<std::string> columns = split(trimmed, '\t');
        if (columns.size() != 4) {
            return Result<IncompatTable>::failure(
                Errc::malformed_line, "incompatibility line " + std::to_string(line_no) +
                                          ": expected 4 tab-separated fields");
        }
        auto key_a = attribute_key_from(trim(columns[0]));
        auto key_b = attribute_key_from(trim(columns[2]));
        if (!key_a || !key_b) {
            return Result<IncompatTable>::failure(
                Errc::malformed_line,
                "incompatibility line " + std::to_string(line_no) + ": unknown attribute key");
        }
        table.rules.push_back({*key_a, fold(columns[1]), *key_b, fold(columns[3])});
    }
    return table;
}

Result<SearchRequest> mutate_closed_set(const ModelRecord& record, AttributeKey key,
                                        std::uint64_t seed,
                                        const std::set<std::string>& exclude,
                                        const ClosedValueSets& sets) {
    const std::vector<std::string>* values = sets.find(key);
    if (values == nullptr) {
        return Result<SearchRequest>::failure(
            Errc::invalid_argument,
            "no bundled value set for attribute " + std::string(to_string(key)));
    }
    const AttributeValue* original = record.find(key);
    if (original == nullptr) {
        return Result<SearchRequest>::failure(
            Errc::missing_value, record.registry_name + " has no " +
                                     std::string(to_string(key)) + " value to substitute");
    }
    const std::set<std::string> originals = original_forms(*original);
    std::vector<std::string> candidates;
    for (const std::string& value : *values) {
        const std::string folded = fold(value);
        if (originals.count(folded) == 0 && exclude.count(folded) == 0) {
            candidates.push_back(value);
        }
    }
    if (candidates.empty()) {
        return Result<SearchRequest>::failure(
            Errc::no_alternatives,
            "no unused alternative for " + std::string(to_string(key)));
    }
    const std::string pick = candidates[seeded_pick(seed, candidates.size())];
    MutationStrategy strategy{MutationKind::closed_set_substitute, key};
    return project_request(record, key, closed_set_value(key, pick), to_string(strategy), seed);
}

Result<SearchRequest> mutate_free_text(const ModelRecord& record, AttributeKey key,
                                       ChatClient* client, std::uint64_t seed,
                                       const std::set<std::string>& exclude,
                                       const SynonymTable& synonyms) {
    const AttributeValue* value = record.find(key);
    if (value == nullptr) {
        return Result<SearchRequest>::failure(
            Errc::missing_value, record.registry_name + " has no " +
                                     std::string(to_string(key)) + " text to rewrite");
    }
    const std::string original = trim(value->rendered());
    if (original.empty()) {
        return Result<SearchRequest>::failure(
            Errc::missing_value, std::string(to_string(key)) + " text is empty");
    }
    const std::string original_folded = fold(original);
    MutationStrategy strategy{MutationKind::free_text_infill, key};

    if (client != nullptr) {
        std::vector<std::string> words = request_words(original);
        std::vector<std::size_t> positions;
        for (std::size_t i = 0; i < words.size(); ++i) {
            WordParts parts = split_word(words[i]);
            if (parts.core.size() >= 3 && !is_stopword(fold(parts.core))) {
                positions.push_back(i);
            }
        }
        if (positions.empty()) {
            positions.resize(words.size());
            for (std::size_t i = 0; i < words.size(); ++i) {
                positions[i] = i;
            }
        }
        const std::size_t mask_count =
            1 + seeded_pick(mix_seed(seed, {"mask-count"}),
                            std::min<std::size_t>(3, positions.size()));
        std::vector<std::string> masked = words;
        for (std::size_t i = 0; i < mask_count; ++i) {
            const std::size_t at = seeded_pick(mix_seed(seed, {"mask", std::to_string(i)}),
                                               positions.size());
            masked[positions[at]] = "[MASK]";
            positions.erase(positions.begin() + static_cast<std::ptrdiff_t>(at));
            if (positions.empty()) {
                break;
            }
        }
        std::string prompt(assets::mutation_infill_prompt());
        if (auto pos = prompt.find("{{original}}"); pos != std::string::npos) {
            prompt.replace(pos, 12, original);
        }
        if (auto pos = prompt.find("{{masked}}"); pos != std::string::npos) {
            prompt.replace(pos, 10, join_words(masked));
        }
        std::vector<ChatMessage> messages{{"user", std::move(prompt)}};
        GenerationParams params;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto reply = client->complete(messages, params);
            if (!reply.ok()) {
                return reply.error();
            }
            const std::string candidate = first_line(reply.value());
            const std::string folded = fold(candidate);
            if (!candidate.empty() && folded != original_folded && exclude.count(folded) == 0) {
                return project_request(record, key, AttributeValue::text(candidate),
                                       to_string(strategy), seed);
            }
            messages.push_back({"assistant", reply.value()});
            messages.push_back(
                {"user", "The rewritten sentence must differ from the original. Try again."});
        }
        return Result<SearchRequest>::failure(Errc::mutation_failed,
                                              "endpoint echoed the original text twice");
    }

    std::vector<std::string> words = request_words(original);
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < words.size(); ++i) {
        WordParts parts = split_word(words[i]);
        if (!parts.core.empty() && synonyms.find(fold(parts.core)) != nullptr) {
            positions.push_back(i);
        }
    }
    if (positions.empty()) {
        return Result<SearchRequest>::failure(
            Errc::mutation_failed, "no replaceable word in the " +
                                       std::string(to_string(key)) + " text");
    }
    const std::size_t start = seeded_pick(seed, positions.size());
    for (std::size_t offset = 0; offset < positions.size(); ++offset) {
        const std::size_t pos = positions[(start + offset) % positions.size()];
        WordParts parts = split_word(words[pos]);
        const std::vector<std::string>& alternatives = *synonyms.find(fold(parts.core));
        const std::size_t alt_start =
            seeded_pick(mix_seed(seed, {"alt", parts.core}), alternatives.size());
        for (std::size_t j = 0; j < alternatives.size(); ++j) {
            const std::string& alternative =
                alternatives[(alt_start + j) % alternatives.size()];
            if (fold(alternative) == fold(parts.core)) {
                continue;
            }
            std::vector<std::string> mutated = words;
            mutated[pos] = parts.prefix + match_case(parts.core, alternative) + parts.suffix;
            const std::string candidate = join_words(mutated);
            const std::string folded = fold(candidate);
            if (folded != original_folded && exclude.count(folded) == 0) {
                return project_request(record, key, AttributeValue::text(candidate),
                                       to_string(strategy), seed);
            }
        }
    }
    return Result<SearchRequest>::failure(Errc::mutation_failed,
                                          "every synonym variant was already used");
}

Result<SynthesisOutput> synthesize_requests(const ModelRecord& record, std::size_t n,
                                            const std::vector<MutationStrategy>& strategies,
                                            std::uint64_t seed, ChatClient* client) {
    if (n < 1) {
        return Result<SynthesisOutput>::failure(Errc::invalid_argument, "n must be at least 1");
    }
    if (strategies.empty()) {
        return Result<SynthesisOutput>::failure(Errc::invalid_argument,
                                                "no mutation strategies given");
    }
    SynthesisOutput out;
    std::map<AttributeKey, std::set<std::string>> used;
    std::string last_reason = "no strategy applied";
    const std::size_t max_attempts = strategies.size() * (n + 2);
    for (std::size_t attempt = 0; attempt < max_attempts && out.requests.size() < n; ++attempt) {
        const MutationStrategy& strategy = strategies[attempt % strategies.size()];
        const std::string strategy_name = to_string(strategy);
        const std::uint64_t derived =
            mix_seed(seed, {record.registry_name, strategy_name, std::to_string(attempt)});
        Result<SearchRequest> mutated =
            strategy.kind == MutationKind::closed_set_substitute
                ? mutate_closed_set(record, strategy.target_key, derived,
                                    used[strategy.target_key])
                : mutate_free_text(record, strategy.target_key, client, derived,
                                   used[strategy.target_key]);
        if (!mutated.ok()) {
            if (transport_error(mutated.code())) {
                return mutated.error();
            }
            last_reason = std::string(errc_name(mutated.code())) + ": " +
                          mutated.error().message;
            continue;
        }
        SearchRequest request = std::move(mutated).value();
        if (auto shape = validate_request_shape(request); !shape.ok()) {
            last_reason = std::string(errc_name(shape.code())) + ": " + shape.error().message;
            continue;
        }
        const AttributeValue* mutated_value = request.find(strategy.target_key);
        used[strategy.target_key].insert(fold(mutated_value->rendered()));
        request.request_id =
            record.registry_name + "#" + std::to_string(out.requests.size() + 1);
        out.requests.push_back(std::move(request));
    }
    if (out.requests.size() < n) {
        out.shortfalls.push_back({record.registry_name, out.requests.size(), n, last_reason});
    }
    return out;
}

Result<SynthesisOutput> synthesize_corpus(const std::vector<ModelRecord>& records, std::size_t n,
                                          std::uint64_t seed, ChatClient* client) {
    if (records.empty()) {
        return Result<SynthesisOutput>::failure(Errc::empty_corpus,
                                                "no records to synthesize from");
    }
    SynthesisOutput out;
    const std::vector<MutationStrategy> strategies = default_strategies();
    for (const ModelRecord& record : records) {
        auto one = synthesize_requests(record, n, strategies, seed, client);
        if (!one.ok()) {
            return one.error();
        }
        auto& value = one.value();
        std::move(value.requests.begin(), value.requests.end(),
                  std::back_inserter(out.requests));
        std::move(value.shortfalls.begin(), value.shortfalls.end(),
                  std::back_inserter(out.shortfalls));
    }
    return out;
}

Result<ValidityVerdict> validate_request(const SearchRequest& request, ChatClient* client,
                                         const IncompatTable& table) {
    if (client == nullptr) {
        return rule_validate(request, table);
    }
    std::string prompt(assets::request_validity_prompt());
    const std::string rendered = render_request_lines(request);
    if (auto pos = prompt.find("{{request}}"); pos != std::string::npos) {
        prompt.replace(pos, std::string_view("{{request}}").size(), rendered);
    }
    GenerationParams params;
    auto reply = client->complete({{"user", std::move(prompt)}}, params);
    if (!reply.ok()) {
        return reply.error();
    }
    std::string line = first_line(reply.value());
    if (starts_with_ci(line, "answer:")) {
        line = trim(std::string_view(line).substr(7));
    }
    std::string head = line;
    std::string rest;
    if (auto colon = line.find(':'); colon != std::string::npos) {
        head = line.substr(0, colon);
        rest = trim(std::string_view(line).substr(colon + 1));
    }
    head = fold(head);
    if (head == "valid" || head == "invalid") {
        ValidityVerdict verdict;
        verdict.valid = head == "valid";
        verdict.method = CheckMethod::llm;
        verdict.rationale = rest;
        if (!verdict.valid && verdict.rationale.empty()) {
            verdict.rationale = "fields conflict internally";
        }
        return verdict;
    }
    return rule_validate(request, table);
}

}  // namespace modelmatch
