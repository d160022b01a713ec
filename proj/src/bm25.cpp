#include "modelmatch/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace modelmatch {

namespace {

constexpr unsigned char kLatin1Lead = 0xC3;

bool is_ascii_word(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::size_t code_points(std::string_view token) {
    std::size_t n = 0;
    for (unsigned char c : token) {
        if ((c & 0xC0) != 0x80) {
            ++n;
        }
    }
    return n;
}

std::map<std::string, std::uint32_t> term_counts(const std::vector<std::string>& tokens) {
    std::map<std::string, std::uint32_t> counts;
    for (const auto& token : tokens) {
        ++counts[token];
    }
    return counts;
}

double term_factor(double tf, double doc_len, double avg_len, Bm25Params params) {
    double norm = 1.0 - params.b + params.b * (doc_len / avg_len);
    return tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
}

std::vector<std::string> dedupe(const std::vector<std::string>& tokens) {
    std::vector<std::string> unique(tokens);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    return unique;
}

/// BM25 score of a term-count bag against the field statistics. Query terms
/// enter the sum once each (set semantics), mirroring score_field, so the
/// self-score of a text equals the score of an identical document.
double score_counts(const FieldIndex& field, const std::vector<std::string>& query_tokens,
                    const std::map<std::string, std::uint32_t>& doc_counts, double doc_len,
                    Bm25Params params) {
    if (field.doc_count == 0 || field.avg_doc_length <= 0.0) {
        return 0.0;
    }
    double score = 0.0;
    for (const auto& token : dedupe(query_tokens)) {
        auto it = doc_counts.find(token);
        if (it == doc_counts.end() || it->second == 0) {
            continue;
        }
        score += idf(field, token) *
                 term_factor(static_cast<double>(it->second), doc_len, field.avg_doc_length,
                             params);
    }
    return score;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            if (code_points(current) >= 2) {
                tokens.push_back(current);
            }
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if (is_ascii_word(c)) {
                current.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
            continue;
        }
        // Latin-1 capital letters fold to lower case; anything else
        // non-ASCII passes through as a word byte.
        if (c == kLatin1Lead && i + 1 < text.size()) {
            unsigned char next = static_cast<unsigned char>(text[i + 1]);
            if (next >= 0x80 && next <= 0x9E && next != 0x97) {
                current.push_back(static_cast<char>(c));
                current.push_back(static_cast<char>(next + 0x20));
                ++i;
                continue;
            }
        }
        current.push_back(static_cast<char>(c));
    }
    flush();
    return tokens;
}

Result<Bm25Index> build_index(const std::vector<ModelRecord>& records,
                              std::span<const AttributeKey> keys, Bm25Params params) {
    if (records.empty()) {
        return Result<Bm25Index>::failure(Errc::empty_corpus, "cannot index an empty corpus");
    }
    Bm25Index index;
    index.params = params;
    for (const auto& record : records) {
        for (AttributeKey key : keys) {
            const AttributeValue* value = record.find(key);
            if (value == nullptr) {
                continue;
            }
            std::vector<std::string> tokens = tokenize(value->rendered());
            FieldIndex& field = index.fields[key];
            field.doc_length[record.registry_name] = static_cast<std::uint32_t>(tokens.size());
            for (const auto& token : tokens) {
                ++field.postings[token][record.registry_name];
            }
        }
    }
    for (auto& [key, field] : index.fields) {
        field.doc_count = field.doc_length.size();
        double total = 0.0;
        for (const auto& [doc, len] : field.doc_length) {
            total += len;
        }
        field.avg_doc_length = field.doc_count ? total / static_cast<double>(field.doc_count)
                                               : 0.0;
    }
    return index;
}

double idf(const FieldIndex& field, const std::string& term) {
    auto it = field.postings.find(term);
    double df = (it == field.postings.end()) ? 0.0 : static_cast<double>(it->second.size());
    return std::log(1.0 + static_cast<double>(field.doc_count) / (df + 0.5));
}

Result<double> score_field(const FieldIndex& field, const std::vector<std::string>& query_tokens,
                           const std::string& doc_id, Bm25Params params) {
    auto len_it = field.doc_length.find(doc_id);
    if (len_it == field.doc_length.end()) {
        return Result<double>::failure(Errc::unknown_doc,
                                       "document '" + doc_id + "' is not in the field index");
    }
    double doc_len = static_cast<double>(len_it->second);
    double score = 0.0;
    for (const auto& token : dedupe(query_tokens)) {
        auto post = field.postings.find(token);
        if (post == field.postings.end()) {
            continue;
        }
        auto tf_it = post->second.find(doc_id);
        if (tf_it == post->second.end()) {
            continue;
        }
        score += idf(field, token) * term_factor(static_cast<double>(tf_it->second), doc_len,
                                                 field.avg_doc_length, params);
    }
    return score;
}

Result<std::vector<FieldScore>> field_similarities(const Bm25Index& index,
                                                   const SearchRequest& request,
                                                   const std::string& doc_id) {
    std::vector<FieldScore> scores;
    for (const auto& [key, value] : request.attributes) {
        if (value.is_absent() || is_special(key)) {
            continue;
        }
        FieldScore entry;
        entry.key = key;
        auto field_it = index.fields.find(key);
        if (field_it != index.fields.end()) {
            const FieldIndex& field = field_it->second;
            std::vector<std::string> query_tokens = tokenize(value.rendered());
            if (!query_tokens.empty() && field.doc_count > 0) {
                // Query scored as a virtual document over the same corpus
                // statistics; its self-score is the normalization bound.
                std::map<std::string, std::uint32_t> query_counts = term_counts(query_tokens);
                double query_len = static_cast<double>(query_tokens.size());
                entry.self_score = score_counts(field, query_tokens, query_counts, query_len,
                                                index.params);
                auto len_it = field.doc_length.find(doc_id);
                if (len_it != field.doc_length.end()) {
                    auto raw = score_field(field, query_tokens, doc_id, index.params);
                    entry.raw = raw.value();
                }
                if (entry.self_score > 0.0) {
                    entry.normalized = entry.raw / entry.self_score;
                }
            }
        }
        scores.push_back(entry);
    }
    if (scores.empty()) {
        return Result<std::vector<FieldScore>>::failure(
            Errc::no_trivial_fields, "request '" + request.request_id + "' has no trivial field");
    }
    return scores;
}

Result<double> request_similarity(const Bm25Index& index, const SearchRequest& request,
                                  const std::string& doc_id) {
    auto scores = field_similarities(index, request, doc_id);
    if (!scores.ok()) {
        return scores.error();
    }
    double sum = 0.0;
    for (const auto& entry : scores.value()) {
        sum += entry.normalized;
    }
    double mean = sum / static_cast<double>(scores.value().size());
    return std::clamp(mean, 0.0, 1.0);
}

Result<std::vector<std::pair<std::string, double>>> rank(
    const Bm25Index& index, const SearchRequest& request,
    const std::vector<ModelRecord>& records) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(records.size());
    for (const auto& record : records) {
        auto similarity = request_similarity(index, request, record.registry_name);
        if (!similarity.ok()) {
            return similarity.error();
        }
        out.emplace_back(record.registry_name, similarity.value());
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    return out;
}

Result<void> save_index(const Bm25Index& index, const std::string& path) {
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& [key, field] : index.fields) {
        nlohmann::json postings = nlohmann::json::object();
        for (const auto& [term, docs] : field.postings) {
            postings[term] = docs;
        }
        fields[std::string(to_string(key))] = {{"postings", std::move(postings)},
                                               {"doc_length", field.doc_length}};
    }
    nlohmann::json encoded{{"format_version", 1},
                           {"tokenizer_version", index.tokenizer_version},
                           {"params", {{"k1", index.params.k1}, {"b", index.params.b}}},
                           {"fields", std::move(fields)}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        return Result<void>::failure(Errc::io_error, "cannot write " + path);
    }
    out << encoded.dump() << '\n';
    out.flush();
    if (!out) {
        return Result<void>::failure(Errc::io_error, "write failed for " + path);
    }
    return Result<void>::success();
}

Result<Bm25Index> load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return Result<Bm25Index>::failure(Errc::io_error, "cannot open " + path);
    }
    nlohmann::json encoded = nlohmann::json::parse(in, nullptr, false);
    if (encoded.is_discarded() || !encoded.is_object()) {
        return Result<Bm25Index>::failure(Errc::malformed_line, path + " is not a valid index");
    }
    if (!encoded.contains("format_version") || encoded["format_version"] != 1) {
        return Result<Bm25Index>::failure(Errc::version_mismatch,
                                          path + " has an unsupported index format version");
    }
    Bm25Index index;
    if (encoded.contains("tokenizer_version") && encoded["tokenizer_version"].is_string()) {
        index.tokenizer_version = encoded["tokenizer_version"].get<std::string>();
    }
    if (index.tokenizer_version != kTokenizerVersion) {
        return Result<Bm25Index>::failure(
            Errc::version_mismatch, path + " was built with tokenizer '" +
                                        index.tokenizer_version + "', expected '" +
                                        std::string(kTokenizerVersion) + "'");
    }
    if (encoded.contains("params") && encoded["params"].is_object()) {
        const auto& params = encoded["params"];
        if (params.contains("k1") && params["k1"].is_number()) {
            index.params.k1 = params["k1"].get<double>();
        }
        if (params.contains("b") && params["b"].is_number()) {
            index.params.b = params["b"].get<double>();
        }
    }
    if (index.params.k1 < 0.0 || index.params.b < 0.0 || index.params.b > 1.0) {
        return Result<Bm25Index>::failure(Errc::version_mismatch,
                                          path + " carries out-of-range ranking parameters");
    }
    if (!encoded.contains("fields") || !encoded["fields"].is_object()) {
        return Result<Bm25Index>::failure(Errc::malformed_line, path + " has no field table");
    }
    for (const auto& [name, payload] : encoded["fields"].items()) {
        auto key = attribute_key_from(name);
        if (!key || is_special(*key)) {
            return Result<Bm25Index>::failure(Errc::malformed_line,
                                              path + " indexes unexpected field '" + name + "'");
        }
        FieldIndex field;
        if (payload.contains("doc_length") && payload["doc_length"].is_object()) {
            for (const auto& [doc, len] : payload["doc_length"].items()) {
                if (!len.is_number_unsigned()) {
                    return Result<Bm25Index>::failure(Errc::malformed_line,
                                                      path + " has a non-integer doc length");
                }
                field.doc_length[doc] = len.get<std::uint32_t>();
            }
        }
        if (payload.contains("postings") && payload["postings"].is_object()) {
            for (const auto& [term, docs] : payload["postings"].items()) {
                if (!docs.is_object()) {
                    return Result<Bm25Index>::failure(Errc::malformed_line,
                                                      path + " has a malformed posting list");
                }
                for (const auto& [doc, tf] : docs.items()) {
                    if (!tf.is_number_unsigned() || !field.doc_length.count(doc)) {
                        return Result<Bm25Index>::failure(
                            Errc::malformed_line,
                            path + " posting references unknown document '" + doc + "'");
                    }
                    field.postings[term][doc] = tf.get<std::uint32_t>();
                }
            }
        }
        field.doc_count = field.doc_length.size();
        double total = 0.0;
        for (const auto& [doc, len] : field.doc_length) {
            total += len;
        }
        field.avg_doc_length = field.doc_count ? total / static_cast<double>(field.doc_count)
                                               : 0.0;
        index.fields[*key] = std::move(field);
    }
    return index;
}

}  // namespace modelmatch
