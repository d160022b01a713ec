#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modelmatch/attributes.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

/// Bumped whenever tokenize() changes behavior; stored in persisted indexes
/// so stale index files are rejected instead of silently mis-scoring.
inline constexpr std::string_view kTokenizerVersion = "ascii-fold-1";

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    bool operator==(const Bm25Params&) const = default;
};

/// Lower-cases ASCII and Latin-1 letters, splits on ASCII non-alphanumeric
/// bytes, keeps other non-ASCII bytes as word characters, and drops tokens
/// shorter than 2 code points. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

/// Inverted index over one attribute's documents.
struct FieldIndex {
    std::map<std::string, std::map<std::string, std::uint32_t>> postings;  // term -> doc -> tf
    std::map<std::string, std::uint32_t> doc_length;
    double avg_doc_length = 0.0;
    std::size_t doc_count = 0;
};

struct Bm25Index {
    std::map<AttributeKey, FieldIndex> fields;
    Bm25Params params;
    std::string tokenizer_version = std::string(kTokenizerVersion);
};

/// One document per (record, key) with a non-Absent value, keyed by
/// registry_name; the document text is the value's flat rendering.
Result<Bm25Index> build_index(const std::vector<ModelRecord>& records,
                              std::span<const AttributeKey> keys, Bm25Params params);

inline Result<Bm25Index> build_index(const std::vector<ModelRecord>& records,
                                     Bm25Params params = {}) {
    return build_index(records, trivial_attribute_keys(), params);
}

double idf(const FieldIndex& field, const std::string& term);

Result<double> score_field(const FieldIndex& field, const std::vector<std::string>& query_tokens,
                           const std::string& doc_id, Bm25Params params);

/// Per-field similarity breakdown: raw BM25 score, the query's self-score
/// (same field statistics, query as virtual document), and their ratio.
struct FieldScore {
    AttributeKey key = AttributeKey::function;
    double raw = 0.0;
    double self_score = 0.0;
    double normalized = 0.0;  // raw / self_score, 0 when self_score is 0
};

/// One FieldScore per trivial key present in the request, in key order.
/// Documents the candidate lacks score 0; so do fields absent from the
/// whole corpus.
Result<std::vector<FieldScore>> field_similarities(const Bm25Index& index,
                                                   const SearchRequest& request,
                                                   const std::string& doc_id);

/// Mean of the normalized per-field scores, clamped to [0, 1]. Identical
/// text in every requested field yields exactly 1.
Result<double> request_similarity(const Bm25Index& index, const SearchRequest& request,
                                  const std::string& doc_id);

/// All records scored against the request, sorted by score descending with
/// ascending registry_name as the tie-break.
Result<std::vector<std::pair<std::string, double>>> rank(
    const Bm25Index& index, const SearchRequest& request,
    const std::vector<ModelRecord>& records);

// Versioned persistence: a params/tokenizer tag mismatch on load is an error.
Result<void> save_index(const Bm25Index& index, const std::string& path);
Result<Bm25Index> load_index(const std::string& path);

}  // namespace modelmatch
