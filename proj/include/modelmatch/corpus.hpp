#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modelmatch/attributes.hpp"
#include "modelmatch/card.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

/// Corpus-level descriptive statistics. Medians use the lower-median
/// convention on even counts so reported values stay integral.
struct CorpusStats {
    std::size_t total = 0;          // models seen across records and listings
    std::size_t valid = 0;          // records backed by a non-empty card
    std::size_t zero_download = 0;  // valid records whose downloads count is 0
    std::optional<long long> median_contributors;
    std::optional<long long> median_commits;
    std::optional<long long> median_downloads;
    std::optional<long long> median_likes;
    std::map<AttributeKey, std::size_t> presence;  // non-Absent value count per key
};

// Line-oriented persistence: one JSON object per line, canonical key order.
// load(store(x)) == x; a line that fails to parse reports its line number.
Result<std::vector<ModelRecord>> load_corpus(const std::string& path);
Result<void> store_corpus(const std::vector<ModelRecord>& records, const std::string& path);
Result<std::vector<SearchRequest>> load_requests(const std::string& path);
Result<void> store_requests(const std::vector<SearchRequest>& requests, const std::string& path);
Result<std::vector<HubListing>> load_listings(const std::string& path);
Result<void> store_listings(const std::vector<HubListing>& listings, const std::string& path);

/// Lower median: for even n returns the smaller of the two central values.
/// Pre: values non-empty.
long long lower_median(std::vector<long long> values);

/// Counter medians come from listings when any are given, otherwise from the
/// records' own count attributes. Fails only when both inputs are empty.
Result<CorpusStats> corpus_stats(const std::vector<ModelRecord>& records,
                                 const std::vector<HubListing>& listings);

std::string format_stats(const CorpusStats& stats);

}  // namespace modelmatch
