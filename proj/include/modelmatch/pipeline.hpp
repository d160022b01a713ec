#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modelmatch/attributes.hpp"
#include "modelmatch/card.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/corpus.hpp"
#include "modelmatch/result.hpp"

namespace modelmatch {

/// Downloads-per-month gate used for experimental corpus views.
inline constexpr long long kExperimentalDownloadsThreshold = 2000;

struct IngestOptions {
    std::string cards_dir;
    std::string listings_path;               // empty = no listings file
    std::optional<long long> min_downloads;  // unset = keep everything
};

struct IngestOutput {
    std::vector<ModelRecord> records;
    std::vector<HubListing> listings;
    CorpusStats stats;
    std::size_t skipped_invalid = 0;
    std::size_t skipped_below_threshold = 0;
    std::vector<std::string> warnings;
};

/// Walks <cards_dir>/<registry_name>/README.md in name order, parses each
/// card, populates publicity fields (joined with listings when given), and
/// drops empty cards. With min_downloads set, records without a downloads
/// count at or above it are dropped too.
Result<IngestOutput> run_ingest(const IngestOptions& options);

struct ExtractOptions {
    std::string cards_dir;
    ChatClient* client = nullptr;  // nullptr = heuristic fallback
    std::size_t parallelism = 4;
};

struct ExtractOutput {
    std::vector<ModelRecord> records;
    std::size_t extracted = 0;  // records whose card was re-read and processed
    std::vector<std::string> warnings;
};

/// Re-reads each record's card and replaces its literature attributes with
/// fresh extraction output, keeping publicity values on top via
/// consolidation. Records whose card is missing pass through unchanged with
/// a warning.
Result<ExtractOutput> run_extract(const std::vector<ModelRecord>& corpus,
                                  const ExtractOptions& options);

}  // namespace modelmatch
