#include "modelmatch/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modelmatch/extraction.hpp"
#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

namespace fs = std::filesystem;

Result<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return Result<std::string>::failure(Errc::io_error,
                                            "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::optional<long long> downloads_of(const ModelRecord& record) {
    const AttributeValue* value = record.find(AttributeKey::downloads);
    if (value == nullptr || value->kind() != ValueKind::quantity) {
        return std::nullopt;
    }
    return static_cast<long long>(value->as_quantity().amount);
}

}  // namespace

Result<IngestOutput> run_ingest(const IngestOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(options.cards_dir, ec)) {
        return Result<IngestOutput>::failure(Errc::io_error,
                                             options.cards_dir + " is not a directory");
    }

    IngestOutput out;
    std::map<std::string, HubListing> listing_by_name;
    if (!options.listings_path.empty()) {
        auto listings = load_listings(options.listings_path);
        if (!listings.ok()) {
            return listings.error();
        }
        out.listings = std::move(listings).value();
        for (const HubListing& listing : out.listings) {
            listing_by_name.emplace(listing.registry_name, listing);
        }
    }

    std::vector<std::string> names;
    for (const fs::directory_entry& entry : fs::directory_iterator(options.cards_dir, ec)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "README.md")) {
            names.push_back(entry.path().filename().string());
        }
    }
    if (ec) {
        return Result<IngestOutput>::failure(Errc::io_error,
                                             "cannot list " + options.cards_dir + ": " +
                                                 ec.message());
    }
    std::sort(names.begin(), names.end());

    for (const std::string& name : names) {
        auto raw = read_file(fs::path(options.cards_dir) / name / "README.md");
        if (!raw.ok()) {
            return raw.error();
        }
        auto card = parse_card(raw.value(), name);
        if (!card.ok()) {
            out.warnings.push_back(name + ": " + card.error().message + ", record skipped");
            ++out.skipped_invalid;
            continue;
        }
        if (card.value().front_matter_warning) {
            out.warnings.push_back(name + ": malformed front matter ignored");
        }
        if (!is_valid_card(card.value())) {
            ++out.skipped_invalid;
            continue;
        }
        std::optional<HubListing> listing;
        if (auto it = listing_by_name.find(name); it != listing_by_name.end()) {
            listing = it->second;
        }
        PublicityFields publicity = publicity_to_fields(card.value(), listing);

        ModelRecord record;
        record.registry_name = name;
        record.card_digest = sha256_hex(card.value().raw);
        record.attributes = consolidate_fields({}, Extractor::manual, publicity.fields);
        if (options.min_downloads.has_value()) {
            auto downloads = downloads_of(record);
            if (!downloads.has_value() || *downloads < *options.min_downloads) {
                ++out.skipped_below_threshold;
                continue;
            }
        }
        for (const ValidationIssue& issue : validate_record(record)) {
            out.warnings.push_back(name + ": " + issue.message);
        }
        out.records.push_back(std::move(record));
    }

    auto stats = corpus_stats(out.records, out.listings);
    if (!stats.ok()) {
        return stats.error();
    }
    out.stats = std::move(stats).value();
    return out;
}

Result<ExtractOutput> run_extract(const std::vector<ModelRecord>& corpus,
                                  const ExtractOptions& options) {
    if (corpus.empty()) {
        return Result<ExtractOutput>::failure(Errc::empty_corpus, "no records to extract");
    }
    struct Slot {
        ModelRecord record;
        std::optional<Error> error;
        std::vector<std::string> warnings;
        bool extracted = false;
    };
    std::vector<Slot> slots(corpus.size());

    parallel_for(corpus.size(), std::max<std::size_t>(options.parallelism, 1),
                 [&](std::size_t i) {
        const ModelRecord& original = corpus[i];
        Slot& slot = slots[i];
        slot.record = original;

        auto raw = read_file(fs::path(options.cards_dir) / original.registry_name /
                             "README.md");
        if (!raw.ok()) {
            slot.warnings.push_back(original.registry_name +
                                    ": card unavailable, record kept as ingested");
            return;
        }
        auto card = parse_card(raw.value(), original.registry_name);
        if (!card.ok()) {
            slot.warnings.push_back(original.registry_name + ": " + card.error().message +
                                    ", record kept as ingested");
            return;
        }
        const std::string digest = sha256_hex(card.value().raw);
        if (!original.card_digest.empty() && digest != original.card_digest) {
            slot.warnings.push_back(original.registry_name +
                                    ": card changed since ingest, re-extracting anyway");
        }

        ExtractionResult extraction;
        bool used_llm = false;
        if (options.client != nullptr) {
            auto remote = extract_metadata(card.value(), *options.client);
            if (!remote.ok()) {
                slot.error = remote.error();
                return;
            }
            extraction = std::move(remote).value();
            used_llm = extraction.schema_valid;
            if (!extraction.schema_valid) {
                slot.warnings.push_back(original.registry_name +
                                        ": endpoint reply unusable, heuristics used instead");
                extraction = fallback_extract(card.value());
            }
        } else {
            extraction = fallback_extract(card.value());
        }

        std::map<AttributeKey, AttributeValue> publicity;
        for (const auto& [key, entry] : original.attributes) {
            if (entry.provenance.source == Source::publicity_tag ||
                entry.provenance.source == Source::consolidated) {
                publicity.emplace(key, entry.value);
            }
        }
        slot.record.attributes = consolidate_fields(
            extraction.fields, used_llm ? Extractor::llm : Extractor::heuristic, publicity);
        slot.record.card_digest = digest;
        slot.extracted = true;
    });

    ExtractOutput out;
    out.records.reserve(slots.size());
    for (Slot& slot : slots) {
        if (slot.error.has_value()) {
            return Result<ExtractOutput>::failure(slot.error->code, slot.error->message);
        }
        out.warnings.insert(out.warnings.end(), slot.warnings.begin(), slot.warnings.end());
        out.extracted += slot.extracted ? 1 : 0;
        out.records.push_back(std::move(slot.record));
    }
    return out;
}

}  // namespace modelmatch
