#include "modelmatch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

template <typename T>
Result<std::vector<T>> load_lines(const std::string& path,
                                  Result<T> (*decode)(const nlohmann::json&)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return Result<std::vector<T>>::failure(Errc::io_error, "cannot open " + path);
    }
    std::vector<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
        if (parsed.is_discarded()) {
            return Result<std::vector<T>>::failure(
                Errc::malformed_line, path + ": line " + std::to_string(line_no) +
                                          " is not a valid object");
        }
        auto decoded = decode(parsed);
        if (!decoded.ok()) {
            return Result<std::vector<T>>::failure(
                Errc::malformed_line, path + ": line " + std::to_string(line_no) + ": " +
                                          decoded.error().message);
        }
        out.push_back(std::move(decoded).value());
    }
    return out;
}

template <typename T>
Result<void> store_lines(const std::vector<T>& items, const std::string& path,
                         nlohmann::json (*encode)(const T&)) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        return Result<void>::failure(Errc::io_error, "cannot write " + path);
    }
    for (const auto& item : items) {
        out << encode(item).dump() << '\n';
    }
    out.flush();
    if (!out) {
        return Result<void>::failure(Errc::io_error, "write failed for " + path);
    }
    return Result<void>::success();
}

std::optional<long long> count_attribute(const ModelRecord& record, AttributeKey key) {
    const AttributeValue* value = record.find(key);
    if (value == nullptr || value->kind() != ValueKind::quantity) {
        return std::nullopt;
    }
    return static_cast<long long>(value->as_quantity().amount);
}

void append_median_line(std::ostringstream& os, const char* label,
                        const std::optional<long long>& value) {
    os << "median " << label << ": ";
    if (value) {
        os << *value;
    } else {
        os << "n/a";
    }
    os << '\n';
}

}  // namespace

Result<std::vector<ModelRecord>> load_corpus(const std::string& path) {
    auto loaded = load_lines<ModelRecord>(path, &record_from_json);
    if (!loaded.ok()) {
        return loaded;
    }
    std::set<std::string> seen;
    for (const auto& record : loaded.value()) {
        if (!seen.insert(record.registry_name).second) {
            return Result<std::vector<ModelRecord>>::failure(
                Errc::malformed_line,
                path + ": duplicate registry_name '" + record.registry_name + "'");
        }
    }
    return loaded;
}

Result<void> store_corpus(const std::vector<ModelRecord>& records, const std::string& path) {
    return store_lines<ModelRecord>(records, path, &record_to_json);
}

Result<std::vector<SearchRequest>> load_requests(const std::string& path) {
    return load_lines<SearchRequest>(path, &request_from_json);
}

Result<void> store_requests(const std::vector<SearchRequest>& requests, const std::string& path) {
    return store_lines<SearchRequest>(requests, path, &request_to_json);
}

Result<std::vector<HubListing>> load_listings(const std::string& path) {
    return load_lines<HubListing>(path, &listing_from_json);
}

Result<void> store_listings(const std::vector<HubListing>& listings, const std::string& path) {
    return store_lines<HubListing>(listings, path, &listing_to_json);
}

long long lower_median(std::vector<long long> values) {
    std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    return values[mid];
}

Result<CorpusStats> corpus_stats(const std::vector<ModelRecord>& records,
                                 const std::vector<HubListing>& listings) {
    if (records.empty() && listings.empty()) {
        return Result<CorpusStats>::failure(Errc::empty_corpus,
                                            "no records or listings to summarize");
    }
    CorpusStats stats;
    std::set<std::string> names;
    for (const auto& record : records) {
        names.insert(record.registry_name);
    }
    for (const auto& listing : listings) {
        names.insert(listing.registry_name);
    }
    stats.total = names.size();
    stats.valid = records.size();

    for (const auto& record : records) {
        for (const auto& [key, entry] : record.attributes) {
            if (!entry.value.is_absent()) {
                ++stats.presence[key];
            }
        }
        auto downloads = count_attribute(record, AttributeKey::downloads);
        if (downloads && *downloads == 0) {
            ++stats.zero_download;
        }
    }

    std::vector<long long> contributors, commits, downloads, likes;
    if (!listings.empty()) {
        for (const auto& listing : listings) {
            contributors.push_back(listing.contributors);
            commits.push_back(listing.commits);
            downloads.push_back(listing.downloads);
            likes.push_back(listing.likes);
        }
    } else {
        for (const auto& record : records) {
            if (auto v = count_attribute(record, AttributeKey::contributors)) {
                contributors.push_back(*v);
            }
            if (auto v = count_attribute(record, AttributeKey::commits)) {
                commits.push_back(*v);
            }
            if (auto v = count_attribute(record, AttributeKey::downloads)) {
                downloads.push_back(*v);
            }
            if (auto v = count_attribute(record, AttributeKey::likes)) {
                likes.push_back(*v);
            }
        }
    }
    if (!contributors.empty()) {
        stats.median_contributors = lower_median(std::move(contributors));
    }
    if (!commits.empty()) {
        stats.median_commits = lower_median(std::move(commits));
    }
    if (!downloads.empty()) {
        stats.median_downloads = lower_median(std::move(downloads));
    }
    if (!likes.empty()) {
        stats.median_likes = lower_median(std::move(likes));
    }
    return stats;
}

std::string format_stats(const CorpusStats& stats) {
    std::ostringstream os;
    os << "total models: " << stats.total << '\n';
    os << "valid cards: " << stats.valid << '\n';
    os << "zero downloads: " << stats.zero_download << '\n';
    append_median_line(os, "contributors", stats.median_contributors);
    append_median_line(os, "commits", stats.median_commits);
    append_median_line(os, "downloads", stats.median_downloads);
    append_median_line(os, "likes", stats.median_likes);
    os << "attribute presence:\n";
    for (const auto& [key, count] : stats.presence) {
        os << "  " << to_string(key) << ": " << count << '\n';
    }
    return os.str();
}

}  // namespace modelmatch
