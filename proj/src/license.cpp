#include "modelmatch/license.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "modelmatch/assets.hpp"
#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

/// Matching key: lower-cased, every run of non-alphanumeric characters
/// (including dots) collapsed to a single hyphen. "Apache License 2.0" and
/// "apache-2.0" meet at "apache-license-2-0" / "apache-2-0" style keys.
std::string fold(std::string_view text) {
    std::string out;
    bool pending = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending && !out.empty()) {
                out.push_back('-');
            }
            pending = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending = true;
        }
    }
    return out;
}

std::optional<LicenseClass> klass_from(std::string_view name) {
    if (name == "permissive") return LicenseClass::permissive;
    if (name == "weak_copyleft") return LicenseClass::weak_copyleft;
    if (name == "strong_copyleft") return LicenseClass::strong_copyleft;
    if (name == "non_commercial") return LicenseClass::non_commercial;
    if (name == "restricted") return LicenseClass::restricted;
    if (name == "unknown") return LicenseClass::unknown;
    return std::nullopt;
}

}  // namespace

std::string_view to_string(LicenseClass klass) {
    switch (klass) {
        case LicenseClass::permissive: return "permissive";
        case LicenseClass::weak_copyleft: return "weak_copyleft";
        case LicenseClass::strong_copyleft: return "strong_copyleft";
        case LicenseClass::non_commercial: return "non_commercial";
        case LicenseClass::restricted: return "restricted";
        case LicenseClass::unknown: return "unknown";
    }
    return "unknown";
}

const LicenseTable& LicenseTable::bundled() {
    static const LicenseTable table = [] {
        auto parsed = LicenseTable::parse(assets::licenses_tsv());
        if (!parsed.ok()) {
            throw std::runtime_error("bundled license table is invalid: " +
                                     parsed.error().message);
        }
        return std::move(parsed).value();
    }();
    return table;
}

Result<LicenseTable> LicenseTable::parse(std::string_view tsv) {
    LicenseTable table;
    std::size_t line_no = 0;
    for (const auto& line : split(std::string(tsv), '\n')) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        std::vector<std::string> columns = split(line, '\t');
        if (columns.size() < 2) {
            return Result<LicenseTable>::failure(
                Errc::malformed_line,
                "license table line " + std::to_string(line_no) + " needs token and class");
        }
        std::string token = trim(columns[0]);
        auto klass = klass_from(trim(columns[1]));
        if (token.empty() || !klass) {
            return Result<LicenseTable>::failure(
                Errc::malformed_line,
                "license table line " + std::to_string(line_no) + " has an unknown class");
        }
        if (table.klass_by_token_.count(token)) {
            return Result<LicenseTable>::failure(
                Errc::malformed_line, "license table repeats token '" + token + "'");
        }
        table.tokens_.push_back(token);
        table.klass_by_token_[token] = *klass;
        table.token_by_alias_[fold(token)] = token;
        if (columns.size() >= 3) {
            for (const auto& alias : split(columns[2], ',')) {
                std::string key = fold(alias);
                if (!key.empty()) {
                    table.token_by_alias_[key] = token;
                }
            }
        }
    }
    if (table.tokens_.empty()) {
        return Result<LicenseTable>::failure(Errc::malformed_line, "license table is empty");
    }
    return table;
}

Result<LicenseTable> LicenseTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return Result<LicenseTable>::failure(Errc::io_error, "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

LicenseId LicenseTable::normalize(std::string_view text) const {
    auto it = token_by_alias_.find(fold(text));
    if (it == token_by_alias_.end()) {
        return LicenseId{"unknown", LicenseClass::unknown};
    }
    return LicenseId{it->second, klass_by_token_.at(it->second)};
}

}  // namespace modelmatch
