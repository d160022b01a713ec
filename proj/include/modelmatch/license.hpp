#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "modelmatch/result.hpp"

namespace modelmatch {

enum class LicenseClass : std::uint8_t {
    permissive,
    weak_copyleft,
    strong_copyleft,
    non_commercial,
    restricted,
    unknown,
};

std::string_view to_string(LicenseClass klass);

/// A normalized license identity. Texts that match no table entry normalize
/// to the token "unknown" with the unknown class.
struct LicenseId {
    std::string token;
    LicenseClass klass = LicenseClass::unknown;

    bool operator==(const LicenseId&) const = default;
};

/// Token → class table with case- and punctuation-insensitive aliases.
/// Shipped as a plain-text asset (token, class, comma-separated aliases per
/// line, tab-separated) so deployments can extend it without code changes.
class LicenseTable {
  public:
    static const LicenseTable& bundled();
    static Result<LicenseTable> parse(std::string_view tsv);
    static Result<LicenseTable> load(const std::string& path);

    LicenseId normalize(std::string_view text) const;

    /// All known tokens in table order.
    const std::vector<std::string>& tokens() const { return tokens_; }

  private:
    std::vector<std::string> tokens_;
    std::map<std::string, LicenseClass> klass_by_token_;
    std::map<std::string, std::string> token_by_alias_;  // folded alias -> token
};

}  // namespace modelmatch
