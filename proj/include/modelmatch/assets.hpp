#pragma once

#include <span>
#include <string>
#include <string_view>

#include "modelmatch/attributes.hpp"

namespace modelmatch::assets {

/// Embedded copy of assets/<name>, baked in at build time. Throws
/// std::out_of_range for names that do not exist.
std::string_view embedded(std::string_view name);
std::span<const std::string_view> names();

std::string_view licenses_tsv();
std::string_view closed_sets_json();
std::string_view synonyms_tsv();
std::string_view request_incompat_tsv();
std::string_view extraction_system_prompt();
std::string_view extraction_shots_json();
std::string_view extraction_validation_prompt();
std::string_view mutation_infill_prompt();
std::string_view request_validity_prompt();

/// Prompt template for one special attribute check. Pre: is_special(key).
std::string_view constraint_prompt(AttributeKey key);

}  // namespace modelmatch::assets

namespace modelmatch {

/// Resolves asset text from an override directory when the file exists
/// there, else falls back to the embedded copy.
class AssetStore {
  public:
    AssetStore() = default;
    explicit AssetStore(std::string override_dir) : override_dir_(std::move(override_dir)) {}

    std::string text(std::string_view name) const;

  private:
    std::string override_dir_;
};

}  // namespace modelmatch
