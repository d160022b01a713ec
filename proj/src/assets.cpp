#include "modelmatch/assets.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "embedded_assets.hpp"

namespace modelmatch::assets {

std::string_view embedded(std::string_view name) {
    for (const auto& asset : generated::kAssets) {
        if (asset.name == name) {
            return asset.content;
        }
    }
    throw std::out_of_range("no embedded asset named '" + std::string(name) + "'");
}

std::span<const std::string_view> names() {
    static const auto list = [] {
        std::array<std::string_view, std::size(generated::kAssets)> out{};
        for (std::size_t i = 0; i < std::size(generated::kAssets); ++i) {
            out[i] = generated::kAssets[i].name;
        }
        return out;
    }();
    return list;
}

std::string_view licenses_tsv() { return embedded("licenses.tsv"); }
std::string_view closed_sets_json() { return embedded("closed_sets.json"); }
std::string_view synonyms_tsv() { return embedded("synonyms.tsv"); }
std::string_view request_incompat_tsv() { return embedded("request_incompat.tsv"); }
std::string_view extraction_system_prompt() { return embedded("prompts/extraction_system.txt"); }
std::string_view extraction_shots_json() { return embedded("prompts/extraction_shots.json"); }
std::string_view extraction_validation_prompt() {
    return embedded("prompts/extraction_validation.txt");
}
std::string_view mutation_infill_prompt() { return embedded("prompts/mutation_infill.txt"); }
std::string_view request_validity_prompt() { return embedded("prompts/request_validity.txt"); }

std::string_view constraint_prompt(AttributeKey key) {
    return embedded("prompts/constraint_" + std::string(to_string(key)) + ".txt");
}

}  // namespace modelmatch::assets

namespace modelmatch {

std::string AssetStore::text(std::string_view name) const {
    if (!override_dir_.empty()) {
        std::ifstream in(override_dir_ + "/" + std::string(name), std::ios::binary);
        if (in) {
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }
    }
    return std::string(assets::embedded(name));
}

}  // namespace modelmatch
