#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "modelmatch/bm25.hpp"
#include "modelmatch/chat_client.hpp"
#include "modelmatch/result.hpp"
#include "modelmatch/selection.hpp"

namespace modelmatch {

/// Chat endpoint settings. The credential is read from the named environment
/// variable at call time; config files never hold the secret itself and
/// loading rejects keys that look like one.
struct ChatConfig {
    std::string endpoint;  // empty = no endpoint configured
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4";
    std::string credential_env = "MODELMATCH_API_KEY";
    GenerationParams params;
    int timeout_seconds = 30;
};

struct AppConfig {
    std::string corpus_path = "corpus.jsonl";
    std::string index_path = "index.json";
    std::string requests_path = "requests.jsonl";
    ChatConfig chat;
    Bm25Params bm25;
    SelectionConfig selection;
    std::size_t parallelism = 4;
    bool offline = true;
    std::string assets_dir;  // optional override directory for bundled assets
};

Result<AppConfig> config_from_json(const nlohmann::json& encoded);
Result<AppConfig> load_config(const std::string& path);

/// Guards network operations: offline mode makes any of them a startup
/// error, named after the operation that needed the network.
Result<void> require_online(const AppConfig& config, std::string_view operation);

/// Builds the HTTP chat options from config. Pre: endpoint configured.
HttpChatClient::Options chat_options(const AppConfig& config);

}  // namespace modelmatch
