#include "modelmatch/config.hpp"

#include <fstream>
#include <sstream>

#include "modelmatch/constraints.hpp"

namespace modelmatch {

namespace {

Result<void> fail(const std::string& message) {
    return Result<void>::failure(Errc::invalid_argument, message);
}

Result<void> read_chat(const nlohmann::json& encoded, ChatConfig& chat) {
    for (const auto& [key, value] : encoded.items()) {
        // Secrets do not belong in config files; only the env-var name does.
        if (key == "credential" || key == "api_key" || key == "token" || key == "secret") {
            return fail("chat config must name an environment variable via credential_env, "
                        "never carry the credential itself");
        }
        if (key == "endpoint") {
            chat.endpoint = value.get<std::string>();
        } else if (key == "path") {
            chat.path = value.get<std::string>();
        } else if (key == "model") {
            chat.model = value.get<std::string>();
        } else if (key == "credential_env") {
            chat.credential_env = value.get<std::string>();
        } else if (key == "temperature") {
            chat.params.temperature = value.get<double>();
        } else if (key == "top_p") {
            chat.params.top_p = value.get<double>();
        } else if (key == "max_tokens") {
            const long long tokens = value.get<long long>();
            if (tokens <= 0) {
                return fail("chat max_tokens must be positive");
            }
            chat.params.max_tokens = static_cast<std::size_t>(tokens);
        } else if (key == "timeout_seconds") {
            chat.timeout_seconds = value.get<int>();
        } else {
            return fail("unknown chat config key '" + key + "'");
        }
    }
    if (chat.timeout_seconds <= 0) {
        return fail("chat timeout_seconds must be positive");
    }
    return Result<void>::success();
}

Result<void> read_selection(const nlohmann::json& encoded, SelectionConfig& selection) {
    for (const auto& [key, value] : encoded.items()) {
        if (key == "top_k") {
            selection.top_k = value.get<std::size_t>();
        } else if (key == "sim_threshold") {
            selection.sim_threshold = value.get<double>();
        } else if (key == "lazy_constraint_checking") {
            selection.lazy_constraint_checking = value.get<bool>();
        } else if (key == "unknown_handling") {
            auto handling = unknown_handling_from(value.get<std::string>());
            if (!handling) {
                return fail("unknown_handling must be one of treat_as_satisfied, "
                            "treat_as_violated, keep_unknown_and_rank");
            }
            selection.policy.unknown_handling = *handling;
        } else if (key == "epsilon") {
            selection.policy.epsilon = value.get<double>();
        } else {
            return fail("unknown selection config key '" + key + "'");
        }
    }
    if (selection.top_k < 1) {
        return fail("selection top_k must be at least 1");
    }
    if (selection.policy.epsilon < 0.0) {
        return fail("selection epsilon must be non-negative");
    }
    return Result<void>::success();
}

}  // namespace

Result<AppConfig> config_from_json(const nlohmann::json& encoded) {
    if (!encoded.is_object()) {
        return Result<AppConfig>::failure(Errc::invalid_argument,
                                          "config must be a JSON object");
    }
    AppConfig config;
    try {
        for (const auto& [key, value] : encoded.items()) {
            if (key == "corpus") {
                config.corpus_path = value.get<std::string>();
            } else if (key == "index") {
                config.index_path = value.get<std::string>();
            } else if (key == "requests") {
                config.requests_path = value.get<std::string>();
            } else if (key == "chat") {
                if (auto status = read_chat(value, config.chat); !status.ok()) {
                    return status.error();
                }
            } else if (key == "bm25") {
                if (value.contains("k1")) {
                    config.bm25.k1 = value["k1"].get<double>();
                }
                if (value.contains("b")) {
                    config.bm25.b = value["b"].get<double>();
                }
            } else if (key == "selection") {
                if (auto status = read_selection(value, config.selection); !status.ok()) {
                    return status.error();
                }
            } else if (key == "parallelism") {
                config.parallelism = value.get<std::size_t>();
            } else if (key == "offline") {
                config.offline = value.get<bool>();
            } else if (key == "assets_dir") {
                config.assets_dir = value.get<std::string>();
            } else {
                return Result<AppConfig>::failure(Errc::invalid_argument,
                                                  "unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& error) {
        return Result<AppConfig>::failure(Errc::invalid_argument,
                                          std::string("config value has the wrong type: ") +
                                              error.what());
    }
    if (config.bm25.k1 < 0.0 || config.bm25.b < 0.0 || config.bm25.b > 1.0) {
        return Result<AppConfig>::failure(Errc::invalid_argument,
                                          "bm25 params out of range (k1 >= 0, 0 <= b <= 1)");
    }
    if (config.parallelism < 1) {
        return Result<AppConfig>::failure(Errc::invalid_argument,
                                          "parallelism must be at least 1");
    }
    return config;
}

Result<AppConfig> load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return Result<AppConfig>::failure(Errc::io_error, "cannot open config file " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json parsed = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (parsed.is_discarded()) {
        return Result<AppConfig>::failure(Errc::invalid_argument,
                                          "config file " + path + " is not valid JSON");
    }
    return config_from_json(parsed);
}

Result<void> require_online(const AppConfig& config, std::string_view operation) {
    if (config.offline) {
        return Result<void>::failure(Errc::offline_violation,
                                     std::string(operation) +
                                         " needs the network but offline mode is on");
    }
    return Result<void>::success();
}

HttpChatClient::Options chat_options(const AppConfig& config) {
    HttpChatClient::Options options;
    options.endpoint = config.chat.endpoint;
    options.path = config.chat.path;
    options.model = config.chat.model;
    options.credential_env = config.chat.credential_env;
    options.timeout = std::chrono::seconds(config.chat.timeout_seconds);
    return options;
}

}  // namespace modelmatch
