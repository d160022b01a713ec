#include "modelmatch/chat_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "modelmatch/util.hpp"

namespace modelmatch {

namespace {

bool retryable_status(int status) {
    return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

std::chrono::milliseconds backoff_for(const RetryPolicy& retry, std::size_t failures) {
    double scale = 1.0;
    for (std::size_t i = 1; i < failures; ++i) {
        scale *= retry.backoff_multiplier;
    }
    return std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(retry.initial_backoff.count()) * scale));
}

std::optional<std::chrono::milliseconds> retry_after_hint(const httplib::Response& res) {
    std::string after = res.get_header_value("Retry-After");
    if (after.empty()) {
        return std::nullopt;
    }
    char* end = nullptr;
    long seconds = std::strtol(after.c_str(), &end, 10);
    if (end == after.c_str() || seconds < 0) {
        return std::nullopt;
    }
    // cap the server's ask so a hostile header cannot stall us
    return std::min(std::chrono::milliseconds(seconds * 1000),
                    std::chrono::milliseconds(10000));
}

}  // namespace

std::string chat_digest(const std::vector<ChatMessage>& messages) {
    nlohmann::json encoded = nlohmann::json::array();
    for (const auto& message : messages) {
        encoded.push_back({{"role", message.role}, {"content", message.content}});
    }
    return sha256_hex(encoded.dump());
}

Result<std::string> HttpChatClient::complete(const std::vector<ChatMessage>& messages,
                                             const GenerationParams& params) {
    if (options_.endpoint.empty()) {
        return Result<std::string>::failure(Errc::invalid_argument,
                                            "chat client has no endpoint configured");
    }
    nlohmann::json body{{"model", options_.model},
                        {"temperature", params.temperature},
                        {"top_p", params.top_p},
                        {"max_tokens", params.max_tokens}};
    nlohmann::json rendered = nlohmann::json::array();
    for (const auto& message : messages) {
        rendered.push_back({{"role", message.role}, {"content", message.content}});
    }
    body["messages"] = std::move(rendered);
    const std::string payload = body.dump();

    httplib::Client client(options_.endpoint);
    auto timeout = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    client.set_connection_timeout(timeout.count(), 0);
    client.set_read_timeout(timeout.count(), 0);
    client.set_write_timeout(timeout.count(), 0);

    httplib::Headers headers;
    if (!options_.credential_env.empty()) {
        const char* credential = std::getenv(options_.credential_env.c_str());
        if (credential != nullptr && credential[0] != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + credential);
        }
    }

    std::size_t attempts = std::max<std::size_t>(options_.retry.max_attempts, 1);
    Error last{Errc::network_error, "chat endpoint unreachable"};
    std::chrono::milliseconds next_sleep{0};
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(next_sleep);
        }
        auto res = client.Post(options_.path, headers, payload, "application/json");
        if (!res) {
            Errc code = (res.error() == httplib::Error::ConnectionTimeout ||
                         res.error() == httplib::Error::Read || res.error() == httplib::Error::Write)
                            ? Errc::timeout
                            : Errc::network_error;
            last = Error{code, "chat request failed: " +
                                   std::string(httplib::to_string(res.error()))};
            next_sleep = backoff_for(options_.retry, attempt + 1);
            continue;
        }
        if (retryable_status(res->status)) {
            if (res->status == 429) {
                last = Error{Errc::rate_limited, "chat endpoint rate limited"};
                next_sleep = retry_after_hint(*res).value_or(
                    backoff_for(options_.retry, attempt + 1));
            } else {
                last = Error{Errc::network_error,
                             "chat endpoint returned status " + std::to_string(res->status)};
                next_sleep = backoff_for(options_.retry, attempt + 1);
            }
            continue;
        }
        if (res->status != 200) {
            return Result<std::string>::failure(
                Errc::network_error,
                "chat endpoint returned status " + std::to_string(res->status));
        }
        nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") ||
            !parsed["choices"].is_array() || parsed["choices"].empty()) {
            return Result<std::string>::failure(Errc::network_error,
                                                "chat response has no choices");
        }
        const auto& first = parsed["choices"][0];
        if (!first.contains("message") || !first["message"].contains("content") ||
            !first["message"]["content"].is_string()) {
            return Result<std::string>::failure(Errc::network_error,
                                                "chat response has no message content");
        }
        return first["message"]["content"].get<std::string>();
    }
    return Result<std::string>::failure(last.code, last.message);
}

void FixtureChatClient::add_response(const std::vector<ChatMessage>& messages,
                                     std::string response) {
    by_digest_[chat_digest(messages)] = std::move(response);
}

Result<std::string> FixtureChatClient::complete(const std::vector<ChatMessage>& messages,
                                                const GenerationParams& params) {
    (void)params;
    ++calls_;
    last_messages_ = messages;
    if (!queue_.empty()) {
        std::string response = std::move(queue_.front());
        queue_.pop_front();
        return response;
    }
    const std::string digest = chat_digest(messages);
    if (auto it = by_digest_.find(digest); it != by_digest_.end()) {
        return it->second;
    }
    if (!fixtures_dir_.empty()) {
        std::ifstream in(fixtures_dir_ + "/" + digest + ".txt", std::ios::binary);
        if (in) {
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }
    }
    if (has_default_) {
        return default_;
    }
    return Result<std::string>::failure(Errc::not_found,
                                        "no canned response for digest " + digest);
}

}  // namespace modelmatch
