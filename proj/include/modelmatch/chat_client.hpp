#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "modelmatch/result.hpp"

namespace modelmatch {

struct ChatMessage {
    std::string role;  // "system", "user", "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct GenerationParams {
    double temperature = 0.0;
    double top_p = 0.95;
    std::size_t max_tokens = 1024;
};

struct RetryPolicy {
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
    double backoff_multiplier = 2.0;
};

/// Abstract chat-completions endpoint. complete() returns the assistant
/// message content for one exchange.
class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual Result<std::string> complete(const std::vector<ChatMessage>& messages,
                                         const GenerationParams& params) = 0;
};

/// Stable digest of a message list, used to key canned responses.
std::string chat_digest(const std::vector<ChatMessage>& messages);

/// HTTP client for a chat-completions-compatible endpoint. The credential is
/// read from the environment variable named in options; it is never logged
/// and never appears in error messages.
class HttpChatClient : public ChatClient {
  public:
    struct Options {
        std::string endpoint;  // scheme://host[:port]
        std::string path = "/v1/chat/completions";
        std::string model;
        std::string credential_env;  // name of the env var holding the bearer token
        std::chrono::milliseconds timeout{30000};
        RetryPolicy retry;
    };

    explicit HttpChatClient(Options options) : options_(std::move(options)) {}

    Result<std::string> complete(const std::vector<ChatMessage>& messages,
                                 const GenerationParams& params) override;

  private:
    Options options_;
};

/// Deterministic stand-in for tests and offline fixtures. Responses come
/// from, in order: the queued list, the per-digest map, canned files named
/// <fixtures_dir>/<digest>.txt, then the default response if set.
class FixtureChatClient : public ChatClient {
  public:
    FixtureChatClient() = default;
    explicit FixtureChatClient(std::string fixtures_dir)
        : fixtures_dir_(std::move(fixtures_dir)) {}

    void push_response(std::string response) { queue_.push_back(std::move(response)); }
    void add_response(const std::vector<ChatMessage>& messages, std::string response);
    void set_default_response(std::string response) {
        default_ = std::move(response);
        has_default_ = true;
    }

    std::size_t call_count() const { return calls_; }
    const std::vector<ChatMessage>& last_messages() const { return last_messages_; }

    Result<std::string> complete(const std::vector<ChatMessage>& messages,
                                 const GenerationParams& params) override;

  private:
    std::string fixtures_dir_;
    std::deque<std::string> queue_;
    std::map<std::string, std::string> by_digest_;
    std::string default_;
    bool has_default_ = false;
    std::size_t calls_ = 0;
    std::vector<ChatMessage> last_messages_;
};

}  // namespace modelmatch
