#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "modelmatch/bm25.hpp"
#include "modelmatch/selection.hpp"

namespace modelmatch {

/// Search over an atomically swappable (corpus, index) pair. Handlers are
/// plain functions of strings so they can be tested without sockets; the
/// HTTP layer lives in ServiceServer.
class SearchService {
  public:
    struct Reply {
        int status = 200;
        std::string body;  // always application/json
    };

    SearchService(SelectionConfig config, ConstraintChecker checker)
        : config_(config), checker_(std::move(checker)) {}

    /// Swaps in a new corpus/index snapshot. Rejects an empty corpus and an
    /// index whose documents are unknown to the corpus.
    Result<void> load(std::vector<ModelRecord> corpus, Bm25Index index);

    bool loaded() const;

    Reply handle_health() const;
    Reply handle_model(const std::string& registry_name) const;
    Reply handle_search(const std::string& body) const;

  private:
    struct State {
        std::vector<ModelRecord> corpus;
        Bm25Index index;
    };

    std::shared_ptr<const State> snapshot() const;

    mutable std::mutex mutex_;
    std::shared_ptr<const State> state_;
    SelectionConfig config_;
    ConstraintChecker checker_;
};

/// HTTP/1.1 front end for a SearchService: POST /search, GET
/// /models/<name>, GET /healthz.
class ServiceServer {
  public:
    explicit ServiceServer(SearchService& service);
    ~ServiceServer();

    ServiceServer(const ServiceServer&) = delete;
    ServiceServer& operator=(const ServiceServer&) = delete;

    /// Binds and serves on a background thread. port 0 picks a free port;
    /// the bound port is returned.
    Result<int> start(const std::string& host, int port);

    /// Blocks until stop() is called (or the process dies).
    void wait();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace modelmatch
