#include "modelmatch/service.hpp"

#include <set>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace modelmatch {

namespace {

std::string error_body(const std::string& message) {
    return nlohmann::json{{"error", message}}.dump();
}

}  // namespace

Result<void> SearchService::load(std::vector<ModelRecord> corpus, Bm25Index index) {
    if (corpus.empty()) {
        return Result<void>::failure(Errc::empty_corpus, "refusing to serve an empty corpus");
    }
    std::set<std::string> names;
    for (const ModelRecord& record : corpus) {
        names.insert(record.registry_name);
    }
    for (const auto& [key, field] : index.fields) {
        for (const auto& [doc, length] : field.doc_length) {
            if (names.count(doc) == 0) {
                return Result<void>::failure(Errc::unknown_doc,
                                             "index document '" + doc +
                                                 "' is missing from the corpus");
            }
        }
    }
    auto fresh = std::make_shared<State>();
    fresh->corpus = std::move(corpus);
    fresh->index = std::move(index);
    std::lock_guard<std::mutex> lock(mutex_);
    state_ = std::move(fresh);
    return Result<void>::success();
}

bool SearchService::loaded() const { return snapshot() != nullptr; }

std::shared_ptr<const SearchService::State> SearchService::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return state_;
}

SearchService::Reply SearchService::handle_health() const {
    auto state = snapshot();
    if (state == nullptr) {
        return {503, nlohmann::json{{"status", "loading"}}.dump()};
    }
    return {200, nlohmann::json{{"status", "ok"},
                                {"models", state->corpus.size()},
                                {"fields", state->index.fields.size()}}
                     .dump()};
}

SearchService::Reply SearchService::handle_model(const std::string& registry_name) const {
    auto state = snapshot();
    if (state == nullptr) {
        return {503, error_body("corpus not loaded yet")};
    }
    for (const ModelRecord& record : state->corpus) {
        if (record.registry_name == registry_name) {
            return {200, record_to_json(record).dump()};
        }
    }
    return {404, error_body("unknown model " + registry_name)};
}

SearchService::Reply SearchService::handle_search(const std::string& body) const {
    auto state = snapshot();
    if (state == nullptr) {
        return {503, error_body("index not loaded yet")};
    }
    nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        return {400, error_body("request body is not valid JSON")};
    }
    auto request = request_from_json(parsed);
    if (!request.ok()) {
        return {400, error_body(request.error().message)};
    }
    if (auto shape = validate_request_shape(request.value()); !shape.ok()) {
        return {400, error_body(shape.error().message)};
    }
    auto matches = select(request.value(), state->corpus, state->index, config_, checker_);
    if (!matches.ok()) {
        int status = matches.code() == Errc::no_trivial_fields ? 400 : 500;
        return {status, error_body(matches.error().message)};
    }
    nlohmann::json rendered = nlohmann::json::array();
    for (const RankedMatch& match : matches.value()) {
        nlohmann::json verdicts = nlohmann::json::array();
        for (const ConstraintVerdict& verdict : match.verdicts) {
            verdicts.push_back({{"key", std::string(to_string(verdict.key))},
                                {"outcome", std::string(to_string(verdict.outcome))},
                                {"method", std::string(to_string(verdict.method))},
                                {"rationale", verdict.rationale}});
        }
        rendered.push_back({{"registry_name", match.registry_name},
                            {"rank", match.rank},
                            {"similarity", match.similarity},
                            {"verdicts", std::move(verdicts)}});
    }
    return {200, nlohmann::json{{"matches", std::move(rendered)}}.dump()};
}

struct ServiceServer::Impl {
    explicit Impl(SearchService& service) : service(service) {}

    SearchService& service;
    httplib::Server server;
    std::thread thread;
    int port = 0;
};

ServiceServer::ServiceServer(SearchService& service)
    : impl_(std::make_unique<Impl>(service)) {}

ServiceServer::~ServiceServer() { stop(); }

Result<int> ServiceServer::start(const std::string& host, int port) {
    SearchService& service = impl_->service;
    auto answer = [](httplib::Response& res, const SearchService::Reply& reply) {
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    impl_->server.Get("/healthz",
                      [&service, answer](const httplib::Request&, httplib::Response& res) {
                          answer(res, service.handle_health());
                      });
    impl_->server.Get(R"(/models/(.+))",
                      [&service, answer](const httplib::Request& req, httplib::Response& res) {
                          answer(res, service.handle_model(req.matches[1]));
                      });
    impl_->server.Post("/search",
                       [&service, answer](const httplib::Request& req, httplib::Response& res) {
                           answer(res, service.handle_search(req.body));
                       });

    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
        if (impl_->port <= 0) {
            return Result<int>::failure(Errc::io_error, "cannot bind to a free port");
        }
    } else {
        if (!impl_->server.bind_to_port(host, port)) {
            return Result<int>::failure(Errc::io_error,
                                        "cannot bind to port " + std::to_string(port));
        }
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void ServiceServer::wait() {
    if (impl_ != nullptr && impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

void ServiceServer::stop() {
    if (impl_ == nullptr) {
        return;
    }
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

}  // namespace modelmatch
