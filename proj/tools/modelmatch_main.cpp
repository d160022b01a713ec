#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "modelmatch/bm25.hpp"
#include "modelmatch/config.hpp"
#include "modelmatch/corpus.hpp"
#include "modelmatch/evaluation.hpp"
#include "modelmatch/pipeline.hpp"
#include "modelmatch/selection.hpp"
#include "modelmatch/service.hpp"
#include "modelmatch/synthesis.hpp"

namespace mm = modelmatch;

namespace {

std::string one_line(std::string text) {
    for (char& c : text) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return text;
}

int exit_code_for(mm::Errc code) {
    switch (code) {
        case mm::Errc::network_error:
        case mm::Errc::timeout:
        case mm::Errc::rate_limited:
        case mm::Errc::internal:
            return 2;
        default:
            return 1;
    }
}

int report_failure(const mm::Error& error) {
    std::cerr << "error: " << mm::errc_name(error.code) << ": " << one_line(error.message)
              << "\n";
    return exit_code_for(error.code);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& warning : warnings) {
        std::cerr << "warning: " << one_line(warning) << "\n";
    }
}

mm::Result<mm::AppConfig> effective_config(const std::string& path) {
    if (path.empty()) {
        return mm::AppConfig{};
    }
    return mm::load_config(path);
}

mm::Result<std::string> read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return mm::Result<std::string>::failure(mm::Errc::io_error, "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

mm::Result<void> write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        return mm::Result<void>::failure(mm::Errc::io_error, "cannot write " + path);
    }
    out << text;
    if (!out) {
        return mm::Result<void>::failure(mm::Errc::io_error, "short write to " + path);
    }
    return mm::Result<void>::success();
}

mm::Result<mm::SearchRequest> load_request_file(const std::string& path) {
    auto text = read_text_file(path);
    if (!text.ok()) {
        return text.error();
    }
    nlohmann::json parsed = nlohmann::json::parse(text.value(), nullptr, false);
    if (parsed.is_discarded()) {
        return mm::Result<mm::SearchRequest>::failure(mm::Errc::invalid_argument,
                                                      path + " is not valid JSON");
    }
    auto request = mm::request_from_json(parsed);
    if (!request.ok()) {
        return request.error();
    }
    if (auto shape = mm::validate_request_shape(request.value()); !shape.ok()) {
        return shape.error();
    }
    return request;
}

/// Owns the optional HTTP chat client for commands that may go online.
struct ClientSlot {
    std::unique_ptr<mm::HttpChatClient> http;

    mm::ChatClient* configure(const mm::AppConfig& config, bool force_offline) {
        if (force_offline || config.offline || config.chat.endpoint.empty()) {
            return nullptr;
        }
        http = std::make_unique<mm::HttpChatClient>(mm::chat_options(config));
        return http.get();
    }
};

struct IngestArgs {
    std::string cards;
    std::string listings;
    std::string out;
    std::string config;
    long long min_downloads = -1;
    bool experimental = false;
};

mm::Result<void> cmd_ingest(const IngestArgs& args) {
    mm::IngestOptions options;
    options.cards_dir = args.cards;
    options.listings_path = args.listings;
    if (args.min_downloads >= 0) {
        options.min_downloads = args.min_downloads;
    } else if (args.experimental) {
        options.min_downloads = mm::kExperimentalDownloadsThreshold;
    }
    auto output = mm::run_ingest(options);
    if (!output.ok()) {
        return output.error();
    }
    if (auto stored = mm::store_corpus(output.value().records, args.out); !stored.ok()) {
        return stored.error();
    }
    print_warnings(output.value().warnings);
    std::cout << mm::format_stats(output.value().stats);
    std::cout << "skipped invalid cards: " << output.value().skipped_invalid << "\n";
    if (options.min_downloads.has_value()) {
        std::cout << "skipped below downloads threshold: "
                  << output.value().skipped_below_threshold << "\n";
    }
    std::cout << "stored " << output.value().records.size() << " records in " << args.out
              << "\n";
    return mm::Result<void>::success();
}

struct ExtractArgs {
    std::string corpus;
    std::string cards;
    std::string out;
    std::string config;
    bool offline = false;
    std::size_t parallelism = 0;
};

mm::Result<void> cmd_extract(const ExtractArgs& args) {
    auto config = effective_config(args.config);
    if (!config.ok()) {
        return config.error();
    }
    auto records = mm::load_corpus(args.corpus);
    if (!records.ok()) {
        return records.error();
    }
    ClientSlot slot;
    mm::ExtractOptions options;
    options.cards_dir = args.cards;
    options.client = slot.configure(config.value(), args.offline);
    options.parallelism = args.parallelism > 0 ? args.parallelism
                                               : config.value().parallelism;
    auto output = mm::run_extract(records.value(), options);
    if (!output.ok()) {
        return output.error();
    }
    if (auto stored = mm::store_corpus(output.value().records, args.out); !stored.ok()) {
        return stored.error();
    }
    print_warnings(output.value().warnings);
    std::cout << "extracted " << output.value().extracted << " of "
              << output.value().records.size() << " records ("
              << (options.client != nullptr ? "endpoint" : "heuristics") << ") into "
              << args.out << "\n";
    return mm::Result<void>::success();
}

struct IndexArgs {
    std::string corpus;
    std::string out;
    std::string config;
};

mm::Result<void> cmd_index(const IndexArgs& args) {
    auto config = effective_config(args.config);
    if (!config.ok()) {
        return config.error();
    }
    auto records = mm::load_corpus(args.corpus);
    if (!records.ok()) {
        return records.error();
    }
    auto index = mm::build_index(records.value(), config.value().bm25);
    if (!index.ok()) {
        return index.error();
    }
    if (auto stored = mm::save_index(index.value(), args.out); !stored.ok()) {
        return stored.error();
    }
    std::cout << "indexed " << records.value().size() << " records across "
              << index.value().fields.size() << " fields into " << args.out << "\n";
    return mm::Result<void>::success();
}

struct SearchArgs {
    std::string index;
    std::string corpus;
    std::string request;
    std::string config;
    std::size_t top_k = 0;
    bool explain = false;
    bool offline = false;
};

mm::Result<void> cmd_search(const SearchArgs& args) {
    auto config = effective_config(args.config);
    if (!config.ok()) {
        return config.error();
    }
    auto index = mm::load_index(args.index);
    if (!index.ok()) {
        return index.error();
    }
    auto records = mm::load_corpus(args.corpus);
    if (!records.ok()) {
        return records.error();
    }
    auto request = load_request_file(args.request);
    if (!request.ok()) {
        return request.error();
    }
    mm::SelectionConfig selection = config.value().selection;
    if (args.top_k > 0) {
        selection.top_k = args.top_k;
    }
    ClientSlot slot;
    mm::ConstraintChecker checker =
        mm::make_default_checker(selection.policy, slot.configure(config.value(), args.offline));
    auto matches = mm::select(request.value(), records.value(), index.value(), selection,
                              checker);
    if (!matches.ok()) {
        return matches.error();
    }
    std::printf("%4s  %10s  %s\n", "rank", "similarity", "model");
    for (const mm::RankedMatch& match : matches.value()) {
        std::printf("%4zu  %10.4f  %s\n", match.rank, match.similarity,
                    match.registry_name.c_str());
    }
    if (args.explain) {
        for (const mm::RankedMatch& match : matches.value()) {
            std::cout << "\n" << mm::explain(match);
        }
    }
    return mm::Result<void>::success();
}

struct SynthesizeArgs {
    std::string corpus;
    std::string out;
    std::string config;
    std::size_t per_record = 3;
    std::uint64_t seed = 42;
    bool offline = false;
};

mm::Result<void> cmd_synthesize(const SynthesizeArgs& args) {
    auto config = effective_config(args.config);
    if (!config.ok()) {
        return config.error();
    }
    auto records = mm::load_corpus(args.corpus);
    if (!records.ok()) {
        return records.error();
    }
    ClientSlot slot;
    auto output = mm::synthesize_corpus(records.value(), args.per_record, args.seed,
                                        slot.configure(config.value(), args.offline));
    if (!output.ok()) {
        return output.error();
    }
    if (auto stored = mm::store_requests(output.value().requests, args.out); !stored.ok()) {
        return stored.error();
    }
    std::cout << "synthesized " << output.value().requests.size() << " requests from "
              << records.value().size() << " records into " << args.out << "\n";
    for (const mm::SynthesisShortfall& shortfall : output.value().shortfalls) {
        std::cout << "shortfall: " << shortfall.registry_name << " produced "
                  << shortfall.produced << " of " << shortfall.requested << " ("
                  << one_line(shortfall.reason) << ")\n";
    }
    return mm::Result<void>::success();
}

struct EvaluateArgs {
    std::string index;
    std::string corpus;
    std::string requests;
    std::string out;
    std::string config;
    double judge_threshold = 0.8;
    bool exclude_origins = false;
};

mm::Result<void> cmd_evaluate(const EvaluateArgs& args) {
    auto config = effective_config(args.config);
    if (!config.ok()) {
        return config.error();
    }
    auto index = mm::load_index(args.index);
    if (!index.ok()) {
        return index.error();
    }
    auto records = mm::load_corpus(args.corpus);
    if (!records.ok()) {
        return records.error();
    }
    auto requests = mm::load_requests(args.requests);
    if (!requests.ok()) {
        return requests.error();
    }
    mm::EvalConfig eval;
    eval.selection = config.value().selection;
    eval.exclude_origins = args.exclude_origins;
    eval.judge_threshold = args.judge_threshold;
    auto report = mm::run_benchmark(requests.value(), records.value(), index.value(), eval);
    if (!report.ok()) {
        return report.error();
    }
    if (!args.out.empty()) {
        auto stored =
            write_text_file(args.out, mm::report_to_json(report.value()).dump(2) + "\n");
        if (!stored.ok()) {
            return stored.error();
        }
    }
    std::cout << mm::format_report(report.value());
    return mm::Result<void>::success();
}

struct ServeArgs {
    std::string index;
    std::string corpus;
    std::string config;
    std::string host = "127.0.0.1";
    int port = 8080;
    bool offline = false;
};

mm::Result<void> cmd_serve(const ServeArgs& args) {
    auto config = effective_config(args.config);
    if (!config.ok()) {
        return config.error();
    }
    auto index = mm::load_index(args.index);
    if (!index.ok()) {
        return index.error();
    }
    auto records = mm::load_corpus(args.corpus);
    if (!records.ok()) {
        return records.error();
    }
    ClientSlot slot;
    mm::SearchService service(
        config.value().selection,
        mm::make_default_checker(config.value().selection.policy,
                                 slot.configure(config.value(), args.offline)));
    if (auto loaded = service.load(std::move(records).value(), std::move(index).value());
        !loaded.ok()) {
        return loaded.error();
    }
    mm::ServiceServer server(service);
    auto port = server.start(args.host, args.port);
    if (!port.ok()) {
        return port.error();
    }
    std::cout << "listening on http://" << args.host << ":" << port.value() << "\n";
    server.wait();
    return mm::Result<void>::success();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"search engine for pretrained model registries"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "parse model cards into a corpus file");
    ingest->add_option("--cards", ingest_args.cards, "directory of <name>/README.md cards")
        ->required();
    ingest->add_option("--listings", ingest_args.listings, "hub listings file (JSONL)");
    ingest->add_option("--out", ingest_args.out, "corpus output path")->required();
    ingest->add_option("--min-downloads", ingest_args.min_downloads,
                       "drop records below this downloads count");
    ingest->add_flag("--experimental", ingest_args.experimental,
                     "apply the standard 2000 downloads threshold");
    ingest->add_option("--config", ingest_args.config, "config file (JSON)");

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "fill literature attributes from cards");
    extract->add_option("--corpus", extract_args.corpus, "corpus input path")->required();
    extract->add_option("--cards", extract_args.cards, "directory of cards")->required();
    extract->add_option("--out", extract_args.out, "corpus output path")->required();
    extract->add_flag("--offline", extract_args.offline, "force the heuristic extractor");
    extract->add_option("--parallelism", extract_args.parallelism, "worker thread bound");
    extract->add_option("--config", extract_args.config, "config file (JSON)");

    IndexArgs index_args;
    auto* index = app.add_subcommand("index", "build and persist the ranking index");
    index->add_option("--corpus", index_args.corpus, "corpus input path")->required();
    index->add_option("--out", index_args.out, "index output path")->required();
    index->add_option("--config", index_args.config, "config file (JSON)");

    SearchArgs search_args;
    auto* search = app.add_subcommand("search", "rank candidates for one request");
    search->add_option("--index", search_args.index, "index path")->required();
    search->add_option("--corpus", search_args.corpus, "corpus path")->required();
    search->add_option("--request", search_args.request, "request file (JSON object)")
        ->required();
    search->add_option("--top-k", search_args.top_k, "override result count");
    search->add_flag("--explain", search_args.explain, "append per-match reports");
    search->add_flag("--offline", search_args.offline, "never call the chat endpoint");
    search->add_option("--config", search_args.config, "config file (JSON)");

    SynthesizeArgs synth_args;
    auto* synthesize = app.add_subcommand("synthesize", "mutate records into request datasets");
    synthesize->add_option("--corpus", synth_args.corpus, "corpus input path")->required();
    synthesize->add_option("-n,--per-record", synth_args.per_record,
                           "requests per record (default 3)");
    synthesize->add_option("--seed", synth_args.seed, "generation seed (default 42)");
    synthesize->add_option("--out", synth_args.out, "requests output path")->required();
    synthesize->add_flag("--offline", synth_args.offline, "use the synonym fallback only");
    synthesize->add_option("--config", synth_args.config, "config file (JSON)");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "run a request benchmark");
    evaluate->add_option("--index", eval_args.index, "index path")->required();
    evaluate->add_option("--corpus", eval_args.corpus, "corpus path")->required();
    evaluate->add_option("--requests", eval_args.requests, "requests file (JSONL)")->required();
    evaluate->add_option("--out", eval_args.out, "report output path (JSON)");
    evaluate->add_flag("--exclude-origins", eval_args.exclude_origins,
                       "drop synthesis origin records from the pool");
    evaluate->add_option("--judge-threshold", eval_args.judge_threshold,
                         "per-field similarity bar for the deterministic judge");
    evaluate->add_option("--config", eval_args.config, "config file (JSON)");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "run the HTTP search service");
    serve->add_option("--index", serve_args.index, "index path")->required();
    serve->add_option("--corpus", serve_args.corpus, "corpus path")->required();
    serve->add_option("--host", serve_args.host, "bind host (default 127.0.0.1)");
    serve->add_option("--port", serve_args.port, "bind port (default 8080, 0 = any)");
    serve->add_flag("--offline", serve_args.offline, "never call the chat endpoint");
    serve->add_option("--config", serve_args.config, "config file (JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: invalid_argument: " << one_line(e.what()) << "\n";
        return 1;
    }

    mm::Result<void> outcome = mm::Result<void>::success();
    if (*ingest) {
        outcome = cmd_ingest(ingest_args);
    } else if (*extract) {
        outcome = cmd_extract(extract_args);
    } else if (*index) {
        outcome = cmd_index(index_args);
    } else if (*search) {
        outcome = cmd_search(search_args);
    } else if (*synthesize) {
        outcome = cmd_synthesize(synth_args);
    } else if (*evaluate) {
        outcome = cmd_evaluate(eval_args);
    } else if (*serve) {
        outcome = cmd_serve(serve_args);
    }
    if (!outcome.ok()) {
        return report_failure(outcome.error());
    }
    return 0;
}
