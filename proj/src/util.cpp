#include "modelmatch/util.hpp"

#include <openssl/evp.h>

#include "modelmatch/result.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <random>
#include <stdexcept>
#include <thread>

namespace modelmatch {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) {
        throw std::runtime_error("EVP_MD_CTX_new failed");
    }
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &digest_len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 computation failed");
    }
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0F]);
    }
    return out;
}

bool is_valid_utf8(std::string_view data) {
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    std::size_t n = data.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char c = p[i];
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) {
            return false;
        }
        for (std::size_t k = 1; k < len; ++k) {
            if ((p[i + k] & 0xC0) != 0x80) {
                return false;
            }
            cp = (cp << 6) | (p[i + k] & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
            return false;
        }
        i += len;
    }
    return true;
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
    if (text.size() < prefix.size()) {
        return false;
    }
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i]))) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            break;
        }
        out.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
    std::uint64_t hash = 0xCBF29CE484222325ULL ^ seed;
    for (const auto& part : parts) {
        for (unsigned char c : part) {
            hash ^= c;
            hash *= 0x100000001B3ULL;
        }
        hash ^= 0x1F;  // separator so ("ab","c") != ("a","bc")
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::size_t seeded_pick(std::uint64_t seed, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("seeded_pick: empty range");
    }
    std::mt19937_64 rng(seed);
    return static_cast<std::size_t>(rng() % n);
}

void parallel_for(std::size_t count, std::size_t parallelism,
                  const std::function<void(std::size_t)>& fn) {
    if (count == 0) {
        return;
    }
    std::size_t workers = std::min(std::max<std::size_t>(parallelism, 1), count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                fn(i);
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
}

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::io_error: return "io_error";
        case Errc::malformed_line: return "malformed_line";
        case Errc::invalid_encoding: return "invalid_encoding";
        case Errc::empty_corpus: return "empty_corpus";
        case Errc::empty_requests: return "empty_requests";
        case Errc::unknown_doc: return "unknown_doc";
        case Errc::no_trivial_fields: return "no_trivial_fields";
        case Errc::unit_mismatch: return "unit_mismatch";
        case Errc::no_alternatives: return "no_alternatives";
        case Errc::missing_value: return "missing_value";
        case Errc::mutation_failed: return "mutation_failed";
        case Errc::network_error: return "network_error";
        case Errc::timeout: return "timeout";
        case Errc::not_found: return "not_found";
        case Errc::rate_limited: return "rate_limited";
        case Errc::budget_exceeded: return "budget_exceeded";
        case Errc::version_mismatch: return "version_mismatch";
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::offline_violation: return "offline_violation";
        case Errc::internal: return "internal";
    }
    return "unknown";
}

}  // namespace modelmatch
