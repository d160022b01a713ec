#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace modelmatch {

/// SHA-256 of `data`, lower-case hex. Used for card digests and stub-client
/// prompt keys; stability across platforms matters more than speed here.
std::string sha256_hex(std::string_view data);

/// True iff `data` is well-formed UTF-8 (rejects overlong forms, surrogates,
/// and code points above U+10FFFF).
bool is_valid_utf8(std::string_view data);

std::string to_lower_ascii(std::string_view text);
std::string trim(std::string_view text);
bool starts_with_ci(std::string_view text, std::string_view prefix);

/// Splits on `sep`, keeping empty pieces.
std::vector<std::string> split(std::string_view text, char sep);

std::uint64_t fnv1a64(std::string_view data);

/// Stable seed derivation: folds `parts` into `seed` with FNV-1a so the same
/// inputs give the same stream on every platform.
std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::string_view> parts);

/// Deterministic uniform pick in [0, n): mt19937_64 output reduced by modulo.
/// std::uniform_int_distribution is implementation-defined, so it is avoided
/// anywhere reproducibility is part of the contract.
std::size_t seeded_pick(std::uint64_t seed, std::size_t n);

/// Runs fn(0..count-1) on at most `parallelism` worker threads. Blocks until
/// all items are done. fn must not throw.
void parallel_for(std::size_t count, std::size_t parallelism,
                  const std::function<void(std::size_t)>& fn);

}  // namespace modelmatch
