#pragma once

#include <string>
#include <utility>
#include <variant>

namespace modelmatch {

enum class Errc {
    io_error,
    malformed_line,
    invalid_encoding,
    empty_corpus,
    empty_requests,
    unknown_doc,
    no_trivial_fields,
    unit_mismatch,
    no_alternatives,
    missing_value,
    mutation_failed,
    network_error,
    timeout,
    not_found,
    rate_limited,
    budget_exceeded,
    version_mismatch,
    invalid_argument,
    offline_violation,
    internal,
};

const char* errc_name(Errc code);

struct Error {
    Errc code;
    std::string message;
};

/// Value-or-Error carrier used by every fallible operation. Errors are plain
/// data (code + message) so they can cross module and process boundaries.
template <typename T>
class [[nodiscard]] Result {
  public:
    Result(T value) : state_(std::move(value)) {}
    Result(Error error) : state_(std::move(error)) {}

    static Result failure(Errc code, std::string message) {
        return Result(Error{code, std::move(message)});
    }

    bool ok() const { return std::holds_alternative<T>(state_); }
    explicit operator bool() const { return ok(); }

    T& value() & { return std::get<T>(state_); }
    const T& value() const& { return std::get<T>(state_); }
    T&& value() && { return std::get<T>(std::move(state_)); }

    const Error& error() const { return std::get<Error>(state_); }
    Errc code() const { return error().code; }

  private:
    std::variant<T, Error> state_;
};

template <>
class [[nodiscard]] Result<void> {
  public:
    Result() = default;
    Result(Error error) : error_(std::move(error)), failed_(true) {}

    static Result failure(Errc code, std::string message) {
        return Result(Error{code, std::move(message)});
    }
    static Result success() { return Result(); }

    bool ok() const { return !failed_; }
    explicit operator bool() const { return ok(); }

    const Error& error() const { return error_; }
    Errc code() const { return error_.code; }

  private:
    Error error_{Errc::internal, ""};
    bool failed_ = false;
};

}  // namespace modelmatch
