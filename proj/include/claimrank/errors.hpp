#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace claimrank {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- corpus ---

class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what), line_(0) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class DuplicateId : public Error {
public:
    using Error::Error;
};

class DanglingReference : public Error {
public:
    using Error::Error;
};

class AssemblyEmpty : public Error {
public:
    using Error::Error;
};

// --- embedding ---

class ZeroVector : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Raised by embedding providers. `retryable` marks transient failures
// (connection errors, 429/5xx) that the batching layer may retry.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, std::string provider_id,
                  std::size_t batch_index = 0, bool retryable = false)
        : Error(what),
          provider_id(std::move(provider_id)),
          batch_index(batch_index),
          retryable(retryable) {}

    std::string provider_id;
    std::size_t batch_index;
    bool retryable;
};

class FormatError : public Error {
public:
    using Error::Error;
};

// --- retrieval ---

class EmptyCandidateSet : public Error {
public:
    using Error::Error;
};

// --- fusion ---

class EmptyInput : public Error {
public:
    using Error::Error;
};

class MissingRun : public Error {
public:
    using Error::Error;
};

class PostCoverageMismatch : public Error {
public:
    using Error::Error;
};

// --- evaluation ---

class NoGoldPosts : public Error {
public:
    using Error::Error;
};

class DivisionByZero : public Error {
public:
    using Error::Error;
};

// --- selection ---

class EmptyTable : public Error {
public:
    using Error::Error;
};

// --- config / cli ---

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace claimrank
