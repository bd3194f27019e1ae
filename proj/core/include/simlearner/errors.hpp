#pragma once
// Exception hierarchy shared by every simlearner module.

#include <stdexcept>
#include <string>

namespace simlearner {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed document or stream. `path` locates the offending element
// (a JSON pointer or "line N" for parse failures).
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ReferenceError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class ScriptExhausted : public Error {
public:
    using Error::Error;
};

// Scripted backend saw a prompt that no remaining entry's cue matches.
class ScriptMismatch : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    ExtractionError(const std::string& message, std::string last_output)
        : Error(message), last_output_(std::move(last_output)) {}
    const std::string& last_output() const noexcept { return last_output_; }

private:
    std::string last_output_;
};

class UnknownConceptError : public Error {
public:
    using Error::Error;
};

class EmptyWindowError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

class MissingEpisodeError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

class SessionAbort : public Error {
public:
    using Error::Error;
};

}  // namespace simlearner
