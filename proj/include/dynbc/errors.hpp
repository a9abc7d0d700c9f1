#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynbc {

// Root of every error raised by the library. Violated hypotheses that are
// reported as data (ConditionReport entries, negative slacks) never throw.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifier : public SyntaxError {
public:
    UnknownIdentifier(const std::string& name, std::size_t offset)
        : SyntaxError("unknown identifier '" + name + "'", offset), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// Raised while evaluating log/sqrt of a negative argument, division by zero
// and similar. The message names the offending node.
class DomainError : public Error {
public:
    using Error::Error;
};

class DegenerateGrid : public Error {
public:
    using Error::Error;
};

class InvalidGrid : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

// A hypothesis without which a construction cannot proceed, e.g. the
// improper integral of rho/psi does not exceed 2M.
class ConditionViolated : public Error {
public:
    ConditionViolated(const std::string& condition, const std::string& detail)
        : Error(condition + ": " + detail), condition_(condition) {}
    const std::string& condition() const { return condition_; }

private:
    std::string condition_;
};

class PreconditionFailed : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class CertificateMismatch : public Error {
public:
    using Error::Error;
};

class DivergentIntegral : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace dynbc
