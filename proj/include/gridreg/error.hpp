#pragma once

#include <stdexcept>
#include <string>

namespace gridreg {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed case file or unparsable text.
class ParseError : public Error {
public:
    using Error::Error;
};

// A data invariant does not hold; `field` names the offending item.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Backend failure or an unexpected solve status.
class SolverError : public Error {
public:
    using Error::Error;
};

// Model construction referenced something that does not exist, or a NaN crept in.
class ModelError : public Error {
public:
    using Error::Error;
};

// Enumeration would exceed the configured plan budget.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, double estimate)
        : Error(what), estimate_(estimate) {}

    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

// A post-solve certificate or cross-check failed.
class CertificateError : public Error {
public:
    using Error::Error;
};

} // namespace gridreg
