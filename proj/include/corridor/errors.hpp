#pragma once

#include <stdexcept>
#include <string>

namespace corridor {

// Base for all domain errors so callers can catch one type at the CLI boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateSegment : public Error {
public:
    using Error::Error;
};

class InvalidPolyline : public Error {
public:
    using Error::Error;
};

class InvalidConstraints : public Error {
public:
    using Error::Error;
};

class InfeasibleEndpoints : public Error {
public:
    using Error::Error;
};

// Parse failures carry the JSON pointer / field path that failed.
class ParseError : public Error {
public:
    ParseError(const std::string& field, const std::string& msg)
        : Error(field + ": " + msg), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class MalformedPath : public Error {
public:
    using Error::Error;
};

class OracleExhausted : public Error {
public:
    using Error::Error;
};

class OracleBoundExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace corridor
