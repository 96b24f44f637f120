#pragma once

#include <stdexcept>
#include <string>

namespace eegbg {

// Input files that cannot be parsed (EDF header fields, annotation lines,
// transfer matrices, manifests).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Signals that cannot be converted to physical units.
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

// Violated preconditions of numeric operations (bad band edges, shape
// mismatches, degenerate spectra).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or inconsistent configuration (unknown keys, absent credentials).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// HTTP/network failures talking to language-model endpoints.
class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& what, int http_status = 0)
        : std::runtime_error(what), status(http_status) {}
    int status;
};

}  // namespace eegbg
