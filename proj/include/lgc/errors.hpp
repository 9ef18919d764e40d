#pragma once

#include <stdexcept>
#include <string>

namespace lgc {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameter or argument outside its mathematical domain.
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

/// Malformed configuration (unknown family, mismatched orders, bad JSON).
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

/// Input data problems (missing columns, impossible observations).
class data_error : public error {
public:
    explicit data_error(const std::string& msg) : error(msg) {}
};

/// Numerical failures (loss of definiteness, underflow of a required mass,
/// cumulative-table cap exceeded).
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& msg) : error(msg) {}
};

} // namespace lgc
