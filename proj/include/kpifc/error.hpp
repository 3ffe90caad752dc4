#pragma once

#include <stdexcept>
#include <string>

namespace kpifc {

// Exit-code contract: 1 config/usage, 2 data, 3 numerical.
enum class ErrorKind { Config = 1, Data = 2, Numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

// Parse, schema, split, window and I/O problems: anything wrong with the data
// rather than the request or the arithmetic.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

} // namespace kpifc
