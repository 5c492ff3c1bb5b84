#pragma once

#include <stdexcept>
#include <string>

namespace vnna {

// Base class for all harness errors. The CLI maps anything derived from
// Error to exit code 1 with the message on stderr.
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line(line),
          column(column) {}

    int line;
    int column;
};

class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

class UnsupportedOperator : public Error {
public:
    explicit UnsupportedOperator(const std::string& op)
        : Error("unsupported operator: " + op), op(op) {}

    std::string op;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidQuery : public Error {
public:
    using Error::Error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class MalformedWitness : public Error {
public:
    using Error::Error;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path)
        : Error("missing file: " + path), path(path) {}

    std::string path;
};

class ToolFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace vnna
