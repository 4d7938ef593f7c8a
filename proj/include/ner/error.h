#pragma once

#include <stdexcept>
#include <string>

namespace ner {

// Base class for everything the library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
struct DimensionError : Error {
    using Error::Error;
};

// An API precondition was violated (non-scalar loss, missing grad, ...).
struct ContractError : Error {
    using Error::Error;
};

// Malformed input file.
struct ParseError : Error {
    ParseError(const std::string& path, size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Checkpoint cannot be read back (truncation, bad magic, version mismatch).
struct LoadError : Error {
    using Error::Error;
};

}  // namespace ner
