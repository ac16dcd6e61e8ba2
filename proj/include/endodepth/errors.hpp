// Exception taxonomy shared by the library and the command line tool.
#pragma once

#include <stdexcept>
#include <string>

namespace endo {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (ranges, counts, enum-like fields).
struct ParameterError : Error {
    using Error::Error;
};

// Configuration file problems (missing keys, bad types, bad values).
struct ConfigError : ParameterError {
    using ParameterError::ParameterError;
};

// Scene geometry that cannot be realized (tube does not fit the volume, ...).
struct GeometryError : Error {
    using Error::Error;
};

// Mismatched tensor/image/graph shapes between producer and consumer.
struct ShapeError : Error {
    using Error::Error;
};

// Unreadable or syntactically invalid files (magic, version, truncation).
struct FormatError : Error {
    using Error::Error;
};

// Filesystem failures (missing path, unwritable directory, short write).
struct IoError : Error {
    using Error::Error;
};

// Render style sets whose extinction profiles disagree.
struct ConsistencyError : Error {
    using Error::Error;
};

// Scene identifiers shared between training and evaluation splits.
struct LeakageError : Error {
    using Error::Error;
};

// Non-finite training objective; training cannot continue.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace endo
