#pragma once

#include <stdexcept>
#include <string>

namespace driftrec {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class DegenerateDataError : public Error {
public:
    using Error::Error;
};

}  // namespace driftrec
