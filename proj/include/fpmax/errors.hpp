#pragma once

#include <stdexcept>
#include <string>

namespace fpmax {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unsupported radix, unknown tree or preset, inconsistent stage counts.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A value violated a documented precondition (e.g. malformed UnpackedFloat).
class ContractError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Instruction field out of range for its bit width.
class EncodingError : public Error {
public:
    using Error::Error;
};

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, int index)
        : Error("instruction " + std::to_string(index) + ": " + what), index_(index) {}
    int index() const { return index_; }

private:
    int index_;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

// v_dd at or below the threshold voltage; the circuit does not switch.
class NonOperationalPoint : public Error {
public:
    using Error::Error;
};

}  // namespace fpmax
