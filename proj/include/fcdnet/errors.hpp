#pragma once

#include <stdexcept>
#include <string>

namespace fcdnet {

// Violated precondition on shapes, sizes or arguments.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ShapeError : public ContractError {
public:
    using ContractError::ContractError;
};

// Non-finite values or divergence.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files, degenerate datasets.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fcdnet
