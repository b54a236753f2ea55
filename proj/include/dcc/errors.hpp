#pragma once

#include <stdexcept>
#include <string>

namespace dcc {

/// Index or count outside its admissible range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Input violates a mathematical precondition (asymmetric, not SPD, wrong size).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative routine failed or produced a non-finite result.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation requires a model structure (diagonal, scalar, ...) the spec lacks.
class StructureError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dcc
