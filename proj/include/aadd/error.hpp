#pragma once

#include <stdexcept>
#include <string>

namespace aadd {

// Every library failure derives from aadd::Error so callers can catch the
// family as a whole; the std base classes are kept for interoperability.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Function applied outside its domain (reciprocal of a range containing 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Real and Bool leaves mixed in one operation.
class LeafKindError : public Error {
public:
    using Error::Error;
};

// Every path of a diagram is infeasible.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

class MissingSymbol : public Error {
public:
    using Error::Error;
};

// Rate mismatch, zero-delay cycle or value-dependent activation.
class StaticMocViolation : public Error {
public:
    using Error::Error;
};

}  // namespace aadd
