#pragma once

#include <stdexcept>
#include <string>

namespace moe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

/// Matrix handed in as a density operator is not positive semidefinite.
class NotAState : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// eta in {0, 1} or kappa == 1 where a formula divides by (1 - eta) or (kappa - 1).
class DegenerateParameter : public Error {
public:
    using Error::Error;
};

/// Probability mass lost to Fock truncation exceeded the configured cap.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double deficit)
        : Error(what), deficit_(deficit) {}
    double deficit() const noexcept { return deficit_; }

private:
    double deficit_;
};

/// Requested joint space does not fit the memory budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace moe
