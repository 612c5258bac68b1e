#pragma once

#include <stdexcept>
#include <string>

namespace iqo {

/// Bad argument or violated precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds a size guard (exhaustive scans, dense matrices).
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A quantum state that is not normalized where it must be.
class InvalidState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exponent fit has too little data (span, distinct values) to be identified.
class FitWindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace iqo
