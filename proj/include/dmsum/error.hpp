#pragma once

#include <stdexcept>
#include <string>

namespace dmsum {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A configured memory / enumeration / cost budget would be exceeded.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// A table or checkpoint file could not be parsed.
class FormatError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw InvalidArgument(what);
}

} // namespace detail
} // namespace dmsum
