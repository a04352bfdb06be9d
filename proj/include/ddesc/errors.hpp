#pragma once

#include <stdexcept>
#include <string>

namespace ddesc {

// Bad arguments: malformed permutations, mismatched specs, out-of-range
// indices. Maps to CLI exit code 1.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configured size guard was exceeded (enumeration limit, graph guard).
// Maps to CLI exit code 2.
class capacity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A closed form was requested outside the regime it was derived for
// (n < 2d). Distinct from input_error so callers can fall back to
// enumeration.
class unsupported_regime_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace ddesc
