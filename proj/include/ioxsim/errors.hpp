#pragma once

#include <stdexcept>
#include <string>

namespace ioxsim {

// Input outside an operation's domain (bad parameters, violated preconditions).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that cannot deliver the requested accuracy: singular
// matrices, step-size underflow, poles too close to a quadrature edge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ioxsim
