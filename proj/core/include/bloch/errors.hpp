#pragma once

#include <stdexcept>
#include <string>

namespace bloch {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace bloch
