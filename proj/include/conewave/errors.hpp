#pragma once

#include <stdexcept>
#include <string>

namespace conewave {

// point pair or time outside the support of a kernel
class RegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// angle on the diffracted-front singular set
class SingularConfiguration : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientData : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ChecksumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace conewave
