#pragma once

#include <stdexcept>
#include <string>

namespace rydfac {

/// Configuration rejected during validation. `field` names the offending key.
class InvalidConfig : public std::runtime_error {
public:
    InvalidConfig(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A solver invariant (norm, trace, hermiticity) broke during integration.
class NumericalInstability : public std::runtime_error {
public:
    NumericalInstability(double time_us, const std::string& what)
        : std::runtime_error(what + " at t=" + std::to_string(time_us) + " us"), time_us_(time_us) {}

    double time_us() const noexcept { return time_us_; }

private:
    double time_us_;
};

/// The requested run exceeds the memory ceiling of the chosen solver.
class ResourceRefusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rydfac
