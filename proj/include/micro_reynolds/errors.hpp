#pragma once

#include <stdexcept>
#include <string>

namespace micro_reynolds {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MICRO_REYNOLDS_ERROR(Name)                                                   \
    class Name : public Error {                                                      \
    public:                                                                          \
        explicit Name(const std::string& what) : Error(#Name, what) {}               \
    }

MICRO_REYNOLDS_ERROR(DomainError);
MICRO_REYNOLDS_ERROR(SingularCoefficientSystem);
MICRO_REYNOLDS_ERROR(AnisotropyDetected);
MICRO_REYNOLDS_ERROR(SingularDiscreteSystem);
MICRO_REYNOLDS_ERROR(NonMonotoneConvergence);
MICRO_REYNOLDS_ERROR(NonPositiveMobility);
MICRO_REYNOLDS_ERROR(SolverDivergence);
MICRO_REYNOLDS_ERROR(IoError);

#undef MICRO_REYNOLDS_ERROR

/// Invalid run configuration; `field()` is the dotted path of the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("ConfigError", field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace micro_reynolds
