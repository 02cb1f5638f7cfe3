#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

// Physics-domain failures: the inputs describe a state the model does not cover.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Parameter set at or above the OPO oscillation threshold (epsilon*beta >= kappa_a).
class ThresholdError : public DomainError {
public:
    using DomainError::DomainError;
};

// A measured variance that cannot come from any positive source variance
// through the configured detection chain.
class UnphysicalMeasurement : public DomainError {
public:
    using DomainError::DomainError;
};

// Data-shape failures in the analyzer pipeline.
class CoverageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyBand : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario text that fails to parse or validate. Carries the offending line
// (0 when the problem is not tied to a line) and the section.key name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string field, const std::string& what)
        : std::runtime_error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(std::size_t line, const std::string& field, const std::string& what) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + what;
    }

    std::size_t line_;
    std::string field_;
};

}  // namespace sqz
