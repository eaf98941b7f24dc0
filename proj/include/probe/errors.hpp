#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace probe {

// Iterative numerics failed to converge (quantile inversion, continued
// fractions). Carries the diagnostic text assembled at the failure site.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. `line()` is 1-based and 0 when the
// failure is not tied to a specific input line.
class IngestionError : public std::runtime_error {
public:
    explicit IngestionError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

}  // namespace probe
