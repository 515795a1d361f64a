#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccmm {

/// Malformed model formula. `position()` is 1-based and always within the input.
class FormulaError : public std::runtime_error {
public:
    FormulaError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Bad input data: ingestion failures, missing columns, inconsistent designs.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown: non-PD matrices, singular systems, overflow in a chain.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ccmm
