#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace regime {

/// Input or configuration rejected before any numerics ran. Maps to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a valid result. Maps to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Design matrix without full column rank.
class RankDeficientError : public NumericalError {
public:
    RankDeficientError(const std::string& what, std::vector<std::size_t> columns)
        : NumericalError(what), columns_(std::move(columns)) {}

    /// Design-matrix columns that are linearly dependent on the retained ones.
    const std::vector<std::size_t>& columns() const noexcept { return columns_; }

private:
    std::vector<std::size_t> columns_;
};

}  // namespace regime
