#pragma once

#include <stdexcept>
#include <string>

namespace supou {

/// Argument outside the domain of an operation (invalid parameters, negative lags, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed to reach its requested accuracy.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    [[nodiscard]] double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Not enough observations for the requested moment conditions.
class InsufficientDataError : public std::invalid_argument {
public:
    explicit InsufficientDataError(const std::string& what) : std::invalid_argument(what) {}
};

/// No starting value could be derived from the data.
class InitializationError : public std::runtime_error {
public:
    explicit InitializationError(const std::string& what) : std::runtime_error(what) {}
};

/// The estimated moment covariance could not be inverted, even after regularization.
class SingularWeightingError : public std::runtime_error {
public:
    explicit SingularWeightingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace supou
