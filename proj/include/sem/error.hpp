#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sem {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array or matrix sizes that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Out-of-range argument: polynomial order, filter settings, interpolation target.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Invalid mesh construction request.
class MeshError : public Error {
public:
    using Error::Error;
};

class InvertedElementError : public MeshError {
public:
    InvertedElementError(std::size_t element, double jacobian)
        : MeshError("element " + std::to_string(element) +
                    " is inverted (jacobian determinant " + std::to_string(jacobian) + ")"),
          element_(element) {}

    [[nodiscard]] std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

/// An iterative solve that ran out of iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual,
                     std::vector<double> history)
        : Error(what + " failed to converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual), history_(std::move(history)) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] const std::vector<double>& history() const noexcept { return history_; }

private:
    int iterations_;
    double residual_;
    std::vector<double> history_;
};

/// Statistic undefined for the given data (e.g. zero variance).
class StatisticsError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sem
