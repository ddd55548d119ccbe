#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sem {

/// Element-local nodal values of one scalar unknown, laid out element by
/// element with x-fastest node ordering inside each element.
class Field {
public:
    Field() = default;
    explicit Field(std::size_t size, double value = 0.0) : values_(size, value) {}
    explicit Field(std::vector<double> values) : values_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double* data() noexcept { return values_.data(); }
    [[nodiscard]] const double* data() const noexcept { return values_.data(); }
    [[nodiscard]] std::span<double> span() noexcept { return values_; }
    [[nodiscard]] std::span<const double> span() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s) noexcept;
    /// this += a * x
    Field& axpy(double a, const Field& x);

    friend bool operator==(const Field&, const Field&) = default;

private:
    std::vector<double> values_;
};

[[nodiscard]] Field operator+(Field a, const Field& b);
[[nodiscard]] Field operator-(Field a, const Field& b);
[[nodiscard]] Field operator*(double s, Field a);

[[nodiscard]] double max_abs(const Field& f) noexcept;

using VectorField = std::vector<Field>;

}  // namespace sem
