#include "sem/field.hpp"

#include <cmath>

#include "sem/error.hpp"

namespace sem {

namespace {
void check_same(const Field& a, const Field& b) {
    if (a.size() != b.size())
        throw DimensionError("field size mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
}
}  // namespace

Field& Field::operator+=(const Field& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    check_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

Field& Field::axpy(double a, const Field& x) {
    check_same(*this, x);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double max_abs(const Field& f) noexcept {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace sem
