#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sem {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int max_order = 32;

/// Legendre polynomial P_n(x) and its derivative.
struct LegendreValue {
    double value;
    double derivative;
};
[[nodiscard]] LegendreValue legendre(int n, double x);

/// One-dimensional Gauss-Lobatto-Legendre nodal basis of polynomial degree N.
///
/// Nodes are ascending on [-1, 1] with both endpoints included. The
/// differentiation matrix holds D(i, j) = h_j'(x_i) for the Lagrange cardinal
/// functions h_j, and the modal matrix holds V(i, m) = P_m(x_i). Instances are
/// immutable once built.
class Basis1D {
public:
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int size() const noexcept { return order_ + 1; }
    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] const std::vector<double>& barycentric_weights() const noexcept { return bary_; }
    [[nodiscard]] const Matrix& diff_matrix() const noexcept { return diff_; }
    [[nodiscard]] const Matrix& modal_matrix() const noexcept { return modal_; }
    [[nodiscard]] const Matrix& modal_inverse() const noexcept { return modal_inv_; }

private:
    friend Basis1D build_gll_basis(int order);

    int order_ = 0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> bary_;
    Matrix diff_;
    Matrix modal_;
    Matrix modal_inv_;
};

/// Builds the GLL basis; throws ParameterError unless 1 <= order <= max_order.
[[nodiscard]] Basis1D build_gll_basis(int order);

/// GLL quadrature of samples taken at the basis nodes.
[[nodiscard]] double quadrature(const Basis1D& basis, std::span<const double> samples);

/// Derivative at the nodes of the interpolant through `samples`.
[[nodiscard]] std::vector<double> differentiate(const Basis1D& basis,
                                                std::span<const double> samples);

/// Row r evaluates every cardinal function at targets[r]. Targets must lie in [-1, 1].
[[nodiscard]] Matrix interpolation_matrix(const Basis1D& basis, std::span<const double> targets);

/// Nodal filter V diag(sigma) V^-1 damping the top `cutoff` Legendre modes with a
/// quadratic ramp reaching 1 - strength at mode N.
[[nodiscard]] Matrix modal_filter_matrix(const Basis1D& basis, int cutoff, double strength);

/// Transfer function of modal_filter_matrix, one entry per Legendre mode.
[[nodiscard]] std::vector<double> filter_transfer(int order, int cutoff, double strength);

/// Gauss-Legendre rule with `points` nodes (used for over-integration).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
[[nodiscard]] GaussRule gauss_legendre(int points);

}  // namespace sem
