#include "sem/basis.hpp"

#include <cmath>
#include <numbers>

#include "sem/error.hpp"

namespace sem {

LegendreValue legendre(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    // three-term recurrences for P_k and P_k'
    double p_prev = 1.0, p = x;
    double d_prev = 0.0, d = 1.0;
    for (int k = 1; k < n; ++k) {
        const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        const double d_next = d_prev + (2.0 * k + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    return {p, d};
}

namespace {

std::vector<double> gll_nodes(int n) {
    std::vector<double> x(n + 1);
    x[0] = -1.0;
    x[n] = 1.0;
    for (int i = 1; i < n; ++i) {
        double xi = -std::cos(std::numbers::pi * i / n);
        // Newton on f = (1 - x^2) P_N'(x), using f' = -N(N+1) P_N(x)
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(n, xi);
            const double dx = (1.0 - xi * xi) * dp / (n * (n + 1.0) * p);
            xi += dx;
            if (std::abs(dx) <= 1e-15) break;
        }
        x[i] = xi;
    }
    for (int i = 0; i <= n / 2; ++i) {
        const double s = 0.5 * (x[n - i] - x[i]);
        x[i] = -s;
        x[n - i] = s;
    }
    if (n % 2 == 0) x[n / 2] = 0.0;
    return x;
}

}  // namespace

Basis1D build_gll_basis(int order) {
    if (order < 1 || order > max_order) {
        throw ParameterError("invalid polynomial order " + std::to_string(order) +
                             " (expected 1.." + std::to_string(max_order) + ")");
    }
    const int n = order;
    const int np = n + 1;

    Basis1D b;
    b.order_ = n;
    b.nodes_ = gll_nodes(n);

    std::vector<double> pn(np);
    b.weights_.resize(np);
    for (int i = 0; i < np; ++i) {
        pn[i] = legendre(n, b.nodes_[i]).value;
        b.weights_[i] = 2.0 / (n * (n + 1.0) * pn[i] * pn[i]);
    }

    b.bary_.resize(np);
    for (int j = 0; j < np; ++j) {
        double prod = 1.0;
        for (int k = 0; k < np; ++k)
            if (k != j) prod *= b.nodes_[j] - b.nodes_[k];
        b.bary_[j] = 1.0 / prod;
    }

    b.diff_ = Matrix::Zero(np, np);
    for (int i = 0; i < np; ++i) {
        double row = 0.0;
        for (int j = 0; j < np; ++j) {
            if (i == j) continue;
            const double dij = pn[i] / (pn[j] * (b.nodes_[i] - b.nodes_[j]));
            b.diff_(i, j) = dij;
            row += dij;
        }
        b.diff_(i, i) = -row;
    }

    // Legendre modes are discretely orthogonal under GLL quadrature with norms
    // 2/(2m+1) for m < N and 2/N for m = N, which gives V^-1 in closed form.
    b.modal_.resize(np, np);
    b.modal_inv_.resize(np, np);
    for (int i = 0; i < np; ++i)
        for (int m = 0; m < np; ++m) b.modal_(i, m) = legendre(m, b.nodes_[i]).value;
    for (int m = 0; m < np; ++m) {
        const double gamma = (m < n) ? 2.0 / (2.0 * m + 1.0) : 2.0 / n;
        for (int i = 0; i < np; ++i) b.modal_inv_(m, i) = b.weights_[i] * b.modal_(i, m) / gamma;
    }
    return b;
}

double quadrature(const Basis1D& basis, std::span<const double> samples) {
    if (samples.size() != basis.weights().size())
        throw DimensionError("quadrature: expected " + std::to_string(basis.size()) +
                             " samples, got " + std::to_string(samples.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) sum += basis.weights()[i] * samples[i];
    return sum;
}

std::vector<double> differentiate(const Basis1D& basis, std::span<const double> samples) {
    const auto np = static_cast<std::size_t>(basis.size());
    if (samples.size() != np)
        throw DimensionError("differentiate: expected " + std::to_string(np) +
                             " samples, got " + std::to_string(samples.size()));
    std::vector<double> out(np, 0.0);
    const Matrix& d = basis.diff_matrix();
    for (std::size_t i = 0; i < np; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < np; ++j) s += d(i, j) * samples[j];
        out[i] = s;
    }
    return out;
}

Matrix interpolation_matrix(const Basis1D& basis, std::span<const double> targets) {
    const int np = basis.size();
    const auto& x = basis.nodes();
    const auto& lambda = basis.barycentric_weights();
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(targets.size()), np);
    for (std::size_t r = 0; r < targets.size(); ++r) {
        const double t = targets[r];
        if (!(t >= -1.0 && t <= 1.0))
            throw ParameterError("interpolation target " + std::to_string(t) +
                                 " outside [-1, 1]");
        int exact = -1;
        for (int j = 0; j < np; ++j)
            if (t == x[j]) exact = j;
        if (exact >= 0) {
            m(r, exact) = 1.0;
            continue;
        }
        double denom = 0.0;
        for (int j = 0; j < np; ++j) {
            const double c = lambda[j] / (t - x[j]);
            m(r, j) = c;
            denom += c;
        }
        for (int j = 0; j < np; ++j) m(r, j) /= denom;
    }
    return m;
}

std::vector<double> filter_transfer(int order, int cutoff, double strength) {
    if (cutoff < 1 || cutoff > order)
        throw ParameterError("filter cutoff " + std::to_string(cutoff) + " outside 1.." +
                             std::to_string(order));
    if (!(strength > 0.0 && strength <= 1.0))
        throw ParameterError("filter strength " + std::to_string(strength) +
                             " outside (0, 1]");
    std::vector<double> sigma(order + 1, 1.0);
    const int start = order - cutoff;
    for (int m = start + 1; m <= order; ++m) {
        const double r = static_cast<double>(m - start) / cutoff;
        sigma[m] = 1.0 - strength * r * r;
    }
    return sigma;
}

Matrix modal_filter_matrix(const Basis1D& basis, int cutoff, double strength) {
    const auto sigma = filter_transfer(basis.order(), cutoff, strength);
    Matrix scaled = basis.modal_matrix();
    for (int m = 0; m < basis.size(); ++m) scaled.col(m) *= sigma[m];
    return scaled * basis.modal_inverse();
}

GaussRule gauss_legendre(int points) {
    if (points < 1) throw ParameterError("Gauss rule needs at least one point");
    GaussRule rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    for (int i = 0; i < points; ++i) {
        double x = -std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(points, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-16) break;
        }
        const double dp = legendre(points, x).derivative;
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    for (int i = 0; i < points / 2; ++i) {
        const double s = 0.5 * (rule.nodes[points - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[points - 1 - i]);
        rule.nodes[i] = -s;
        rule.nodes[points - 1 - i] = s;
        rule.weights[i] = rule.weights[points - 1 - i] = w;
    }
    if (points % 2 == 1) rule.nodes[points / 2] = 0.0;
    return rule;
}

}  // namespace sem
