#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sem/basis.hpp"
#include "sem/error.hpp"
#include "sem/operators.hpp"

using namespace sem;
using std::numbers::pi;

namespace {

Discretization square(int cx, int cy, int order, bool periodic = false, double len = 1.0) {
    BoxSpec s;
    s.dim = 2;
    s.counts = {cx, cy, 1};
    s.hi = {len, len, 1.0};
    s.periodic = {periodic, periodic, false};
    return Discretization(build_box_mesh(s, order));
}

Discretization warped_square(int cx, int cy, int order) {
    BoxSpec s;
    s.dim = 2;
    s.counts = {cx, cy, 1};
    auto mesh = transform_corners(build_box_mesh(s, order), [](const Point& p) {
        const double bump = 0.06 * std::sin(pi * p[0]) * std::sin(pi * p[1]);
        return Point{p[0] + bump, p[1] - bump, 0.0};
    });
    return Discretization(std::move(mesh));
}

Field random_continuous(const Discretization& d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> g(d.gather_scatter().num_global());
    for (double& v : g) v = u(rng);
    return Field(d.gather_scatter().scatter(g));
}

double norm(const Discretization& d, const Field& f) { return std::sqrt(d.inner(f, f)); }

double mean_free(const Discretization& d, Field& f) {
    const double m = d.integrate(f) / d.mesh().volume();
    for (double& v : f.values()) v -= m;
    return m;
}

}  // namespace

TEST_CASE("mass matrix examples") {
    const auto d = square(2, 2, 5);
    const Field one(d.num_local(), 1.0);
    CHECK(std::abs(d.global_dot(apply_mass(d, one), one) - 1.0) < 1e-12);
    const Field x = d.interpolate([](const Point& p) { return p[0]; });
    CHECK(std::abs(d.global_dot(apply_mass(d, x), one) - 0.5) < 1e-12);

    // indicator of one shared global node
    const auto& gs = d.gather_scatter();
    std::size_t target = 0;
    for (std::size_t k = 0; k < gs.num_global(); ++k)
        if (gs.multiplicity()[k] == 4) target = k;
    std::vector<double> g(gs.num_global(), 0.0);
    g[target] = 1.0;
    const Field ind(gs.scatter(g));
    const Field out = apply_mass(d, ind);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (gs.global_ids()[i] == target)
            CHECK(out[i] > 0.0);
        else
            CHECK(out[i] == 0.0);
    }
    CHECK_THROWS_AS((void)apply_mass(d, Field(3)), DimensionError);
}

TEST_CASE("assembled mass is positive and sums to the volume") {
    for (const auto& d : {square(3, 2, 4), warped_square(3, 3, 5)}) {
        double total = 0.0;
        for (std::size_t i = 0; i < d.num_local(); ++i) {
            CHECK(d.assembled_mass()[i] > 0.0);
            total += d.assembled_mass()[i] / d.multiplicity()[i];
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
}

TEST_CASE("stiffness examples") {
    const auto d = square(2, 3, 6);
    const Field c(d.num_local(), 2.0);
    CHECK(max_abs(apply_stiffness(d, c)) <= 1e-11);

    const Field x = d.interpolate([](const Point& p) { return p[0]; });
    const Field ax = apply_stiffness(d, x);
    CHECK(std::abs(d.global_dot(ax, x) - 1.0) < 1e-12);
    const Field interior = d.boundary_mask([](FaceKind k) { return k == FaceKind::Dirichlet; });
    for (std::size_t i = 0; i < ax.size(); ++i)
        if (interior[i] == 1.0) CHECK(std::abs(ax[i]) < 1e-11);
}

TEST_CASE("stiffness is symmetric positive semidefinite with constant null space") {
    std::mt19937_64 rng(7);
    for (const auto& d : {square(2, 2, 5, true), warped_square(2, 3, 4)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Field u = random_continuous(d, rng);
            const Field v = random_continuous(d, rng);
            const double uv = d.global_dot(apply_stiffness(d, u), v);
            const double vu = d.global_dot(apply_stiffness(d, v), u);
            CHECK(std::abs(uv - vu) <= 1e-11 * std::max(1.0, std::abs(uv)));
            Field w = u;
            mean_free(d, w);
            CHECK(d.global_dot(apply_stiffness(d, w), w) > 0.0);
        }
        CHECK(max_abs(apply_stiffness(d, Field(d.num_local(), 1.0))) <= 1e-11);
    }
}

TEST_CASE("stiffness diagonal matches unit-vector probing") {
    const auto d = warped_square(2, 2, 3);
    const Field diag = stiffness_diagonal(d);
    const auto& gs = d.gather_scatter();
    for (std::size_t k = 0; k < gs.num_global(); ++k) {
        std::vector<double> g(gs.num_global(), 0.0);
        g[k] = 1.0;
        const Field e(gs.scatter(g));
        const Field ae = apply_stiffness(d, e);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (gs.global_ids()[i] == k) CHECK(std::abs(ae[i] - diag[i]) < 1e-12);
    }
}

TEST_CASE("gradient and divergence examples") {
    const auto d = square(3, 2, 4);
    const auto g0 = apply_gradient(d, Field(d.num_local(), 3.0));
    CHECK(max_abs(g0[0]) < 1e-12);
    CHECK(max_abs(g0[1]) < 1e-12);

    const Field x2 = d.interpolate([](const Point& p) { return p[0] * p[0]; });
    const auto g = apply_gradient(d, x2);
    const Field two_x = d.interpolate([](const Point& p) { return 2.0 * p[0]; });
    CHECK(max_abs(g[0] - two_x) < 1e-10);
    CHECK(max_abs(g[1]) < 1e-10);

    const VectorField rot{d.interpolate([](const Point& p) { return p[1]; }),
                          d.interpolate([](const Point& p) { return -p[0]; })};
    CHECK(max_abs(apply_divergence(d, rot)) < 1e-11);
    CHECK_THROWS_AS((void)apply_divergence(d, VectorField{rot[0]}), DimensionError);
}

TEST_CASE("gradient is exact for polynomials on affine 3-D elements") {
    BoxSpec s;
    s.dim = 3;
    s.counts = {2, 1, 2};
    s.hi = {2.0, 1.0, 0.5};
    const Discretization d(build_box_mesh(s, 4));
    const Field f = d.interpolate([](const Point& p) { return p[0] * p[1] * p[1] + p[2] * p[2] * p[2]; });
    const auto g = apply_gradient(d, f);
    CHECK(max_abs(g[0] - d.interpolate([](const Point& p) { return p[1] * p[1]; })) < 1e-10);
    CHECK(max_abs(g[1] - d.interpolate([](const Point& p) { return 2.0 * p[0] * p[1]; })) < 1e-10);
    CHECK(max_abs(g[2] - d.interpolate([](const Point& p) { return 3.0 * p[2] * p[2]; })) < 1e-10);

    const Field x = d.interpolate([](const Point& p) { return p[0]; });
    CHECK(std::abs(d.global_dot(apply_stiffness(d, x), x) - 1.0) < 1e-12);
}

TEST_CASE("divergence is the negative mass adjoint of the gradient on periodic meshes") {
    std::mt19937_64 rng(11);
    const auto d = square(3, 2, 5, true, 2.0);
    BoxSpec s3;
    s3.dim = 3;
    s3.counts = {2, 2, 2};
    s3.periodic = {true, true, true};
    const Discretization d3(build_box_mesh(s3, 3));
    for (const Discretization* disc : {&d, &d3}) {
        for (int trial = 0; trial < 4; ++trial) {
            VectorField u;
            for (int a = 0; a < disc->dim(); ++a) u.push_back(random_continuous(*disc, rng));
            const Field p = random_continuous(*disc, rng);
            const double lhs = disc->inner(apply_divergence(*disc, u), p);
            const auto gp = apply_gradient(*disc, p);
            double rhs = 0.0, unorm = 0.0;
            for (int a = 0; a < disc->dim(); ++a) {
                rhs += disc->inner(u[a], gp[a]);
                unorm += disc->inner(u[a], u[a]);
            }
            CHECK(std::abs(lhs + rhs) <= 1e-9 * std::sqrt(unorm) * norm(*disc, p));
        }
    }
}

TEST_CASE("convection examples") {
    const auto d = square(2, 2, 5);
    const Field theta = d.interpolate([](const Point& p) { return p[0]; });
    const VectorField zero{d.zeros(), d.zeros()};
    for (bool dealias : {false, true}) {
        CHECK(max_abs(apply_convection(d, zero, theta, dealias)) < 1e-14);
        const VectorField ux{Field(d.num_local(), 1.0), d.zeros()};
        const Field c = apply_convection(d, ux, theta, dealias);
        CHECK(max_abs(c - Field(d.num_local(), 1.0)) < 1e-12);
    }
}

TEST_CASE("dealiased convection is skew-symmetric for solenoidal velocity") {
    const auto d = square(3, 3, 6, true, 2.0 * pi);
    const VectorField u{d.interpolate([](const Point& p) { return std::sin(p[1]) + 0.3; }),
                        d.interpolate([](const Point& p) { return std::cos(2.0 * p[0]); })};
    const Field theta = d.interpolate([](const Point& p) { return std::exp(std::sin(p[0])) * std::cos(p[1]); });
    const double val = d.inner(apply_convection(d, u, theta, true), theta);
    CHECK(std::abs(val) <= 1e-8 * d.inner(theta, theta));
}

TEST_CASE("filter examples") {
    const auto d = square(2, 2, 6);
    const Field c(d.num_local(), -1.25);
    CHECK(max_abs(apply_filter(d, c, 2, 0.4) - c) < 1e-13);

    const auto one = square(1, 1, 6);
    const Field top = one.interpolate([](const Point& p) { return legendre(6, 2.0 * p[0] - 1.0).value; });
    CHECK(max_abs(apply_filter(one, top, 1, 1.0)) < 1e-11);

    std::mt19937_64 rng(3);
    const Field r = random_continuous(d, rng);
    const Field fr = apply_filter(d, r, 2, 0.3);
    CHECK(d.inner(fr, fr) < d.inner(r, r));
    const Field smooth = d.interpolate([](const Point& p) { return p[0] * p[1] + p[1]; });
    const Field fs = apply_filter(d, smooth, 2, 0.3);
    CHECK(d.inner(fs, fs) <= d.inner(smooth, smooth) * (1.0 + 1e-14));

    CHECK_THROWS_AS((void)apply_filter(d, c, 0, 0.5), ParameterError);
}

TEST_CASE("filter never increases energy on graded meshes") {
    BoxSpec s;
    s.dim = 2;
    s.counts = {3, 4, 1};
    s.grading = {1.0, 0.4, 1.0};
    const Discretization d(build_box_mesh(s, 5));
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Field r = random_continuous(d, rng);
        const Field fr = apply_filter(d, r, 1 + trial % 3, 0.1 + 0.09 * trial);
        CHECK(d.inner(fr, fr) <= d.inner(r, r));
    }
}
