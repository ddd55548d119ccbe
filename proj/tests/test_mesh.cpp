#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "sem/error.hpp"
#include "sem/mesh.hpp"

using namespace sem;

namespace {

BoxSpec square(int cx, int cy) {
    BoxSpec s;
    s.dim = 2;
    s.counts = {cx, cy, 1};
    return s;
}

double total_mass(const GeometricFactors& g) { return std::accumulate(g.mass.begin(), g.mass.end(), 0.0); }

}  // namespace

TEST_CASE("unit square single element") {
    const auto mesh = build_box_mesh(square(1, 1), 3);
    CHECK(mesh.num_elements() == 1);
    for (int f = 0; f < 4; ++f) CHECK(mesh.face(0, f).kind == FaceKind::Dirichlet);
    const auto basis = build_gll_basis(3);
    const auto g = compute_geometric_factors(mesh, basis);
    for (double j : g.jacobian) CHECK(std::abs(j - 0.25) < 1e-15);
    CHECK(std::abs(total_mass(g) - 1.0) < 1e-12);
}

TEST_CASE("periodic faces are paired") {
    auto spec = square(2, 2);
    spec.periodic = {true, false, false};
    const auto mesh = build_box_mesh(spec, 2);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto pos = mesh.element_position(e);
        if (pos[0] == 0) {
            const auto& t = mesh.face(e, 0);
            CHECK(t.kind == FaceKind::Periodic);
            CHECK(mesh.element_position(t.partner_element)[0] == 1);
            CHECK(t.partner_face == 1);
            const auto& back = mesh.face(t.partner_element, 1);
            CHECK(back.kind == FaceKind::Periodic);
            CHECK(back.partner_element == e);
        }
        CHECK(mesh.face(e, 2).kind != FaceKind::Periodic);
    }
}

TEST_CASE("periodic partner faces are congruent") {
    auto spec = square(3, 2);
    spec.periodic = {true, true, false};
    spec.hi = {2.0, 1.5, 1.0};
    const auto mesh = build_box_mesh(spec, 2);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        for (int f = 0; f < 4; ++f) {
            const auto& t = mesh.face(e, f);
            if (t.kind != FaceKind::Periodic) continue;
            const int axis = f / 2;
            const int other = 1 - axis;
            // tangential extents match
            double a0 = 1e30, a1 = -1e30, b0 = 1e30, b1 = -1e30;
            for (int c = 0; c < 4; ++c) {
                if (((c >> axis) & 1) == f % 2) {
                    a0 = std::min(a0, mesh.corner(e, c)[other]);
                    a1 = std::max(a1, mesh.corner(e, c)[other]);
                }
                if (((c >> axis) & 1) == t.partner_face % 2) {
                    b0 = std::min(b0, mesh.corner(t.partner_element, c)[other]);
                    b1 = std::max(b1, mesh.corner(t.partner_element, c)[other]);
                }
            }
            CHECK(std::abs(a0 - b0) < 1e-10);
            CHECK(std::abs(a1 - b1) < 1e-10);
        }
}

TEST_CASE("interior faces are shared by exactly two elements") {
    BoxSpec spec;
    spec.dim = 3;
    spec.counts = {3, 2, 2};
    const auto mesh = build_box_mesh(spec, 2);
    std::map<std::pair<std::size_t, int>, int> seen;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        for (int f = 0; f < 6; ++f) {
            const auto& t = mesh.face(e, f);
            if (t.kind != FaceKind::Interior) continue;
            const auto& back = mesh.face(t.partner_element, t.partner_face);
            CHECK(back.kind == FaceKind::Interior);
            CHECK(back.partner_element == e);
            CHECK(back.partner_face == f);
            CHECK(t.partner_element != e);
        }
}

TEST_CASE("geometric grading") {
    auto spec = square(1, 4);
    spec.grading = {1.0, 0.5, 1.0};
    const auto mesh = build_box_mesh(spec, 5);
    const auto& b = mesh.breakpoints(1);
    const double total = 1.0 + 0.5 + 0.25 + 0.125;
    const double expected[4] = {1.0 / total, 0.5 / total, 0.25 / total, 0.125 / total};
    for (int i = 0; i < 4; ++i) CHECK(std::abs((b[i + 1] - b[i]) - expected[i]) < 1e-15);

    const auto basis = build_gll_basis(5);
    const auto g = compute_geometric_factors(mesh, basis);
    CHECK(std::abs(total_mass(g) - 1.0) < 1e-12);
}

TEST_CASE("invalid box specifications") {
    auto s = square(0, 1);
    CHECK_THROWS_AS((void)build_box_mesh(s, 2), MeshError);
    s = square(1, 1);
    s.hi[0] = 0.0;
    CHECK_THROWS_AS((void)build_box_mesh(s, 2), MeshError);
    s = square(1, 1);
    s.grading[1] = -1.0;
    CHECK_THROWS_AS((void)build_box_mesh(s, 2), MeshError);
    s = square(1, 1);
    s.dim = 4;
    CHECK_THROWS_AS((void)build_box_mesh(s, 2), MeshError);
}

TEST_CASE("inverted element is reported by index") {
    const auto mesh = build_box_mesh(square(2, 1), 2);
    // mirror the second element in x so its corner ordering turns left-handed
    const auto bad = transform_corners(mesh, [](const Point& p) {
        Point q = p;
        if (p[0] > 0.75) q[0] = 0.5 - (p[0] - 1.0) * 0.1 - 0.2;
        return q;
    });
    const auto basis = build_gll_basis(2);
    try {
        (void)compute_geometric_factors(bad, basis);
        FAIL("expected an inverted element");
    } catch (const InvertedElementError& e) {
        CHECK(e.element() == 1);
    }
}

TEST_CASE("volume is conserved on curved, graded and 3-D meshes") {
    auto s = square(3, 2);
    s.hi = {2.0, 3.0, 1.0};
    s.grading = {1.7, 0.6, 1.0};
    const auto mesh = build_box_mesh(s, 6);
    const auto g = compute_geometric_factors(mesh, build_gll_basis(6));
    CHECK(std::abs(total_mass(g) - 6.0) < 1e-10);

    // bilinear shear keeps the area of the box
    const auto sheared = transform_corners(mesh, [](const Point& p) {
        return Point{p[0] + 0.2 * p[1], p[1], 0.0};
    });
    const auto gs = compute_geometric_factors(sheared, build_gll_basis(6));
    CHECK(std::abs(total_mass(gs) - 6.0) < 1e-10);

    BoxSpec c;
    c.dim = 3;
    c.counts = {2, 3, 2};
    c.lo = {-1.0, 0.0, 0.0};
    c.hi = {1.0, 1.0, 0.5};
    c.grading = {1.0, 1.3, 0.8};
    const auto m3 = build_box_mesh(c, 4);
    const auto g3 = compute_geometric_factors(m3, build_gll_basis(4));
    CHECK(std::abs(total_mass(g3) - 1.0) < 1e-10);
    for (double j : g3.jacobian) CHECK(j > 0.0);
}

TEST_CASE("metric terms invert the element map") {
    BoxSpec c;
    c.dim = 3;
    c.counts = {1, 1, 1};
    const auto mesh = transform_corners(build_box_mesh(c, 3), [](const Point& p) {
        return Point{p[0] + 0.1 * p[1] * p[2], p[1] + 0.2 * p[0], 1.5 * p[2] + 0.1 * p[0] * p[1]};
    });
    const auto basis = build_gll_basis(3);
    const auto g = compute_geometric_factors(mesh, basis);
    // finite-difference check of d xi / d x via the inverse of d x / d xi
    const double h = 1e-6;
    for (int n = 0; n < 64; n += 7) {
        const int n1 = 4;
        Point xi{basis.nodes()[n % n1], basis.nodes()[(n / n1) % n1], basis.nodes()[n / 16]};
        double jac[3][3];
        for (int b = 0; b < 3; ++b) {
            Point p = xi, m = xi;
            p[b] += h;
            m[b] -= h;
            const auto xp = map_to_physical(mesh, 0, p);
            const auto xm = map_to_physical(mesh, 0, m);
            for (int a = 0; a < 3; ++a) jac[a][b] = (xp[a] - xm[a]) / (2 * h);
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double s = 0.0;
                for (int c2 = 0; c2 < 3; ++c2) s += g.metric_at(n, a, c2) * jac[c2][b];
                CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-8);
            }
    }
}

TEST_CASE("gather-scatter counts") {
    const auto b2 = build_gll_basis(2);
    {
        const auto gs = build_gather_scatter(build_box_mesh(square(1, 1), 2), b2);
        CHECK(gs.num_global() == 9);
        for (int m : gs.multiplicity()) CHECK(m == 1);
    }
    {
        const auto gs = build_gather_scatter(build_box_mesh(square(2, 1), 2), b2);
        CHECK(gs.num_global() == 15);
        CHECK(std::count(gs.multiplicity().begin(), gs.multiplicity().end(), 2) == 3);
    }
    {
        auto s = square(1, 1);
        s.periodic = {true, false, false};
        const auto gs = build_gather_scatter(build_box_mesh(s, 2), b2);
        CHECK(gs.num_global() == 6);
        CHECK(std::count(gs.multiplicity().begin(), gs.multiplicity().end(), 2) == 3);
    }
    for (int n : {1, 3, 5}) {
        for (int cx : {1, 2, 3}) {
            for (int cy : {1, 2}) {
                const auto b = build_gll_basis(n);
                const auto gs = build_gather_scatter(build_box_mesh(square(cx, cy), n), b);
                CHECK(gs.num_global() == static_cast<std::size_t>((cx * n + 1) * (cy * n + 1)));
                auto sp = square(cx, cy);
                sp.periodic = {true, false, false};
                const auto gp = build_gather_scatter(build_box_mesh(sp, n), b);
                // one face line of nodes is identified with its partner
                CHECK(gs.num_global() - gp.num_global() == static_cast<std::size_t>(cy * n + 1));
            }
        }
    }
    BoxSpec c;
    c.dim = 3;
    c.counts = {2, 2, 3};
    c.periodic = {true, false, true};
    const auto gs3 = build_gather_scatter(build_box_mesh(c, 3), build_gll_basis(3));
    CHECK(gs3.num_global() == static_cast<std::size_t>(6 * 7 * 9));
}

TEST_CASE("gather and scatter round trip") {
    auto s = square(3, 2);
    s.periodic = {true, true, false};
    const auto mesh = build_box_mesh(s, 4);
    const auto basis = build_gll_basis(4);
    const auto gs = build_gather_scatter(mesh, basis);
    std::vector<double> global(gs.num_global());
    for (std::size_t i = 0; i < global.size(); ++i) global[i] = std::sin(1.0 + i);
    const auto local = gs.scatter(global);
    const auto back = gs.gather(local);
    for (std::size_t i = 0; i < global.size(); ++i) CHECK(back[i] == doctest::Approx(global[i]).epsilon(1e-15));

    // scatter(gather(.)) averages copies and is idempotent
    std::vector<double> noisy(local.size());
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] = std::cos(3.0 * i);
    const auto once = gs.scatter(gs.gather(noisy));
    const auto twice = gs.scatter(gs.gather(once));
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(std::abs(once[i] - twice[i]) < 1e-15);

    // coincident coordinates share an id
    const auto g = compute_geometric_factors(mesh, basis);
    for (std::size_t i = 0; i < local.size(); ++i)
        for (std::size_t j = i + 1; j < local.size(); j += 13) {
            if (gs.global_ids()[i] != gs.global_ids()[j]) continue;
            auto pi = g.coordinates[i], pj = g.coordinates[j];
            for (int d = 0; d < 2; ++d) {
                double diff = std::abs(pi[d] - pj[d]);
                const double len = s.hi[d] - s.lo[d];
                diff = std::min(diff, std::abs(diff - len));
                CHECK(diff < 1e-8);
            }
        }
}

TEST_CASE("y+ spacing report") {
    SUBCASE("first point distance equals y+ at unit scales") {
        const auto mesh = build_box_mesh(square(1, 1), 4);
        const auto basis = build_gll_basis(4);
        const auto r = yplus_spacing_report(mesh, basis, 1.0, 1.0);
        REQUIRE(r.size() == 4);
        const double delta = 0.5 * (basis.nodes()[1] + 1.0);
        for (const auto& w : r) CHECK(std::abs(w.first_point_yplus - delta) < 1e-14);
    }
    SUBCASE("graded mesh tuned for the wall criterion passes") {
        auto s = square(1, 6);
        s.grading = {1.0, 1.5, 1.0};
        s.periodic = {true, false, false};
        const int n = 4;
        const auto mesh = build_box_mesh(s, n);
        const auto basis = build_gll_basis(n);
        const auto& br = mesh.breakpoints(1);
        const double width0 = br[1] - br[0];
        const double delta = 0.5 * (basis.nodes()[1] + 1.0) * width0;
        const double scale = 0.8 / delta;  // u_tau / nu placing the first point at y+ = 0.8
        // analytic count: off-wall nodes of the wall element (graded) with y+ < 10
        int expected = 0;
        for (std::size_t e = 0; e + 1 < br.size(); ++e)
            for (int i = 1; i <= n; ++i) {
                const double y = br[e] + 0.5 * (basis.nodes()[i] + 1.0) * (br[e + 1] - br[e]) - br[0];
                if (y * scale < 10.0) ++expected;
            }
        const auto r = yplus_spacing_report(mesh, basis, scale, 1.0);
        REQUIRE(r.size() == 2);
        CHECK(r[0].axis == 1);
        CHECK(r[0].side == 0);
        CHECK(std::abs(r[0].first_point_yplus - 0.8) < 1e-12);
        CHECK(r[0].points_below_10 == expected);
        CHECK(expected == 6);
        CHECK(r[0].pass());
    }
    SUBCASE("coarse uniform mesh fails both criteria") {
        const auto mesh = build_box_mesh(square(1, 1), 2);
        const auto basis = build_gll_basis(2);
        const auto r = yplus_spacing_report(mesh, basis, 10.0, 1.0);  // first point y+ = 5
        REQUIRE(!r.empty());
        CHECK(std::abs(r[0].first_point_yplus - 5.0) < 1e-12);
        CHECK_FALSE(r[0].first_point_ok);
        CHECK_FALSE(r[0].count_ok);
        CHECK_FALSE(r[0].pass());
    }
    SUBCASE("no walls gives an empty report") {
        auto s = square(2, 2);
        s.periodic = {true, true, false};
        CHECK(yplus_spacing_report(build_box_mesh(s, 3), build_gll_basis(3), 1.0, 1.0).empty());
    }
}
