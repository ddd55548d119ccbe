#include "sem/cases.hpp"

#include <cmath>
#include <numbers>

#include "sem/error.hpp"

namespace sem {

using std::numbers::pi;

namespace {

double unit(const BoxSpec& b, const Point& x, int d) { return (x[d] - b.lo[d]) / (b.hi[d] - b.lo[d]); }

bool on_side(const BoxSpec& b, const Point& x, int d, int side) {
    const double target = side == 0 ? b.lo[d] : b.hi[d];
    return std::abs(x[d] - target) <= node_tolerance * std::max(1.0, std::abs(target));
}

}  // namespace

bool has_analytic_reference(CaseKind kind) {
    return kind == CaseKind::TaylorGreen || kind == CaseKind::Kovasznay || kind == CaseKind::Diffusion;
}

CaseSetup make_case(const RunConfig& c) {
    CaseSetup s;
    s.box = c.box;
    const BoxSpec b = c.box;
    const int dim = b.dim;
    const double nu = c.physics.kinematic_viscosity();
    const auto force = c.body_force;
    if (force[0] != 0.0 || force[1] != 0.0 || force[2] != 0.0)
        s.data.body_force = [force](const Point&, double) { return force; };
    auto zero_velocity = [](const Point&, double) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
    auto zero_scalar = [](const Point&, double) { return 0.0; };
    s.initial_velocity = zero_velocity;
    s.initial_temperature = zero_scalar;

    switch (c.kind) {
    case CaseKind::TaylorGreen: {
        s.exact_velocity = [nu](const Point& x, double t) {
            const double decay = std::exp(-2.0 * nu * t);
            return std::array<double, 3>{std::sin(x[0]) * std::cos(x[1]) * decay,
                                         -std::cos(x[0]) * std::sin(x[1]) * decay, 0.0};
        };
        s.initial_velocity = s.exact_velocity;
        break;
    }
    case CaseKind::Kovasznay: {
        const double re = 1.0 / nu;
        const double lam = re / 2.0 - std::sqrt(re * re / 4.0 + 4.0 * pi * pi);
        s.exact_velocity = [lam](const Point& x, double) {
            const double e = std::exp(lam * x[0]);
            return std::array<double, 3>{1.0 - e * std::cos(2.0 * pi * x[1]),
                                         lam / (2.0 * pi) * e * std::sin(2.0 * pi * x[1]), 0.0};
        };
        s.data.velocity_boundary = s.exact_velocity;
        s.initial_velocity = [](const Point&, double) { return std::array<double, 3>{1.0, 0.0, 0.0}; };
        break;
    }
    case CaseKind::LidCavity: {
        s.data.velocity_boundary = [b, dim](const Point& x, double) {
            if (!on_side(b, x, 1, 1)) return std::array<double, 3>{0.0, 0.0, 0.0};
            const double sx = unit(b, x, 0);
            double u = 16.0 * sx * sx * (1.0 - sx) * (1.0 - sx);
            if (dim == 3) {
                const double sz = unit(b, x, 2);
                u *= 16.0 * sz * sz * (1.0 - sz) * (1.0 - sz);
            }
            return std::array<double, 3>{u, 0.0, 0.0};
        };
        s.data.temperature_boundary = [b](const Point& x, double) { return on_side(b, x, 1, 1) ? 1.0 : 0.0; };
        break;
    }
    case CaseKind::Channel: {
        // laminar profile driven by the streamwise body force
        const double h = 0.5 * (b.hi[1] - b.lo[1]);
        const double mid = 0.5 * (b.hi[1] + b.lo[1]);
        const double peak = force[0] * h * h / (2.0 * nu);
        auto laminar = [h, mid, peak](const Point& x, double) {
            const double eta = (x[1] - mid) / h;
            return std::array<double, 3>{peak * (1.0 - eta * eta), 0.0, 0.0};
        };
        s.initial_velocity = laminar;
        s.exact_velocity = laminar;
        break;
    }
    case CaseKind::CustomBox:
        break;
    case CaseKind::Diffusion: {
        s.solve_flow = false;
        double rate = 0.0;
        for (int d = 0; d < dim; ++d) rate += std::pow(pi / (b.hi[d] - b.lo[d]), 2);
        rate *= c.physics.diffusivity();
        s.exact_temperature = [b, dim, rate](const Point& x, double t) {
            double v = std::exp(-rate * t);
            for (int d = 0; d < dim; ++d) v *= std::sin(pi * unit(b, x, d));
            return v;
        };
        s.initial_temperature = s.exact_temperature;
        break;
    }
    }
    return s;
}

ProbeSet::ProbeSet(const Discretization& disc, std::vector<Point> points)
    : disc_(&disc), points_(std::move(points)) {
    const Mesh& mesh = disc.mesh();
    const int dim = disc.dim();
    const auto& counts = mesh.box().counts;
    for (const Point& p : points_) {
        std::size_t element = 0, stride = 1;
        std::array<std::vector<double>, 3> w;
        for (int d = 0; d < dim; ++d) {
            const auto& br = mesh.breakpoints(d);
            const double tol = node_tolerance * (br.back() - br.front());
            if (p[d] < br.front() - tol || p[d] > br.back() + tol)
                throw ParameterError("probe point lies outside the mesh");
            int cell = 0;
            while (cell + 1 < counts[d] && p[d] > br[cell + 1]) ++cell;
            const double xi = std::clamp(2.0 * (p[d] - br[cell]) / (br[cell + 1] - br[cell]) - 1.0, -1.0, 1.0);
            const double target[1] = {xi};
            const Matrix row = interpolation_matrix(disc.basis(), target);
            w[d].assign(row.data(), row.data() + row.cols());
            element += stride * static_cast<std::size_t>(cell);
            stride *= static_cast<std::size_t>(counts[d]);
        }
        element_.push_back(element);
        weights_.push_back(std::move(w));
    }
}

double ProbeSet::evaluate(std::size_t probe, const Field& field) const {
    const int n = disc_->n1d();
    const int dim = disc_->dim();
    const auto& w = weights_[probe];
    const double* f = field.data() + element_[probe] * disc_->nodes_per_element();
    double sum = 0.0;
    const int nz = dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double wz = dim == 3 ? w[2][k] : 1.0;
                sum += w[0][i] * w[1][j] * wz * f[i + n * (j + n * k)];
            }
    return sum;
}

}  // namespace sem
