#include "sem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "sem/error.hpp"

namespace sem {

namespace {

const char* axis_name(int axis) {
    static constexpr const char* names[] = {"x", "y", "z"};
    return names[axis];
}

std::vector<double> graded_breakpoints(int count, double lo, double hi, double ratio) {
    std::vector<double> widths(count);
    double w = 1.0, total = 0.0;
    for (int i = 0; i < count; ++i) {
        widths[i] = w;
        total += w;
        w *= ratio;
    }
    std::vector<double> b(count + 1);
    b[0] = lo;
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
        acc += widths[i];
        b[i + 1] = lo + (hi - lo) * acc / total;
    }
    b[count] = hi;
    return b;
}

}  // namespace

std::array<int, 3> Mesh::element_position(std::size_t element) const {
    const auto& c = spec_.counts;
    const auto e = static_cast<int>(element);
    return {e % c[0], (e / c[0]) % c[1], e / (c[0] * c[1])};
}

double Mesh::volume() const {
    double v = 1.0;
    for (int d = 0; d < spec_.dim; ++d) v *= spec_.hi[d] - spec_.lo[d];
    return v;
}

Mesh build_box_mesh(const BoxSpec& spec, int order) {
    if (spec.dim != 2 && spec.dim != 3)
        throw MeshError("mesh dimension must be 2 or 3, got " + std::to_string(spec.dim));
    if (order < 1 || order > max_order)
        throw MeshError("polynomial order " + std::to_string(order) + " out of range");

    Mesh mesh;
    mesh.spec_ = spec;
    mesh.order_ = order;
    auto& s = mesh.spec_;
    for (int d = spec.dim; d < 3; ++d) {
        s.counts[d] = 1;
        s.periodic[d] = false;
        s.grading[d] = 1.0;
    }
    for (int d = 0; d < spec.dim; ++d) {
        if (s.counts[d] < 1)
            throw MeshError(std::string("element count along ") + axis_name(d) + " must be >= 1");
        if (!(s.lo[d] < s.hi[d]))
            throw MeshError(std::string("degenerate bounds along ") + axis_name(d));
        if (!(s.grading[d] > 0.0))
            throw MeshError(std::string("grading ratio along ") + axis_name(d) + " must be > 0");
        for (int side = 0; side < 2; ++side) {
            const FaceKind k = s.boundary[d][side];
            if (!s.periodic[d] && k != FaceKind::Dirichlet && k != FaceKind::Neumann)
                throw MeshError(std::string("boundary along ") + axis_name(d) +
                                " must be Dirichlet or Neumann");
        }
        mesh.breaks_[d] = graded_breakpoints(s.counts[d], s.lo[d], s.hi[d], s.grading[d]);
    }
    for (int d = spec.dim; d < 3; ++d) mesh.breaks_[d] = {0.0, 0.0};

    const int dim = spec.dim;
    const std::size_t ne = static_cast<std::size_t>(s.counts[0]) * s.counts[1] * s.counts[2];
    const int nc = 1 << dim;
    mesh.corners_.resize(ne * nc);
    mesh.faces_.resize(ne * 2 * dim);

    auto element_index = [&](std::array<int, 3> p) {
        return static_cast<std::size_t>(p[0] + s.counts[0] * (p[1] + s.counts[1] * p[2]));
    };

    for (std::size_t e = 0; e < ne; ++e) {
        const auto pos = mesh.element_position(e);
        for (int c = 0; c < nc; ++c) {
            Point x{0.0, 0.0, 0.0};
            for (int d = 0; d < dim; ++d) x[d] = mesh.breaks_[d][pos[d] + ((c >> d) & 1)];
            mesh.corners_[e * nc + c] = x;
        }
        for (int d = 0; d < dim; ++d) {
            for (int side = 0; side < 2; ++side) {
                FaceTag& tag = mesh.faces_[e * 2 * dim + 2 * d + side];
                auto nb = pos;
                nb[d] += side == 0 ? -1 : 1;
                const int opposite = 2 * d + (1 - side);
                if (nb[d] >= 0 && nb[d] < s.counts[d]) {
                    tag = {FaceKind::Interior, element_index(nb), opposite};
                } else if (s.periodic[d]) {
                    nb[d] = (nb[d] + s.counts[d]) % s.counts[d];
                    tag = {FaceKind::Periodic, element_index(nb), opposite};
                } else {
                    tag = {s.boundary[d][side], 0, -1};
                }
            }
        }
    }
    return mesh;
}

Mesh transform_corners(const Mesh& mesh, const std::function<Point(const Point&)>& map) {
    Mesh out = mesh;
    for (auto& c : out.corners_) c = map(c);
    return out;
}

Point map_to_physical(const Mesh& mesh, std::size_t element, const Point& xi) {
    const int dim = mesh.dim();
    Point x{0.0, 0.0, 0.0};
    for (int c = 0; c < mesh.corners_per_element(); ++c) {
        double shape = 1.0;
        for (int d = 0; d < dim; ++d) shape *= 0.5 * (((c >> d) & 1) ? 1.0 + xi[d] : 1.0 - xi[d]);
        const Point& xc = mesh.corner(element, c);
        for (int d = 0; d < dim; ++d) x[d] += shape * xc[d];
    }
    return x;
}

GeometricFactors compute_geometric_factors(const Mesh& mesh, std::span<const double> pts,
                                           std::span<const double> wts) {
    const int dim = mesh.dim();
    const int n1 = static_cast<int>(pts.size());
    const int npe = dim == 2 ? n1 * n1 : n1 * n1 * n1;
    const std::size_t ne = mesh.num_elements();
    const int nc = mesh.corners_per_element();

    GeometricFactors g;
    g.dim = dim;
    g.nodes_per_element = npe;
    g.coordinates.resize(ne * npe);
    g.jacobian.resize(ne * npe);
    g.metric.assign(ne * npe * 9, 0.0);
    g.mass.resize(ne * npe);
    g.stiffness.assign(ne * npe * 9, 0.0);

    for (std::size_t e = 0; e < ne; ++e) {
        for (int n = 0; n < npe; ++n) {
            const int idx[3] = {n % n1, (n / n1) % n1, n / (n1 * n1)};
            double xi[3] = {0.0, 0.0, 0.0};
            double w = 1.0;
            for (int d = 0; d < dim; ++d) {
                xi[d] = pts[idx[d]];
                w *= wts[idx[d]];
            }
            // jac[a][b] = d x_a / d xi_b
            double jac[3][3] = {{0.0}};
            Point x{0.0, 0.0, 0.0};
            for (int c = 0; c < nc; ++c) {
                double f[3], df[3];
                for (int d = 0; d < dim; ++d) {
                    const bool hi = (c >> d) & 1;
                    f[d] = 0.5 * (hi ? 1.0 + xi[d] : 1.0 - xi[d]);
                    df[d] = hi ? 0.5 : -0.5;
                }
                const Point& xc = mesh.corner(e, c);
                double shape = 1.0;
                for (int d = 0; d < dim; ++d) shape *= f[d];
                for (int b = 0; b < dim; ++b) {
                    double ds = df[b];
                    for (int d = 0; d < dim; ++d)
                        if (d != b) ds *= f[d];
                    for (int a = 0; a < dim; ++a) jac[a][b] += ds * xc[a];
                }
                for (int a = 0; a < dim; ++a) x[a] += shape * xc[a];
            }
            double det;
            double inv[3][3] = {{0.0}};
            if (dim == 2) {
                det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                inv[0][0] = jac[1][1] / det;
                inv[0][1] = -jac[0][1] / det;
                inv[1][0] = -jac[1][0] / det;
                inv[1][1] = jac[0][0] / det;
            } else {
                det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) -
                      jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0]) +
                      jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        const int a1 = (b + 1) % 3, a2 = (b + 2) % 3;
                        const int b1 = (a + 1) % 3, b2 = (a + 2) % 3;
                        inv[a][b] = (jac[a1][b1] * jac[a2][b2] - jac[a1][b2] * jac[a2][b1]) / det;
                    }
            }
            if (!(det > 0.0)) throw InvertedElementError(e, det);

            const std::size_t node = e * npe + n;
            g.coordinates[node] = x;
            g.jacobian[node] = det;
            g.mass[node] = w * det;
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) g.metric[node * 9 + 3 * a + b] = inv[a][b];
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) {
                    double s = 0.0;
                    for (int c = 0; c < dim; ++c) s += inv[a][c] * inv[b][c];
                    g.stiffness[node * 9 + 3 * a + b] = g.mass[node] * s;
                }
        }
    }
    return g;
}

GeometricFactors compute_geometric_factors(const Mesh& mesh, const Basis1D& basis) {
    if (mesh.order() != basis.order())
        throw DimensionError("mesh order " + std::to_string(mesh.order()) +
                             " does not match basis order " + std::to_string(basis.order()));
    return compute_geometric_factors(mesh, basis.nodes(), basis.weights());
}

std::vector<double> GatherScatter::gather_sum(std::span<const double> local) const {
    if (local.size() != global_ids_.size()) throw DimensionError("gather: local size mismatch");
    std::vector<double> g(num_global(), 0.0);
    for (std::size_t i = 0; i < local.size(); ++i) g[global_ids_[i]] += local[i];
    return g;
}

std::vector<double> GatherScatter::gather(std::span<const double> local) const {
    auto g = gather_sum(local);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] /= multiplicity_[k];
    return g;
}

std::vector<double> GatherScatter::scatter(std::span<const double> global) const {
    if (global.size() != num_global()) throw DimensionError("scatter: global size mismatch");
    std::vector<double> local(global_ids_.size());
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = global[global_ids_[i]];
    return local;
}

void GatherScatter::dssum(std::span<double> local) const {
    const auto g = gather_sum(local);
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = g[global_ids_[i]];
}

GatherScatter build_gather_scatter(const Mesh& mesh, const Basis1D& basis) {
    if (mesh.order() != basis.order()) throw DimensionError("gather-scatter: mesh/basis order mismatch");
    const auto geo = compute_geometric_factors(mesh, basis);
    const int dim = mesh.dim();
    const auto& box = mesh.box();
    const std::size_t nl = geo.coordinates.size();

    std::vector<Point> x = geo.coordinates;
    for (auto& p : x)
        for (int d = 0; d < dim; ++d)
            if (box.periodic[d] && std::abs(p[d] - box.hi[d]) < node_tolerance) p[d] = box.lo[d];

    // cluster each coordinate independently; coincident nodes share all cluster indices
    std::vector<std::array<int, 3>> key(nl, {0, 0, 0});
    std::vector<std::size_t> order(nl);
    for (int d = 0; d < dim; ++d) {
        for (std::size_t i = 0; i < nl; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x[a][d] < x[b][d]; });
        int cluster = 0;
        for (std::size_t k = 0; k < nl; ++k) {
            if (k > 0 && x[order[k]][d] - x[order[k - 1]][d] > node_tolerance) ++cluster;
            key[order[k]][d] = cluster;
        }
    }

    GatherScatter gs;
    gs.global_ids_.resize(nl);
    std::map<std::array<int, 3>, std::size_t> ids;
    for (std::size_t i = 0; i < nl; ++i) {
        auto [it, inserted] = ids.try_emplace(key[i], gs.multiplicity_.size());
        if (inserted) gs.multiplicity_.push_back(0);
        gs.global_ids_[i] = it->second;
        ++gs.multiplicity_[it->second];
    }
    return gs;
}

std::vector<WallResolution> yplus_spacing_report(const Mesh& mesh, const Basis1D& basis,
                                                 double friction_velocity, double viscosity) {
    if (!(friction_velocity > 0.0) || !(viscosity > 0.0))
        throw ParameterError("y+ report needs positive friction velocity and viscosity");
    std::vector<WallResolution> report;
    const auto& box = mesh.box();
    for (int d = 0; d < mesh.dim(); ++d) {
        if (box.periodic[d]) continue;
        const auto& br = mesh.breakpoints(d);
        std::vector<double> line;
        for (std::size_t i = 0; i + 1 < br.size(); ++i)
            for (double xi : basis.nodes()) line.push_back(br[i] + 0.5 * (xi + 1.0) * (br[i + 1] - br[i]));
        for (int side = 0; side < 2; ++side) {
            if (box.boundary[d][side] != FaceKind::Dirichlet) continue;
            std::vector<double> dist;
            for (double v : line) {
                const double y = side == 0 ? v - box.lo[d] : box.hi[d] - v;
                if (y > node_tolerance) dist.push_back(y);
            }
            std::sort(dist.begin(), dist.end());
            dist.erase(std::unique(dist.begin(), dist.end(),
                                   [](double a, double b) { return b - a <= node_tolerance; }),
                       dist.end());
            WallResolution w;
            w.axis = d;
            w.side = side;
            const double scale = friction_velocity / viscosity;
            w.first_point_yplus = dist.empty() ? 0.0 : dist.front() * scale;
            w.points_below_10 = static_cast<int>(
                std::count_if(dist.begin(), dist.end(), [&](double y) { return y * scale < 10.0; }));
            w.first_point_ok = !dist.empty() && w.first_point_yplus < 1.0;
            w.count_ok = w.points_below_10 >= 5;
            report.push_back(w);
        }
    }
    return report;
}

}  // namespace sem
