#include "sem/operators.hpp"

#include <cmath>
#include <string>

#include "sem/error.hpp"

namespace sem {

void tensor_apply(const Matrix& a, int axis, const std::array<int, 3>& shape, const double* in,
                  double* out) {
    const int rows = static_cast<int>(a.rows());
    const int cols = static_cast<int>(a.cols());
    int inner = 1, outer = 1;
    for (int d = 0; d < axis; ++d) inner *= shape[d];
    for (int d = axis + 1; d < 3; ++d) outer *= shape[d];
    const double* am = a.data();
    if (inner == 1) {
        for (int o = 0; o < outer; ++o) {
            const double* src = in + static_cast<std::size_t>(o) * cols;
            double* dst = out + static_cast<std::size_t>(o) * rows;
            for (int r = 0; r < rows; ++r) {
                const double* arow = am + static_cast<std::size_t>(r) * cols;
                double s = 0.0;
                for (int c = 0; c < cols; ++c) s += arow[c] * src[c];
                dst[r] = s;
            }
        }
        return;
    }
    for (int o = 0; o < outer; ++o) {
        const double* src = in + static_cast<std::size_t>(o) * cols * inner;
        double* dst = out + static_cast<std::size_t>(o) * rows * inner;
        for (int r = 0; r < rows; ++r) {
            double* drow = dst + static_cast<std::size_t>(r) * inner;
            for (int i = 0; i < inner; ++i) drow[i] = 0.0;
            for (int c = 0; c < cols; ++c) {
                const double coef = am[static_cast<std::size_t>(r) * cols + c];
                const double* srow = src + static_cast<std::size_t>(c) * inner;
                for (int i = 0; i < inner; ++i) drow[i] += coef * srow[i];
            }
        }
    }
}

namespace {

int fine_points(int order) { return (3 * (order + 1) + 1) / 2; }

/// Applies `m` along every axis, mapping an n^dim block to an r^dim block.
void tensor_apply_all(const Matrix& m, int dim, const double* in, double* out,
                      std::vector<double>& work_a, std::vector<double>& work_b) {
    const int n = static_cast<int>(m.cols());
    const int r = static_cast<int>(m.rows());
    const int big = std::max(n, r);
    const std::size_t cap = static_cast<std::size_t>(big) * big * (dim == 3 ? big : 1);
    work_a.resize(cap);
    work_b.resize(cap);
    std::array<int, 3> shape{n, n, dim == 3 ? n : 1};
    if (dim == 2) {
        tensor_apply(m, 0, shape, in, work_a.data());
        shape[0] = r;
        tensor_apply(m, 1, shape, work_a.data(), out);
        return;
    }
    tensor_apply(m, 0, shape, in, work_a.data());
    shape[0] = r;
    tensor_apply(m, 1, shape, work_a.data(), work_b.data());
    shape[1] = r;
    tensor_apply(m, 2, shape, work_b.data(), out);
}

/// Reference-coordinate derivatives of one element block.
void reference_gradient(const Discretization& disc, const double* u, std::array<double*, 3> out) {
    const auto shape = disc.element_shape();
    for (int a = 0; a < disc.dim(); ++a) tensor_apply(disc.diff(), a, shape, u, out[a]);
}

}  // namespace

Discretization::Discretization(Mesh mesh)
    : mesh_(std::move(mesh)),
      basis_(build_gll_basis(mesh_.order())),
      geo_(compute_geometric_factors(mesh_, basis_)),
      gs_(build_gather_scatter(mesh_, basis_)) {
    mass_assembled_ = geo_.mass;
    gs_.dssum(mass_assembled_);
    mult_.resize(num_local());
    for (std::size_t i = 0; i < mult_.size(); ++i)
        mult_[i] = gs_.multiplicity()[gs_.global_ids()[i]];
    diff_t_ = basis_.diff_matrix().transpose();

    fine_rule_ = gauss_legendre(fine_points(mesh_.order()));
    to_fine_ = interpolation_matrix(basis_, fine_rule_.nodes);
    from_fine_ = to_fine_.transpose();
    fine_geo_ = compute_geometric_factors(mesh_, fine_rule_.nodes, fine_rule_.weights);
}

std::array<int, 3> Discretization::element_shape() const noexcept {
    const int n = n1d();
    return {n, n, dim() == 3 ? n : 1};
}

void Discretization::check(const Field& f, const char* what) const {
    if (f.size() != num_local())
        throw DimensionError(std::string(what) + ": field has " + std::to_string(f.size()) +
                             " values, discretization expects " + std::to_string(num_local()));
}

Field Discretization::interpolate(const std::function<double(const Point&)>& f) const {
    Field out(num_local());
    for (std::size_t i = 0; i < num_local(); ++i) out[i] = f(geo_.coordinates[i]);
    return out;
}

double Discretization::inner(const Field& a, const Field& b) const {
    check(a, "inner");
    check(b, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < num_local(); ++i) s += geo_.mass[i] * a[i] * b[i];
    return s;
}

double Discretization::integrate(const Field& a) const {
    check(a, "integrate");
    double s = 0.0;
    for (std::size_t i = 0; i < num_local(); ++i) s += geo_.mass[i] * a[i];
    return s;
}

double Discretization::global_dot(const Field& a, const Field& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < num_local(); ++i) s += a[i] * b[i] / mult_[i];
    return s;
}

std::vector<int> Discretization::face_nodes(int face) const {
    const int n = n1d();
    const int axis = face / 2;
    const int fixed = (face % 2 == 0) ? 0 : n - 1;
    std::vector<int> nodes;
    const int total = static_cast<int>(nodes_per_element());
    for (int k = 0; k < total; ++k) {
        const int idx[3] = {k % n, (k / n) % n, k / (n * n)};
        if (idx[axis] == fixed) nodes.push_back(k);
    }
    return nodes;
}

Field Discretization::boundary_mask(const std::function<bool(FaceKind)>& pred) const {
    Field flag(num_local(), 0.0);
    const std::size_t npe = nodes_per_element();
    for (std::size_t e = 0; e < num_elements(); ++e)
        for (int f = 0; f < mesh_.faces_per_element(); ++f)
            if (pred(mesh_.face(e, f).kind))
                for (int k : face_nodes(f)) flag[e * npe + k] = 1.0;
    gs_.dssum(flag.span());
    Field mask(num_local(), 1.0);
    for (std::size_t i = 0; i < num_local(); ++i)
        if (flag[i] > 0.0) mask[i] = 0.0;
    return mask;
}

void dssum(const Discretization& disc, Field& f) {
    disc.check(f, "dssum");
    disc.gather_scatter().dssum(f.span());
}

Field project_continuous(const Discretization& disc, const Field& local) {
    disc.check(local, "project_continuous");
    const auto& b = disc.geometry().mass;
    const auto& m = disc.assembled_mass();
    Field out(disc.num_local());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = b[i] * local[i];
    dssum(disc, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= m[i];
    return out;
}

Field apply_mass(const Discretization& disc, const Field& field) {
    disc.check(field, "apply_mass");
    const auto& b = disc.geometry().mass;
    Field out(disc.num_local());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = b[i] * field[i];
    dssum(disc, out);
    return out;
}

Field apply_stiffness(const Discretization& disc, const Field& field) {
    disc.check(field, "apply_stiffness");
    const int dim = disc.dim();
    const std::size_t npe = disc.nodes_per_element();
    const auto shape = disc.element_shape();
    const auto& g = disc.geometry().stiffness;
    std::array<std::vector<double>, 3> ref, flux;
    for (int a = 0; a < dim; ++a) {
        ref[a].resize(npe);
        flux[a].resize(npe);
    }
    std::vector<double> tmp(npe);
    Field out(disc.num_local(), 0.0);
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        const double* u = field.data() + e * npe;
        reference_gradient(disc, u, {ref[0].data(), ref[1].data(), dim == 3 ? ref[2].data() : nullptr});
        for (std::size_t k = 0; k < npe; ++k) {
            const double* gk = g.data() + (e * npe + k) * 9;
            for (int a = 0; a < dim; ++a) {
                double s = 0.0;
                for (int b = 0; b < dim; ++b) s += gk[3 * a + b] * ref[b][k];
                flux[a][k] = s;
            }
        }
        double* o = out.data() + e * npe;
        for (int a = 0; a < dim; ++a) {
            tensor_apply(disc.diff_transpose(), a, shape, flux[a].data(), tmp.data());
            for (std::size_t k = 0; k < npe; ++k) o[k] += tmp[k];
        }
    }
    dssum(disc, out);
    return out;
}

Field stiffness_diagonal(const Discretization& disc) {
    const int dim = disc.dim();
    const int n = disc.n1d();
    const std::size_t npe = disc.nodes_per_element();
    const auto& g = disc.geometry().stiffness;
    const Matrix& d = disc.diff();
    Field out(disc.num_local(), 0.0);
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        for (std::size_t k = 0; k < npe; ++k) {
            const int idx[3] = {static_cast<int>(k) % n, (static_cast<int>(k) / n) % n,
                                static_cast<int>(k) / (n * n)};
            const int stride[3] = {1, n, n * n};
            double s = 0.0;
            // same-direction terms: sum over the line of quadrature points through node k
            for (int a = 0; a < dim; ++a) {
                for (int q = 0; q < n; ++q) {
                    const std::size_t node = k + static_cast<std::size_t>((q - idx[a]) * stride[a]);
                    const double dq = d(q, idx[a]);
                    s += dq * dq * g[(e * npe + node) * 9 + 4 * a];
                }
            }
            // cross terms only meet at the node itself
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b)
                    if (a != b) s += d(idx[a], idx[a]) * d(idx[b], idx[b]) * g[(e * npe + k) * 9 + 3 * a + b];
            out[e * npe + k] = s;
        }
    }
    dssum(disc, out);
    return out;
}

VectorField apply_gradient(const Discretization& disc, const Field& field) {
    disc.check(field, "apply_gradient");
    const int dim = disc.dim();
    const std::size_t npe = disc.nodes_per_element();
    const auto& geo = disc.geometry();
    std::array<std::vector<double>, 3> ref;
    for (int a = 0; a < dim; ++a) ref[a].resize(npe);
    VectorField grad(dim, Field(disc.num_local()));
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        reference_gradient(disc, field.data() + e * npe,
                           {ref[0].data(), ref[1].data(), dim == 3 ? ref[2].data() : nullptr});
        for (std::size_t k = 0; k < npe; ++k) {
            const std::size_t node = e * npe + k;
            for (int b = 0; b < dim; ++b) {
                double s = 0.0;
                for (int a = 0; a < dim; ++a) s += geo.metric_at(node, a, b) * ref[a][k];
                grad[b][node] = s;
            }
        }
    }
    for (auto& gcomp : grad) gcomp = project_continuous(disc, gcomp);
    return grad;
}

Field apply_divergence(const Discretization& disc, const VectorField& fields) {
    const int dim = disc.dim();
    if (static_cast<int>(fields.size()) != dim)
        throw DimensionError("apply_divergence: expected " + std::to_string(dim) + " components");
    for (const auto& f : fields) disc.check(f, "apply_divergence");
    const std::size_t npe = disc.nodes_per_element();
    const auto& geo = disc.geometry();
    std::array<std::vector<double>, 3> ref;
    for (int a = 0; a < dim; ++a) ref[a].resize(npe);
    Field div(disc.num_local(), 0.0);
    for (int b = 0; b < dim; ++b) {
        for (std::size_t e = 0; e < disc.num_elements(); ++e) {
            reference_gradient(disc, fields[b].data() + e * npe,
                               {ref[0].data(), ref[1].data(), dim == 3 ? ref[2].data() : nullptr});
            for (std::size_t k = 0; k < npe; ++k) {
                const std::size_t node = e * npe + k;
                double s = 0.0;
                for (int a = 0; a < dim; ++a) s += geo.metric_at(node, a, b) * ref[a][k];
                div[node] += s;
            }
        }
    }
    return project_continuous(disc, div);
}

Field apply_weak_divergence(const Discretization& disc, const VectorField& fields) {
    const int dim = disc.dim();
    if (static_cast<int>(fields.size()) != dim)
        throw DimensionError("apply_weak_divergence: expected " + std::to_string(dim) + " components");
    for (const auto& f : fields) disc.check(f, "apply_weak_divergence");
    const std::size_t npe = disc.nodes_per_element();
    const auto shape = disc.element_shape();
    const auto& geo = disc.geometry();
    std::vector<double> w(npe), tmp(npe);
    Field out(disc.num_local(), 0.0);
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        double* o = out.data() + e * npe;
        for (int a = 0; a < dim; ++a) {
            for (std::size_t k = 0; k < npe; ++k) {
                const std::size_t node = e * npe + k;
                double s = 0.0;
                for (int b = 0; b < dim; ++b) s += geo.metric_at(node, a, b) * fields[b][node];
                w[k] = geo.mass[node] * s;
            }
            tensor_apply(disc.diff_transpose(), a, shape, w.data(), tmp.data());
            for (std::size_t k = 0; k < npe; ++k) o[k] += tmp[k];
        }
    }
    dssum(disc, out);
    return out;
}

Field apply_convection(const Discretization& disc, const VectorField& velocity, const Field& field,
                       bool dealias) {
    const int dim = disc.dim();
    if (static_cast<int>(velocity.size()) != dim)
        throw DimensionError("apply_convection: expected " + std::to_string(dim) + " velocity components");
    for (const auto& f : velocity) disc.check(f, "apply_convection");
    disc.check(field, "apply_convection");

    const std::size_t npe = disc.nodes_per_element();
    const auto& geo = disc.geometry();
    std::array<std::vector<double>, 3> ref;
    for (int a = 0; a < dim; ++a) ref[a].resize(npe);

    if (!dealias) {
        Field local(disc.num_local());
        for (std::size_t e = 0; e < disc.num_elements(); ++e) {
            reference_gradient(disc, field.data() + e * npe,
                               {ref[0].data(), ref[1].data(), dim == 3 ? ref[2].data() : nullptr});
            for (std::size_t k = 0; k < npe; ++k) {
                const std::size_t node = e * npe + k;
                double s = 0.0;
                for (int b = 0; b < dim; ++b) {
                    double gb = 0.0;
                    for (int a = 0; a < dim; ++a) gb += geo.metric_at(node, a, b) * ref[a][k];
                    s += velocity[b][node] * gb;
                }
                local[node] = s;
            }
        }
        return project_continuous(disc, local);
    }

    const auto& fgeo = disc.fine_geometry();
    const std::size_t nfe = static_cast<std::size_t>(fgeo.nodes_per_element);
    std::array<std::vector<double>, 3> ref_f, vel_f;
    for (int a = 0; a < dim; ++a) {
        ref_f[a].resize(nfe);
        vel_f[a].resize(nfe);
    }
    std::vector<double> prod(nfe), back(npe), wa, wb;
    Field out(disc.num_local(), 0.0);
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        reference_gradient(disc, field.data() + e * npe,
                           {ref[0].data(), ref[1].data(), dim == 3 ? ref[2].data() : nullptr});
        for (int a = 0; a < dim; ++a) {
            tensor_apply_all(disc.to_fine(), dim, ref[a].data(), ref_f[a].data(), wa, wb);
            tensor_apply_all(disc.to_fine(), dim, velocity[a].data() + e * npe, vel_f[a].data(), wa, wb);
        }
        for (std::size_t q = 0; q < nfe; ++q) {
            const std::size_t fnode = e * nfe + q;
            double s = 0.0;
            for (int b = 0; b < dim; ++b) {
                double gb = 0.0;
                for (int a = 0; a < dim; ++a) gb += fgeo.metric_at(fnode, a, b) * ref_f[a][q];
                s += vel_f[b][q] * gb;
            }
            prod[q] = fgeo.mass[fnode] * s;
        }
        tensor_apply_all(disc.from_fine(), dim, prod.data(), back.data(), wa, wb);
        std::copy(back.begin(), back.end(), out.data() + e * npe);
    }
    dssum(disc, out);
    const auto& m = disc.assembled_mass();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= m[i];
    return out;
}

Field apply_filter(const Discretization& disc, const Field& field, int cutoff, double strength) {
    disc.check(field, "apply_filter");
    const Matrix f = modal_filter_matrix(disc.basis(), cutoff, strength);
    const std::size_t npe = disc.nodes_per_element();
    std::vector<double> wa, wb;
    Field local(disc.num_local());
    for (std::size_t e = 0; e < disc.num_elements(); ++e)
        tensor_apply_all(f, disc.dim(), field.data() + e * npe, local.data() + e * npe, wa, wb);
    return project_continuous(disc, local);
}

}  // namespace sem
