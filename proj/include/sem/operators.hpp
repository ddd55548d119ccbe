#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "sem/basis.hpp"
#include "sem/field.hpp"
#include "sem/mesh.hpp"

namespace sem {

/// Applies a 1-D matrix (rows x cols) along one axis of a tensor-ordered block.
/// `shape` gives the input extents (x fastest); shape[axis] must equal cols.
void tensor_apply(const Matrix& a, int axis, const std::array<int, 3>& shape,
                  const double* in, double* out);

/// Mesh, basis and all derived data needed by the matrix-free operators.
/// Immutable after construction.
class Discretization {
public:
    explicit Discretization(Mesh mesh);

    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const Basis1D& basis() const noexcept { return basis_; }
    [[nodiscard]] const GeometricFactors& geometry() const noexcept { return geo_; }
    [[nodiscard]] const GatherScatter& gather_scatter() const noexcept { return gs_; }

    [[nodiscard]] int dim() const noexcept { return mesh_.dim(); }
    [[nodiscard]] int order() const noexcept { return mesh_.order(); }
    [[nodiscard]] int n1d() const noexcept { return basis_.size(); }
    [[nodiscard]] std::size_t nodes_per_element() const noexcept {
        return static_cast<std::size_t>(geo_.nodes_per_element);
    }
    [[nodiscard]] std::size_t num_elements() const noexcept { return mesh_.num_elements(); }
    [[nodiscard]] std::size_t num_local() const noexcept { return geo_.mass.size(); }
    [[nodiscard]] std::array<int, 3> element_shape() const noexcept;

    /// Diagonal of the assembled mass matrix, stored at every local copy.
    [[nodiscard]] const std::vector<double>& assembled_mass() const noexcept { return mass_assembled_; }
    [[nodiscard]] const std::vector<double>& multiplicity() const noexcept { return mult_; }

    [[nodiscard]] Field zeros() const { return Field(num_local(), 0.0); }
    [[nodiscard]] Field interpolate(const std::function<double(const Point&)>& f) const;

    /// Mass-weighted inner product of two continuous fields.
    [[nodiscard]] double inner(const Field& a, const Field& b) const;
    [[nodiscard]] double integrate(const Field& a) const;
    /// Inner product of an assembled (dual) vector with a continuous field, counting
    /// each global node once.
    [[nodiscard]] double global_dot(const Field& a, const Field& b) const;

    /// 1 everywhere except on nodes touching a face whose kind satisfies `pred`.
    [[nodiscard]] Field boundary_mask(const std::function<bool(FaceKind)>& pred) const;
    /// Local node offsets (within an element) on face f = 2*axis + side.
    [[nodiscard]] std::vector<int> face_nodes(int face) const;

    /// Over-integration grid: ceil(3(N+1)/2) Gauss points per direction.
    [[nodiscard]] int fine_n1d() const noexcept { return static_cast<int>(fine_rule_.nodes.size()); }
    [[nodiscard]] const Matrix& to_fine() const noexcept { return to_fine_; }
    [[nodiscard]] const Matrix& from_fine() const noexcept { return from_fine_; }
    [[nodiscard]] const GeometricFactors& fine_geometry() const noexcept { return fine_geo_; }

    [[nodiscard]] const Matrix& diff() const noexcept { return basis_.diff_matrix(); }
    [[nodiscard]] const Matrix& diff_transpose() const noexcept { return diff_t_; }

    void check(const Field& f, const char* what) const;

private:
    Mesh mesh_;
    Basis1D basis_;
    GeometricFactors geo_;
    GatherScatter gs_;
    std::vector<double> mass_assembled_;
    std::vector<double> mult_;
    Matrix diff_t_;
    GaussRule fine_rule_;
    Matrix to_fine_;
    Matrix from_fine_;
    GeometricFactors fine_geo_;
};

/// Sums element contributions at coincident nodes.
void dssum(const Discretization& disc, Field& f);

/// Mass-weighted average of element-local values onto continuous fields.
[[nodiscard]] Field project_continuous(const Discretization& disc, const Field& local);

/// Assembled diagonal mass matrix applied to a field.
[[nodiscard]] Field apply_mass(const Discretization& disc, const Field& field);

/// Assembled weak Laplacian: (A u)_i = sum over elements of the GLL quadrature of grad u . grad h_i.
[[nodiscard]] Field apply_stiffness(const Discretization& disc, const Field& field);

/// Diagonal of the assembled stiffness matrix.
[[nodiscard]] Field stiffness_diagonal(const Discretization& disc);

/// Collocation gradient, mass-averaged at shared nodes.
[[nodiscard]] VectorField apply_gradient(const Discretization& disc, const Field& field);

/// Collocation divergence, mass-averaged at shared nodes.
[[nodiscard]] Field apply_divergence(const Discretization& disc, const VectorField& fields);

/// Assembled vector with entries integral(grad h_i . F).
[[nodiscard]] Field apply_weak_divergence(const Discretization& disc, const VectorField& fields);

/// (u . grad) field in convective form; with `dealias` the product is integrated on
/// the Gauss over-integration grid and projected back through the mass matrix.
[[nodiscard]] Field apply_convection(const Discretization& disc, const VectorField& velocity,
                                     const Field& field, bool dealias);

/// Explicit modal filter applied direction by direction, then mass-averaged.
[[nodiscard]] Field apply_filter(const Discretization& disc, const Field& field, int cutoff,
                                 double strength);

}  // namespace sem
