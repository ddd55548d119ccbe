#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sem/basis.hpp"

namespace sem {

using Point = std::array<double, 3>;

enum class FaceKind { Interior, Dirichlet, Neumann, Periodic };

struct FaceTag {
    FaceKind kind = FaceKind::Dirichlet;
    std::size_t partner_element = 0;  // valid for Interior and Periodic faces
    int partner_face = -1;
};

/// Tensor-product box layout. Faces are numbered 2*axis + side (side 0 = low).
struct BoxSpec {
    int dim = 2;
    std::array<int, 3> counts{1, 1, 1};
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
    std::array<bool, 3> periodic{false, false, false};
    /// Ratio between consecutive element widths along each axis, starting at `lo`.
    std::array<double, 3> grading{1.0, 1.0, 1.0};
    /// Kind of the non-periodic boundary at [axis][side].
    std::array<std::array<FaceKind, 2>, 3> boundary{{{FaceKind::Dirichlet, FaceKind::Dirichlet},
                                                     {FaceKind::Dirichlet, FaceKind::Dirichlet},
                                                     {FaceKind::Dirichlet, FaceKind::Dirichlet}}};
};

/// Conforming quad/hex mesh with multilinear element maps and one polynomial order.
class Mesh {
public:
    [[nodiscard]] int dim() const noexcept { return spec_.dim; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] const BoxSpec& box() const noexcept { return spec_; }
    [[nodiscard]] std::size_t num_elements() const noexcept { return faces_.size() / faces_per_element(); }
    [[nodiscard]] int corners_per_element() const noexcept { return 1 << spec_.dim; }
    [[nodiscard]] int faces_per_element() const noexcept { return 2 * spec_.dim; }

    /// Corners are ordered lexicographically, x fastest.
    [[nodiscard]] const Point& corner(std::size_t element, int c) const {
        return corners_[element * corners_per_element() + c];
    }
    [[nodiscard]] const FaceTag& face(std::size_t element, int f) const {
        return faces_[element * faces_per_element() + f];
    }
    /// Element boundaries along an axis (counts[axis] + 1 ascending values).
    [[nodiscard]] const std::vector<double>& breakpoints(int axis) const { return breaks_[axis]; }
    [[nodiscard]] std::array<int, 3> element_position(std::size_t element) const;
    [[nodiscard]] double volume() const;

private:
    friend Mesh build_box_mesh(const BoxSpec& spec, int order);
    friend Mesh transform_corners(const Mesh& mesh, const std::function<Point(const Point&)>& map);

    BoxSpec spec_;
    int order_ = 1;
    std::array<std::vector<double>, 3> breaks_;
    std::vector<Point> corners_;
    std::vector<FaceTag> faces_;
};

[[nodiscard]] Mesh build_box_mesh(const BoxSpec& spec, int order);

/// Copy of `mesh` with every element corner moved by `map`. Connectivity and face
/// tags are kept, so the map must leave periodic faces congruent.
[[nodiscard]] Mesh transform_corners(const Mesh& mesh, const std::function<Point(const Point&)>& map);

/// Per-node geometry of every element, nodes ordered x fastest.
struct GeometricFactors {
    int dim = 2;
    int nodes_per_element = 0;
    std::vector<Point> coordinates;
    std::vector<double> jacobian;  ///< det(dx/dxi)
    /// d xi_a / d x_b stored at [node * 9 + 3a + b].
    std::vector<double> metric;
    /// Tensor quadrature weight times jacobian: the diagonal local mass matrix.
    std::vector<double> mass;
    /// mass * sum_c (d xi_a/d x_c)(d xi_b/d x_c) at [node * 9 + 3a + b].
    std::vector<double> stiffness;

    [[nodiscard]] double metric_at(std::size_t node, int a, int b) const { return metric[node * 9 + 3 * a + b]; }
};

/// Evaluates the element map at reference points; throws InvertedElementError.
[[nodiscard]] GeometricFactors compute_geometric_factors(const Mesh& mesh, const Basis1D& basis);

/// Geometry of one element at arbitrary tensor reference points (used for over-integration).
[[nodiscard]] GeometricFactors compute_geometric_factors(const Mesh& mesh,
                                                         std::span<const double> points_1d,
                                                         std::span<const double> weights_1d);

/// Maps reference coordinates of an element to physical space.
[[nodiscard]] Point map_to_physical(const Mesh& mesh, std::size_t element, const Point& xi);

/// Direct stiffness summation map between element-local and global node numbering.
class GatherScatter {
public:
    [[nodiscard]] std::size_t num_global() const noexcept { return multiplicity_.size(); }
    [[nodiscard]] std::size_t num_local() const noexcept { return global_ids_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& global_ids() const noexcept { return global_ids_; }
    [[nodiscard]] const std::vector<int>& multiplicity() const noexcept { return multiplicity_; }

    /// Sum of local copies per global node.
    [[nodiscard]] std::vector<double> gather_sum(std::span<const double> local) const;
    /// Average of local copies per global node.
    [[nodiscard]] std::vector<double> gather(std::span<const double> local) const;
    [[nodiscard]] std::vector<double> scatter(std::span<const double> global) const;
    /// In-place summation over coincident copies (fixed reduction order).
    void dssum(std::span<double> local) const;

private:
    friend GatherScatter build_gather_scatter(const Mesh& mesh, const Basis1D& basis);

    std::vector<std::size_t> global_ids_;
    std::vector<int> multiplicity_;
};

inline constexpr double node_tolerance = 1e-8;

[[nodiscard]] GatherScatter build_gather_scatter(const Mesh& mesh, const Basis1D& basis);

/// Near-wall resolution for one wall-tagged side of the box.
struct WallResolution {
    int axis = 0;
    int side = 0;
    double first_point_yplus = 0.0;
    int points_below_10 = 0;
    bool first_point_ok = false;
    bool count_ok = false;
    [[nodiscard]] bool pass() const noexcept { return first_point_ok && count_ok; }
};

/// y+ of the first off-wall GLL point and the number of off-wall points with y+ < 10,
/// for every Dirichlet side of the box. Passing requires y+ < 1 and at least five points.
[[nodiscard]] std::vector<WallResolution> yplus_spacing_report(const Mesh& mesh, const Basis1D& basis,
                                                               double friction_velocity,
                                                               double viscosity);

}  // namespace sem
