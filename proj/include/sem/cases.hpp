#pragma once

#include <vector>

#include "sem/config.hpp"
#include "sem/solver.hpp"

namespace sem {

/// Boundary data, initial state and (where known) exact solution of a case.
struct CaseSetup {
    BoxSpec box;
    ProblemData data;
    bool solve_flow = true;
    VectorFunction initial_velocity;
    ScalarFunction initial_temperature;
    VectorFunction exact_velocity;     ///< empty when there is no analytic reference
    ScalarFunction exact_temperature;  ///< empty when there is no analytic reference
};

[[nodiscard]] CaseSetup make_case(const RunConfig& config);

/// True for the cases usable in convergence studies.
[[nodiscard]] bool has_analytic_reference(CaseKind kind);

/// Point evaluation of fields through Lagrange interpolation inside the element
/// containing each point (axis-aligned box meshes).
class ProbeSet {
public:
    ProbeSet(const Discretization& disc, std::vector<Point> points);

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] const Point& point(std::size_t i) const { return points_[i]; }
    [[nodiscard]] double evaluate(std::size_t probe, const Field& field) const;

private:
    const Discretization* disc_;
    std::vector<Point> points_;
    std::vector<std::size_t> element_;
    std::vector<std::array<std::vector<double>, 3>> weights_;
};

}  // namespace sem
