#pragma once

#include <array>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "sem/field.hpp"
#include "sem/operators.hpp"

namespace sem {

struct SolveStats {
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    double rhs_norm = 0.0;
    std::vector<double> residual_history;
};

struct SolveResult {
    Field solution;
    SolveStats stats;
};

/// Jacobi-preconditioned conjugate gradient for h1*A + h2*M with Dirichlet masking.
///
/// Right-hand sides are assembled (dual) vectors; `mask` is 1 on free nodes and 0
/// on Dirichlet nodes. Residuals are measured in the inverse-mass norm.
class HelmholtzSolver {
public:
    HelmholtzSolver(const Discretization& disc, Field mask);

    [[nodiscard]] const Discretization& discretization() const noexcept { return *disc_; }
    [[nodiscard]] const Field& mask() const noexcept { return mask_; }

    /// Masked (h1*A + h2*M) u.
    [[nodiscard]] Field apply(double h1, double h2, const Field& u) const;
    /// Converges when the residual drops to tol times the rhs norm; throws
    /// ConvergenceError after max_iterations.
    [[nodiscard]] SolveResult solve(double h1, double h2, const Field& rhs, const Field& guess,
                                    double tol, int max_iterations = 5000) const;
    [[nodiscard]] double residual_norm(const Field& r) const;

private:
    const Discretization* disc_;
    Field mask_;
    Field stiffness_diag_;
};

/// One-shot convenience wrapper around HelmholtzSolver.
[[nodiscard]] SolveResult helmholtz_solve(const Discretization& disc, double h1, double h2,
                                          const Field& rhs, const Field& guess, const Field& mask,
                                          double tol, int max_iterations = 5000);

/// Poisson solve A p = b with a warm start from previous solutions.
///
/// The span of the L most recent solutions is kept mass-orthonormal (modified Gram-Schmidt with one
/// re-orthogonalization pass); the initial guess is the energy-optimal combination
/// of them. When no pressure node is pinned, the constant null space is handled by
/// removing the mass-weighted mean of the data and of the solution.
class PressureSolver {
public:
    PressureSolver(const Discretization& disc, Field mask, int depth = 8, bool projection = true);

    [[nodiscard]] SolveResult solve(Field rhs, double tol, int max_iterations = 5000);

    [[nodiscard]] bool singular() const noexcept { return singular_; }
    [[nodiscard]] const std::vector<Field>& projection_basis() const noexcept { return basis_; }
    [[nodiscard]] const HelmholtzSolver& poisson() const noexcept { return poisson_; }
    void set_projection(bool enabled) { projection_ = enabled; }
    void clear() {
        basis_.clear();
        applied_.clear();
        raw_.clear();
        raw_applied_.clear();
    }

    /// Removes the constant-mode component so that sum(b) = 0.
    void make_compatible(Field& rhs) const;
    [[nodiscard]] Field projected_guess(const Field& rhs) const;

private:
    void update_basis(const Field& solution);

    const Discretization* disc_;
    HelmholtzSolver poisson_;
    int depth_;
    bool projection_;
    bool singular_;
    std::vector<Field> basis_;
    std::vector<Field> applied_;  // A times each basis vector
    std::deque<Field> raw_;       // most recent solutions, oldest first
    std::deque<Field> raw_applied_;
};

using VectorFunction = std::function<std::array<double, 3>(const Point&, double)>;
using ScalarFunction = std::function<double(const Point&, double)>;

/// Constant material properties of the momentum and energy equations.
struct FlowParameters {
    double density = 1.0;
    double viscosity = 0.01;
    double heat_capacity = 1.0;
    double conductivity = 0.01;

    [[nodiscard]] double kinematic_viscosity() const { return viscosity / density; }
    [[nodiscard]] double diffusivity() const { return conductivity / (density * heat_capacity); }
};

enum class CflAction { Warn, Abort };

struct SolverSettings {
    double dt = 1e-3;
    bool temperature = false;
    /// When false the velocity is held at its initial value (passive transport runs).
    bool solve_flow = true;
    bool filter = false;
    int filter_cutoff = 2;
    double filter_strength = 0.05;
    bool dealias = true;
    double velocity_tol = 1e-9;
    double pressure_tol = 1e-7;
    double temperature_tol = 1e-9;
    bool projection = true;
    int projection_depth = 8;
    int max_iterations = 5000;
    double cfl_limit = 1.0;
    CflAction cfl_action = CflAction::Warn;
};

/// Boundary data, forcing and per-side temperature boundary kinds.
struct ProblemData {
    VectorFunction velocity_boundary;  ///< values on Dirichlet faces; zero when empty
    ScalarFunction temperature_boundary;
    VectorFunction body_force;  ///< per unit mass; none when empty
    /// Overrides the mesh boundary kinds for temperature at [axis][side].
    std::optional<std::array<std::array<FaceKind, 2>, 3>> temperature_kinds;
};

/// Time-stepping state. Pressure is kinematic (p / density).
struct SolverState {
    double time = 0.0;
    long step_index = 0;
    VectorField velocity;
    Field pressure;
    std::optional<Field> temperature;
    /// Previous levels, newest first; depth min(step_index, 3) unless seeded.
    std::deque<VectorField> velocity_history;
    std::deque<VectorField> convection_history;
    std::deque<Field> temperature_history;
    std::deque<Field> temperature_convection_history;
};

enum class SolveKind { Velocity, Pressure, Temperature };

struct SolveRecord {
    SolveKind kind;
    int component = 0;
    SolveStats stats;
};

struct StepReport {
    int order = 1;
    std::vector<SolveRecord> solves;
    double cfl = 0.0;
    bool cfl_exceeded = false;
    double divergence = 0.0;  ///< max-norm of the velocity divergence after the step
};

struct TimeCoefficients {
    double bdf0;
    std::array<double, 3> bdf;  ///< weights of u^n, u^(n-1), u^(n-2)
    std::array<double, 3> ext;
};
[[nodiscard]] TimeCoefficients time_coefficients(int order);

/// Max over nodes of sum_d |u_d| dt / dx_d with dx_d the local GLL spacing.
[[nodiscard]] double estimate_cfl(const Discretization& disc, const VectorField& velocity, double dt);

/// Incompressible Navier-Stokes stepper: explicit extrapolated convection, one
/// pressure Poisson solve and one Helmholtz solve per velocity component per step,
/// plus an optional passive temperature solve.
class FlowSolver {
public:
    FlowSolver(const Discretization& disc, FlowParameters params, SolverSettings settings,
               ProblemData data = {});

    /// Sets the initial condition at time t0; clears history and projection basis.
    void initialize(VectorField velocity, std::optional<Field> temperature = std::nullopt,
                    double t0 = 0.0);
    /// Fills two previous levels from exact data so the first step runs at full order.
    void seed_history(const std::function<VectorField(double)>& velocity_at,
                      const std::function<Field(double)>& temperature_at = {});

    StepReport step();

    /// Temperature at the next level from the current state (no state change).
    [[nodiscard]] Field advance_temperature() const;

    [[nodiscard]] const SolverState& state() const noexcept { return state_; }
    [[nodiscard]] const Discretization& discretization() const noexcept { return *disc_; }
    [[nodiscard]] const SolverSettings& settings() const noexcept { return settings_; }
    [[nodiscard]] const FlowParameters& parameters() const noexcept { return params_; }
    [[nodiscard]] const PressureSolver& pressure_solver() const noexcept { return pressure_; }
    [[nodiscard]] double kinetic_energy() const;
    void set_projection(bool enabled) { pressure_.set_projection(enabled); }

private:
    [[nodiscard]] VectorField explicit_terms(const VectorField& u, double t) const;
    [[nodiscard]] Field temperature_terms(const VectorField& u, const Field& temp) const;
    [[nodiscard]] Field pressure_boundary_flux(const VectorField& u_ext, double t_new, double bdf0) const;
    [[nodiscard]] Field advance_temperature(int order, const Field& nt_current) const;
    [[nodiscard]] int order_for_temperature() const;
    [[nodiscard]] Field dirichlet_lift(const Field& mask, const std::function<double(const Point&)>& value) const;

    const Discretization* disc_;
    FlowParameters params_;
    SolverSettings settings_;
    ProblemData data_;
    Field velocity_mask_;
    Field temperature_mask_;
    HelmholtzSolver velocity_solver_;
    HelmholtzSolver temperature_solver_;
    PressureSolver pressure_;
    SolverState state_;
    mutable SolveStats last_temperature_stats_;
};

}  // namespace sem
