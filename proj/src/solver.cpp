#include "sem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "sem/error.hpp"

namespace sem {

namespace {

Field masked(Field f, const Field& mask) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= mask[i];
    return f;
}

double dot_plain(const Discretization& disc, const Field& a, const Field& b) {
    return disc.global_dot(a, b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Helmholtz

HelmholtzSolver::HelmholtzSolver(const Discretization& disc, Field mask)
    : disc_(&disc), mask_(std::move(mask)), stiffness_diag_(stiffness_diagonal(disc)) {
    disc.check(mask_, "HelmholtzSolver mask");
}

Field HelmholtzSolver::apply(double h1, double h2, const Field& u) const {
    Field out(u.size(), 0.0);
    if (h1 != 0.0) out.axpy(h1, apply_stiffness(*disc_, u));
    if (h2 != 0.0) {
        const auto& m = disc_->assembled_mass();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h2 * m[i] * u[i];
    }
    return masked(std::move(out), mask_);
}

double HelmholtzSolver::residual_norm(const Field& r) const {
    const auto& m = disc_->assembled_mass();
    Field scaled(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) scaled[i] = r[i] / m[i];
    return std::sqrt(std::max(0.0, dot_plain(*disc_, r, scaled)));
}

SolveResult HelmholtzSolver::solve(double h1, double h2, const Field& rhs, const Field& guess,
                                   double tol, int max_iterations) const {
    disc_->check(rhs, "helmholtz rhs");
    disc_->check(guess, "helmholtz guess");
    if (h1 < 0.0 || h2 < 0.0 || (h1 == 0.0 && h2 == 0.0))
        throw ParameterError("helmholtz coefficients must satisfy h1 >= 0, h2 >= 0, not both zero");
    if (!(tol > 0.0)) throw ParameterError("solver tolerance must be positive");

    const std::size_t n = rhs.size();
    const auto& m = disc_->assembled_mass();
    Field inv_diag(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = h1 * stiffness_diag_[i] + h2 * m[i];
        inv_diag[i] = (mask_[i] != 0.0 && d > 0.0) ? 1.0 / d : 0.0;
    }

    SolveResult result;
    Field b = masked(rhs, mask_);
    result.stats.rhs_norm = residual_norm(b);
    if (result.stats.rhs_norm == 0.0) {
        result.solution = disc_->zeros();
        return result;
    }

    Field x = masked(guess, mask_);
    Field r = b - apply(h1, h2, x);
    double rnorm = residual_norm(r);
    result.stats.initial_residual = rnorm;
    result.stats.residual_history.push_back(rnorm);
    const double target = tol * result.stats.rhs_norm;

    Field z(n), p(n, 0.0);
    double rho_old = 1.0;
    int it = 0;
    while (rnorm > target) {
        if (it >= max_iterations)
            throw ConvergenceError("conjugate gradient", it, rnorm / result.stats.rhs_norm,
                                   result.stats.residual_history);
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag[i];
        const double rho = dot_plain(*disc_, r, z);
        if (it == 0) {
            p = z;
        } else {
            const double beta = rho / rho_old;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        const Field w = apply(h1, h2, p);
        const double pw = dot_plain(*disc_, p, w);
        if (!(pw > 0.0)) break;  // exact solution reached in floating point
        const double alpha = rho / pw;
        x.axpy(alpha, p);
        r.axpy(-alpha, w);
        rho_old = rho;
        ++it;
        rnorm = residual_norm(r);
        result.stats.residual_history.push_back(rnorm);
    }
    result.stats.iterations = it;
    result.stats.final_residual = rnorm;
    result.solution = std::move(x);
    return result;
}

SolveResult helmholtz_solve(const Discretization& disc, double h1, double h2, const Field& rhs,
                            const Field& guess, const Field& mask, double tol, int max_iterations) {
    return HelmholtzSolver(disc, mask).solve(h1, h2, rhs, guess, tol, max_iterations);
}

// ---------------------------------------------------------------------------
// Pressure

PressureSolver::PressureSolver(const Discretization& disc, Field mask, int depth, bool projection)
    : disc_(&disc), poisson_(disc, std::move(mask)), depth_(depth), projection_(projection) {
    if (depth < 0) throw ParameterError("projection depth must be non-negative");
    const Field& mk = poisson_.mask();
    singular_ = std::all_of(mk.values().begin(), mk.values().end(), [](double v) { return v != 0.0; });
}

void PressureSolver::make_compatible(Field& rhs) const {
    if (!singular_) return;
    const Field ones(rhs.size(), 1.0);
    const double total = disc_->global_dot(rhs, ones);
    const double volume = disc_->mesh().volume();
    const auto& m = disc_->assembled_mass();
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= m[i] * total / volume;
}

Field PressureSolver::projected_guess(const Field& rhs) const {
    Field guess = disc_->zeros();
    const int l = static_cast<int>(basis_.size());
    if (l == 0) return guess;
    Eigen::MatrixXd g(l, l);
    Eigen::VectorXd d(l);
    for (int i = 0; i < l; ++i) {
        d(i) = disc_->global_dot(rhs, basis_[i]);
        for (int j = 0; j <= i; ++j) {
            g(i, j) = disc_->global_dot(applied_[i], basis_[j]);
            g(j, i) = g(i, j);
        }
    }
    const Eigen::VectorXd c = g.ldlt().solve(d);
    for (int i = 0; i < l; ++i) guess.axpy(c(i), basis_[i]);
    return guess;
}

void PressureSolver::update_basis(const Field& solution) {
    if (depth_ == 0) return;
    if (disc_->inner(solution, solution) == 0.0) return;
    raw_.push_back(solution);
    raw_applied_.push_back(poisson_.apply(1.0, 0.0, solution));
    while (static_cast<int>(raw_.size()) > depth_) {
        raw_.pop_front();
        raw_applied_.pop_front();
    }
    // Orthonormalize the span of the retained solutions, newest first, carrying
    // the same combinations along for the stored A-products.
    basis_.clear();
    applied_.clear();
    for (std::size_t k = raw_.size(); k-- > 0;) {
        Field v = raw_[k];
        Field av = raw_applied_[k];
        const double norm0 = std::sqrt(disc_->inner(v, v));
        double norm = norm0;
        for (int pass = 0; pass < 2; ++pass) {
            const double before = norm;
            for (std::size_t i = 0; i < basis_.size(); ++i) {
                const double h = disc_->inner(basis_[i], v);
                v.axpy(-h, basis_[i]);
                av.axpy(-h, applied_[i]);
            }
            norm = std::sqrt(disc_->inner(v, v));
            if (norm >= before / std::sqrt(2.0)) break;
        }
        if (norm <= 1e-10 * norm0) continue;  // numerically in the span already
        v *= 1.0 / norm;
        av *= 1.0 / norm;
        basis_.push_back(std::move(v));
        applied_.push_back(std::move(av));
    }
}

SolveResult PressureSolver::solve(Field rhs, double tol, int max_iterations) {
    disc_->check(rhs, "pressure rhs");
    const double original = poisson_.residual_norm(rhs);
    make_compatible(rhs);
    rhs = masked(std::move(rhs), poisson_.mask());
    // data that was entirely in the null space leaves only roundoff behind
    if (poisson_.residual_norm(rhs) <= 64.0 * std::numeric_limits<double>::epsilon() * original)
        rhs = disc_->zeros();
    const Field guess = projection_ ? projected_guess(rhs) : disc_->zeros();
    SolveResult result = poisson_.solve(1.0, 0.0, rhs, guess, tol, max_iterations);
    if (singular_) {
        const double mean = disc_->integrate(result.solution) / disc_->mesh().volume();
        for (std::size_t i = 0; i < result.solution.size(); ++i) result.solution[i] -= mean;
    }
    if (projection_) update_basis(result.solution);
    return result;
}

// ---------------------------------------------------------------------------
// Time stepping

TimeCoefficients time_coefficients(int order) {
    switch (order) {
    case 1: return {1.0, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    case 2: return {1.5, {2.0, -0.5, 0.0}, {2.0, -1.0, 0.0}};
    case 3: return {11.0 / 6.0, {3.0, -1.5, 1.0 / 3.0}, {3.0, -3.0, 1.0}};
    default: throw ParameterError("time integration order must be 1, 2 or 3");
    }
}

double estimate_cfl(const Discretization& disc, const VectorField& velocity, double dt) {
    const int dim = disc.dim();
    if (static_cast<int>(velocity.size()) != dim) throw DimensionError("velocity component count");
    const int n = disc.n1d();
    const auto& xi = disc.basis().nodes();
    std::vector<double> spacing(n);
    for (int i = 0; i < n; ++i) {
        double s = std::numeric_limits<double>::infinity();
        if (i > 0) s = std::min(s, xi[i] - xi[i - 1]);
        if (i + 1 < n) s = std::min(s, xi[i + 1] - xi[i]);
        spacing[i] = s;
    }
    const auto& geo = disc.geometry();
    const std::size_t npe = disc.nodes_per_element();
    double cfl = 0.0;
    for (std::size_t l = 0; l < disc.num_local(); ++l) {
        const int k = static_cast<int>(l % npe);
        const int idx[3] = {k % n, (k / n) % n, k / (n * n)};
        double s = 0.0;
        for (int a = 0; a < dim; ++a) {
            double contravariant = 0.0;
            for (int b = 0; b < dim; ++b) contravariant += velocity[b][l] * geo.metric_at(l, a, b);
            s += std::abs(contravariant) / spacing[idx[a]];
        }
        cfl = std::max(cfl, s * dt);
    }
    return cfl;
}

namespace {

Field side_mask(const Discretization& disc, const std::array<std::array<FaceKind, 2>, 3>& kinds) {
    const Mesh& mesh = disc.mesh();
    Field flag = disc.zeros();
    const std::size_t npe = disc.nodes_per_element();
    for (std::size_t e = 0; e < disc.num_elements(); ++e)
        for (int f = 0; f < mesh.faces_per_element(); ++f) {
            const FaceKind k = mesh.face(e, f).kind;
            if (k != FaceKind::Dirichlet && k != FaceKind::Neumann) continue;
            if (kinds[f / 2][f % 2] != FaceKind::Dirichlet) continue;
            for (int node : disc.face_nodes(f)) flag[e * npe + node] = 1.0;
        }
    dssum(disc, flag);
    Field mask(disc.num_local(), 1.0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (flag[i] > 0.0) mask[i] = 0.0;
    return mask;
}

Field temperature_mask(const Discretization& disc, const ProblemData& data) {
    if (data.temperature_kinds) return side_mask(disc, *data.temperature_kinds);
    return disc.boundary_mask([](FaceKind k) { return k == FaceKind::Dirichlet; });
}

void validate(const FlowParameters& p, const SolverSettings& s) {
    if (!(s.dt > 0.0)) throw ParameterError("time step must be positive");
    if (!(p.density > 0.0)) throw ParameterError("density must be positive");
    if (!(p.viscosity > 0.0)) throw ParameterError("viscosity must be positive");
    if (!(p.heat_capacity > 0.0)) throw ParameterError("heat capacity must be positive");
    if (p.conductivity < 0.0) throw ParameterError("conductivity must be non-negative");
    if (!(s.velocity_tol > 0.0 && s.pressure_tol > 0.0 && s.temperature_tol > 0.0))
        throw ParameterError("solver tolerances must be positive");
    if (s.max_iterations <= 0) throw ParameterError("max_iterations must be positive");
    if (!(s.cfl_limit > 0.0)) throw ParameterError("cfl limit must be positive");
}

/// Curl of the curl of a velocity field, from collocation derivatives.
VectorField curl_curl(const Discretization& disc, const VectorField& u) {
    const int dim = disc.dim();
    std::vector<VectorField> g;
    g.reserve(dim);
    for (int a = 0; a < dim; ++a) g.push_back(apply_gradient(disc, u[a]));
    VectorField out(dim, disc.zeros());
    if (dim == 2) {
        const Field omega = g[1][0] - g[0][1];
        const VectorField go = apply_gradient(disc, omega);
        out[0] = go[1];
        out[1] = -1.0 * go[0];
        return out;
    }
    VectorField omega{g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]};
    std::vector<VectorField> go;
    for (int a = 0; a < 3; ++a) go.push_back(apply_gradient(disc, omega[a]));
    out[0] = go[2][1] - go[1][2];
    out[1] = go[0][2] - go[2][0];
    out[2] = go[1][0] - go[0][1];
    return out;
}

}  // namespace

FlowSolver::FlowSolver(const Discretization& disc, FlowParameters params, SolverSettings settings,
                       ProblemData data)
    : disc_(&disc), params_(params), settings_(settings), data_(std::move(data)),
      velocity_mask_(disc.boundary_mask([](FaceKind k) { return k == FaceKind::Dirichlet; })),
      temperature_mask_(temperature_mask(disc, data_)),
      velocity_solver_(disc, velocity_mask_), temperature_solver_(disc, temperature_mask_),
      pressure_(disc, disc.boundary_mask([](FaceKind k) { return k == FaceKind::Neumann; }),
                settings.projection_depth, settings.projection) {
    validate(params_, settings_);
    state_.velocity.assign(disc.dim(), disc.zeros());
    state_.pressure = disc.zeros();
    if (settings_.temperature) state_.temperature = disc.zeros();
}

void FlowSolver::initialize(VectorField velocity, std::optional<Field> temperature, double t0) {
    if (static_cast<int>(velocity.size()) != disc_->dim())
        throw DimensionError("initial velocity must have one field per dimension");
    for (const Field& f : velocity) disc_->check(f, "initial velocity");
    state_ = SolverState{};
    state_.time = t0;
    state_.velocity = std::move(velocity);
    state_.pressure = disc_->zeros();
    if (settings_.temperature) {
        if (temperature) {
            disc_->check(*temperature, "initial temperature");
            state_.temperature = std::move(*temperature);
        } else {
            state_.temperature = disc_->zeros();
        }
    }
    pressure_.clear();
}

void FlowSolver::seed_history(const std::function<VectorField(double)>& velocity_at,
                              const std::function<Field(double)>& temperature_at) {
    state_.velocity_history.clear();
    state_.convection_history.clear();
    state_.temperature_history.clear();
    state_.temperature_convection_history.clear();
    for (int j = 1; j <= 2; ++j) {
        const double t = state_.time - j * settings_.dt;
        VectorField u = velocity_at(t);
        state_.convection_history.push_back(explicit_terms(u, t));
        if (settings_.temperature && temperature_at) {
            Field temp = temperature_at(t);
            state_.temperature_convection_history.push_back(temperature_terms(u, temp));
            state_.temperature_history.push_back(std::move(temp));
        }
        state_.velocity_history.push_back(std::move(u));
    }
}

VectorField FlowSolver::explicit_terms(const VectorField& u, double /*t*/) const {
    VectorField out;
    out.reserve(u.size());
    for (const Field& comp : u) out.push_back(-1.0 * apply_convection(*disc_, u, comp, settings_.dealias));
    return out;
}

Field FlowSolver::temperature_terms(const VectorField& u, const Field& temp) const {
    return -1.0 * apply_convection(*disc_, u, temp, settings_.dealias);
}

Field FlowSolver::dirichlet_lift(const Field& mask, const std::function<double(const Point&)>& value) const {
    Field lift = disc_->zeros();
    if (!value) return lift;
    const auto& x = disc_->geometry().coordinates;
    for (std::size_t i = 0; i < lift.size(); ++i)
        if (mask[i] == 0.0) lift[i] = value(x[i]);
    return lift;
}

Field FlowSolver::pressure_boundary_flux(const VectorField& u_ext, double t_new, double bdf0) const {
    const Mesh& mesh = disc_->mesh();
    const int dim = disc_->dim();
    const int n = disc_->n1d();
    const std::size_t npe = disc_->nodes_per_element();
    const auto& geo = disc_->geometry();
    const auto& w = disc_->basis().weights();
    const double nu = params_.kinematic_viscosity();
    const double dt = settings_.dt;

    bool any = false;
    for (std::size_t e = 0; e < disc_->num_elements() && !any; ++e)
        for (int f = 0; f < mesh.faces_per_element(); ++f)
            if (mesh.face(e, f).kind == FaceKind::Dirichlet) any = true;
    Field flux = disc_->zeros();
    if (!any) return flux;

    const VectorField cc = curl_curl(*disc_, u_ext);
    for (std::size_t e = 0; e < disc_->num_elements(); ++e)
        for (int f = 0; f < mesh.faces_per_element(); ++f) {
            if (mesh.face(e, f).kind != FaceKind::Dirichlet) continue;
            const int axis = f / 2;
            const double sign = (f % 2 == 0) ? -1.0 : 1.0;
            for (int k : disc_->face_nodes(f)) {
                const std::size_t l = e * npe + static_cast<std::size_t>(k);
                const int idx[3] = {k % n, (k / n) % n, k / (n * n)};
                double tangential = 1.0;
                for (int d = 0; d < dim; ++d)
                    if (d != axis) tangential *= w[idx[d]];
                std::array<double, 3> ub{0.0, 0.0, 0.0};
                if (data_.velocity_boundary) ub = data_.velocity_boundary(geo.coordinates[l], t_new);
                double s = 0.0;
                for (int b = 0; b < dim; ++b) {
                    const double area = sign * geo.jacobian[l] * geo.metric_at(l, axis, b) * tangential;
                    s += area * (bdf0 / dt * ub[b] + nu * cc[b][l]);
                }
                flux[l] -= s;
            }
        }
    dssum(*disc_, flux);
    return flux;
}

Field FlowSolver::advance_temperature() const {
    if (!settings_.temperature || !state_.temperature)
        throw ParameterError("temperature transport is not enabled");
    const int order = std::min(static_cast<int>(state_.temperature_history.size()) + 1, 3);
    return advance_temperature(order, temperature_terms(state_.velocity, *state_.temperature));
}

Field FlowSolver::advance_temperature(int order, const Field& nt_current) const {
    const TimeCoefficients c = time_coefficients(order);
    const double dt = settings_.dt;
    const double t_new = state_.time + dt;
    const Field& temp = *state_.temperature;

    Field forcing = c.ext[0] * nt_current;
    forcing.axpy(c.bdf[0] / dt, temp);
    for (int j = 1; j < order; ++j) {
        forcing.axpy(c.ext[j], state_.temperature_convection_history[j - 1]);
        forcing.axpy(c.bdf[j] / dt, state_.temperature_history[j - 1]);
    }
    const double h1 = params_.diffusivity();
    const double h2 = c.bdf0 / dt;

    std::function<double(const Point&)> value;
    if (data_.temperature_boundary)
        value = [&](const Point& x) { return data_.temperature_boundary(x, t_new); };
    const Field lift = dirichlet_lift(temperature_mask_, value);
    Field rhs = apply_mass(*disc_, forcing);
    rhs -= temperature_solver_.apply(h1, h2, lift);
    SolveResult r = temperature_solver_.solve(h1, h2, rhs, temp, settings_.temperature_tol,
                                              settings_.max_iterations);
    last_temperature_stats_ = r.stats;
    r.solution += lift;
    return std::move(r.solution);
}

double FlowSolver::kinetic_energy() const {
    double e = 0.0;
    for (const Field& u : state_.velocity) e += disc_->inner(u, u);
    return 0.5 * e;
}

StepReport FlowSolver::step() {
    const int dim = disc_->dim();
    const double dt = settings_.dt;
    const double t_new = state_.time + dt;
    const int order = std::min(static_cast<int>(state_.velocity_history.size()) + 1, 3);
    const TimeCoefficients c = time_coefficients(order);
    const auto& x = disc_->geometry().coordinates;

    StepReport report;
    report.order = order;
    report.cfl = estimate_cfl(*disc_, state_.velocity, dt);
    if (report.cfl > settings_.cfl_limit) {
        report.cfl_exceeded = true;
        if (settings_.cfl_action == CflAction::Abort)
            throw Error("CFL " + std::to_string(report.cfl) + " exceeds limit " +
                        std::to_string(settings_.cfl_limit));
    }

    // Temperature uses the velocity at the current level, so it goes first.
    std::optional<Field> nt_current;
    std::optional<Field> new_temperature;
    if (settings_.temperature) {
        nt_current = temperature_terms(state_.velocity, *state_.temperature);
    }

    VectorField n_current;
    VectorField new_velocity = state_.velocity;
    Field new_pressure = state_.pressure;
    if (settings_.solve_flow) {
        n_current = explicit_terms(state_.velocity, state_.time);

        // (a) extrapolated explicit terms plus BDF history
        VectorField forcing(dim), u_ext(dim);
        for (int a = 0; a < dim; ++a) {
            forcing[a] = c.ext[0] * n_current[a];
            forcing[a].axpy(c.bdf[0] / dt, state_.velocity[a]);
            u_ext[a] = c.ext[0] * state_.velocity[a];
            for (int j = 1; j < order; ++j) {
                forcing[a].axpy(c.ext[j], state_.convection_history[j - 1][a]);
                forcing[a].axpy(c.bdf[j] / dt, state_.velocity_history[j - 1][a]);
                u_ext[a].axpy(c.ext[j], state_.velocity_history[j - 1][a]);
            }
        }
        if (data_.body_force) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                const auto f = data_.body_force(x[i], t_new);
                for (int a = 0; a < dim; ++a) forcing[a][i] += f[a];
            }
        }

        // (b) pressure
        Field prhs = apply_weak_divergence(*disc_, forcing);
        prhs += pressure_boundary_flux(u_ext, t_new, c.bdf0);
        SolveResult pr = pressure_.solve(std::move(prhs), settings_.pressure_tol, settings_.max_iterations);
        report.solves.push_back({SolveKind::Pressure, 0, pr.stats});
        new_pressure = std::move(pr.solution);

        // (c) velocity Helmholtz solves
        const double h1 = params_.kinematic_viscosity();
        const double h2 = c.bdf0 / dt;
        const VectorField grad_p = apply_gradient(*disc_, new_pressure);
        for (int a = 0; a < dim; ++a) {
            std::function<double(const Point&)> value;
            if (data_.velocity_boundary)
                value = [&](const Point& p) { return data_.velocity_boundary(p, t_new)[a]; };
            const Field lift = dirichlet_lift(velocity_mask_, value);
            Field rhs = apply_mass(*disc_, forcing[a] - grad_p[a]);
            rhs -= velocity_solver_.apply(h1, h2, lift);
            SolveResult vr = velocity_solver_.solve(h1, h2, rhs, u_ext[a], settings_.velocity_tol,
                                                    settings_.max_iterations);
            report.solves.push_back({SolveKind::Velocity, a, vr.stats});
            vr.solution += lift;
            new_velocity[a] = std::move(vr.solution);
        }
    }

    // (d) temperature
    if (settings_.temperature) {
        new_temperature = advance_temperature(order_for_temperature(), *nt_current);
        report.solves.push_back({SolveKind::Temperature, 0, last_temperature_stats_});
    }

    // (e) filter, keeping Dirichlet values untouched
    if (settings_.filter) {
        auto filter = [&](Field& f, const Field& mask) {
            const Field g = apply_filter(*disc_, f, settings_.filter_cutoff, settings_.filter_strength);
            for (std::size_t i = 0; i < f.size(); ++i)
                if (mask[i] != 0.0) f[i] = g[i];
        };
        if (settings_.solve_flow)
            for (Field& u : new_velocity) filter(u, velocity_mask_);
        if (new_temperature) filter(*new_temperature, temperature_mask_);
    }

    // history shift
    if (settings_.solve_flow) {
        state_.velocity_history.push_front(std::move(state_.velocity));
        state_.convection_history.push_front(std::move(n_current));
        while (state_.velocity_history.size() > 3) state_.velocity_history.pop_back();
        while (state_.convection_history.size() > 3) state_.convection_history.pop_back();
        state_.velocity = std::move(new_velocity);
        state_.pressure = std::move(new_pressure);
    } else {
        state_.velocity_history.push_front(state_.velocity);
        state_.convection_history.push_front(VectorField{});
        while (state_.velocity_history.size() > 3) state_.velocity_history.pop_back();
        while (state_.convection_history.size() > 3) state_.convection_history.pop_back();
    }
    if (settings_.temperature) {
        state_.temperature_history.push_front(std::move(*state_.temperature));
        state_.temperature_convection_history.push_front(std::move(*nt_current));
        while (state_.temperature_history.size() > 3) state_.temperature_history.pop_back();
        while (state_.temperature_convection_history.size() > 3)
            state_.temperature_convection_history.pop_back();
        state_.temperature = std::move(new_temperature);
    }
    state_.time = t_new;
    ++state_.step_index;
    report.divergence = settings_.solve_flow ? max_abs(apply_divergence(*disc_, state_.velocity)) : 0.0;
    return report;
}

int FlowSolver::order_for_temperature() const {
    return std::min(static_cast<int>(state_.temperature_history.size()) + 1, 3);
}

}  // namespace sem
