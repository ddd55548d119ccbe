#include "sem/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "sem/cases.hpp"
#include "sem/error.hpp"
#include "sem/io.hpp"

namespace sem {

namespace {

VectorField sample_velocity(const Discretization& disc, const VectorFunction& f, double t) {
    VectorField out;
    for (int c = 0; c < disc.dim(); ++c)
        out.push_back(disc.interpolate([&](const Point& x) { return f(x, t)[c]; }));
    return out;
}

Field sample_scalar(const Discretization& disc, const ScalarFunction& f, double t) {
    return disc.interpolate([&](const Point& x) { return f(x, t); });
}

// Continuous random noise in [-a, a], zero where velocity is prescribed.
void add_perturbation(const Discretization& disc, VectorField& u, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    const Field mask = disc.boundary_mask([](FaceKind k) { return k == FaceKind::Dirichlet; });
    const auto& gs = disc.gather_scatter();
    for (Field& comp : u) {
        std::vector<double> g(gs.num_global());
        for (double& v : g) v = dist(rng);
        const Field noise(gs.scatter(g));
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] += mask[i] * noise[i];
    }
}

double max_error(const Field& a, const Field& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

std::vector<Point> default_probes(const BoxSpec& box) {
    Point centre{0.0, 0.0, 0.0};
    for (int d = 0; d < box.dim; ++d) centre[d] = 0.5 * (box.lo[d] + box.hi[d]);
    return {centre};
}

class Outputs {
public:
    Outputs(const RunConfig& c, const Discretization& disc, bool enabled)
        : config_(c), disc_(disc), enabled_(enabled),
          probes_(disc, c.probes.empty() ? default_probes(c.box) : c.probes) {
        if (!enabled_) return;
        dir_ = c.output_dir;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        table_.columns.push_back("time");
        const char* names[] = {"u", "v", "w"};
        for (std::size_t p = 0; p < probes_.size(); ++p) {
            for (int d = 0; d < disc.dim(); ++d) table_.columns.push_back(fmt::format("{}_{}", names[d], p));
            table_.columns.push_back(fmt::format("p_{}", p));
            if (c.temperature) table_.columns.push_back(fmt::format("T_{}", p));
        }
    }

    void record(const SolverState& s) {
        if (!enabled_) return;
        const long n = s.step_index;
        if (config_.probe_every > 0 && n % config_.probe_every == 0) {
            std::vector<double> row{s.time};
            for (std::size_t p = 0; p < probes_.size(); ++p) {
                for (const Field& comp : s.velocity) row.push_back(probes_.evaluate(p, comp));
                row.push_back(probes_.evaluate(p, s.pressure));
                if (s.temperature) row.push_back(probes_.evaluate(p, *s.temperature));
            }
            table_.rows.push_back(std::move(row));
        }
        if (config_.snapshot_every > 0 && n % config_.snapshot_every == 0) {
            std::vector<Field> fields(s.velocity.begin(), s.velocity.end());
            fields.push_back(s.pressure);
            if (s.temperature) fields.push_back(*s.temperature);
            const auto header = make_header(disc_.mesh(), static_cast<std::uint32_t>(fields.size()), s.time,
                                            static_cast<std::uint64_t>(n));
            write_snapshot((dir_ / fmt::format("snapshot_{:06d}.semk", n)).string(), header, fields);
        }
    }

    void finish(const RunResult& r) {
        if (!enabled_) return;
        write_csv((dir_ / "probes.csv").string(), table_);
        nlohmann::json j;
        j["case"] = case_name(config_.kind);
        j["order"] = config_.order;
        j["dt"] = config_.dt;
        j["steps"] = r.steps;
        j["final_time"] = r.time;
        j["wall_time_seconds"] = r.wall_seconds;
        j["max_divergence"] = r.max_divergence;
        j["final_divergence"] = r.final_divergence;
        if (r.velocity_error) j["velocity_error"] = *r.velocity_error;
        if (r.temperature_error) j["temperature_error"] = *r.temperature_error;
        auto& steps = j["step_log"] = nlohmann::json::array();
        for (const StepLog& s : r.log) {
            nlohmann::json e{{"step", s.step},
                             {"time", s.time},
                             {"order", s.order},
                             {"velocity_iterations", s.velocity_iterations},
                             {"pressure_iterations", s.pressure_iterations},
                             {"cfl", s.cfl},
                             {"divergence", s.divergence}};
            if (s.temperature_iterations >= 0) e["temperature_iterations"] = s.temperature_iterations;
            steps.push_back(std::move(e));
        }
        std::ofstream out(dir_ / "summary.json");
        out << j.dump(2) << '\n';
        if (!out) throw IoError("cannot write " + (dir_ / "summary.json").string());
    }

private:
    const RunConfig& config_;
    const Discretization& disc_;
    bool enabled_;
    ProbeSet probes_;
    std::filesystem::path dir_;
    CsvTable table_;
};

}  // namespace

RunResult run_case(const RunConfig& config, const RunOptions& options) {
    validate_config(config);
    const auto start = std::chrono::steady_clock::now();
    const CaseSetup setup = make_case(config);
    const Discretization disc(build_box_mesh(setup.box, config.order));

    SolverSettings settings = config.numerics;
    settings.dt = config.dt;
    settings.temperature = config.temperature || config.kind == CaseKind::Diffusion;
    settings.solve_flow = setup.solve_flow;
    FlowSolver solver(disc, config.physics, settings, setup.data);

    VectorField u0 = sample_velocity(disc, setup.initial_velocity, 0.0);
    if (config.perturbation > 0.0) add_perturbation(disc, u0, config.perturbation, config.seed);
    std::optional<Field> t0;
    if (settings.temperature) t0 = sample_scalar(disc, setup.initial_temperature, 0.0);
    solver.initialize(std::move(u0), std::move(t0), 0.0);
    if (config.exact_start && (setup.exact_velocity || setup.exact_temperature)) {
        const VectorFunction vel = setup.exact_velocity ? setup.exact_velocity : setup.initial_velocity;
        std::function<Field(double)> temp;
        if (settings.temperature && setup.exact_temperature)
            temp = [&](double t) { return sample_scalar(disc, setup.exact_temperature, t); };
        solver.seed_history([&](double t) { return sample_velocity(disc, vel, t); }, temp);
    }

    Outputs outputs(config, disc, options.write_files);
    outputs.record(solver.state());

    RunResult result;
    const long steps = config.steps();
    for (long n = 0; n < steps; ++n) {
        const StepReport report = solver.step();
        StepLog entry;
        entry.step = solver.state().step_index;
        entry.time = solver.state().time;
        entry.order = report.order;
        entry.cfl = report.cfl;
        entry.divergence = report.divergence;
        entry.solves = static_cast<int>(report.solves.size());
        for (const SolveRecord& s : report.solves) {
            switch (s.kind) {
            case SolveKind::Velocity: entry.velocity_iterations.push_back(s.stats.iterations); break;
            case SolveKind::Pressure: entry.pressure_iterations = s.stats.iterations; break;
            case SolveKind::Temperature: entry.temperature_iterations = s.stats.iterations; break;
            }
        }
        if (report.cfl_exceeded && options.progress)
            *options.progress << fmt::format("warning: step {} CFL {:.3g} exceeds limit {:.3g}\n", entry.step,
                                             report.cfl, settings.cfl_limit);
        result.max_divergence = std::max(result.max_divergence, report.divergence);
        result.final_divergence = report.divergence;
        result.log.push_back(std::move(entry));
        outputs.record(solver.state());
    }

    const SolverState& s = solver.state();
    result.steps = s.step_index;
    result.time = s.time;
    if (setup.exact_velocity && setup.solve_flow) {
        const VectorField exact = sample_velocity(disc, setup.exact_velocity, s.time);
        double e = 0.0;
        for (std::size_t c = 0; c < exact.size(); ++c) e = std::max(e, max_error(exact[c], s.velocity[c]));
        result.velocity_error = e;
    }
    if (setup.exact_temperature && s.temperature)
        result.temperature_error = max_error(sample_scalar(disc, setup.exact_temperature, s.time), *s.temperature);
    result.velocity = s.velocity;
    result.pressure = s.pressure;
    result.temperature = s.temperature;
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outputs.finish(result);
    return result;
}

namespace {

double to_number(const std::string& text, const std::string& whole) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ParameterError("malformed sweep '" + whole + "'");
    return v;
}

}  // namespace

Sweep parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParameterError("sweep must look like N=... or dt=...: '" + text + "'");
    const std::string name = text.substr(0, eq);
    const std::string spec = text.substr(eq + 1);
    Sweep sweep;
    if (name == "N")
        sweep.parameter = SweepParameter::Order;
    else if (name == "dt")
        sweep.parameter = SweepParameter::TimeStep;
    else
        throw ParameterError("unknown sweep parameter '" + name + "'");

    if (const auto slash = spec.find("/2^"); slash != std::string::npos) {
        const double base = to_number(spec.substr(0, slash), text);
        const std::string range = spec.substr(slash + 3);
        const auto dots = range.find("..");
        if (dots == std::string::npos) throw ParameterError("malformed sweep '" + text + "'");
        const int a = static_cast<int>(to_number(range.substr(0, dots), text));
        const int b = static_cast<int>(to_number(range.substr(dots + 2), text));
        for (int k = a; k <= b; ++k) sweep.values.push_back(std::ldexp(base, -k));
    } else if (std::count(spec.begin(), spec.end(), ':') == 2) {
        const auto c1 = spec.find(':');
        const auto c2 = spec.find(':', c1 + 1);
        const double first = to_number(spec.substr(0, c1), text);
        const double stride = to_number(spec.substr(c1 + 1, c2 - c1 - 1), text);
        const double last = to_number(spec.substr(c2 + 1), text);
        if (!(stride > 0.0)) throw ParameterError("sweep stride must be positive in '" + text + "'");
        for (double v = first; v <= last + 1e-9 * std::abs(last); v += stride) sweep.values.push_back(v);
    } else {
        std::stringstream in(spec);
        std::string item;
        while (std::getline(in, item, ',')) sweep.values.push_back(to_number(item, text));
    }
    if (sweep.values.empty()) throw ParameterError("sweep '" + text + "' has no values");
    for (double v : sweep.values) {
        if (!(v > 0.0)) throw ParameterError("sweep values must be positive in '" + text + "'");
        if (sweep.parameter == SweepParameter::Order && (v != std::round(v) || v < 1.0))
            throw ParameterError("polynomial orders must be positive integers in '" + text + "'");
    }
    return sweep;
}

std::optional<double> fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || x.size() != y.size()) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

ConvergenceResult run_convergence(const RunConfig& base, const Sweep& sweep, const RunOptions& options) {
    if (!has_analytic_reference(base.kind))
        throw ConfigError("case.name: convergence needs an analytic case (taylor_green, kovasznay, diffusion), got " +
                          case_name(base.kind));
    ConvergenceResult out;
    out.sweep = sweep;
    RunOptions quiet = options;
    quiet.write_files = false;
    for (double v : sweep.values) {
        RunConfig c = base;
        if (sweep.parameter == SweepParameter::Order) {
            c.order = static_cast<int>(v);
        } else {
            c.dt = v;
            c.exact_start = true;
        }
        c.analytic_error = true;
        const RunResult r = run_case(c, quiet);
        const double e = r.velocity_error ? *r.velocity_error : r.temperature_error.value_or(0.0);
        out.points.push_back({v, e, r.wall_seconds, r.max_divergence});
    }
    std::vector<double> x, y;
    for (const auto& p : out.points) {
        if (!(p.error > 0.0)) continue;
        if (sweep.parameter == SweepParameter::TimeStep) {
            x.push_back(std::log(p.parameter));
            y.push_back(std::log(p.error));
        } else {
            x.push_back(p.parameter);
            y.push_back(-std::log(p.error));
        }
    }
    const auto slope = fit_slope(x, y);
    if (sweep.parameter == SweepParameter::TimeStep) {
        out.order = slope;
    } else {
        out.decay_rate = slope;
        for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
            const double ratio = out.points[i].error / out.points[i + 1].error;
            out.min_ratio = out.min_ratio ? std::min(*out.min_ratio, ratio) : ratio;
        }
    }
    return out;
}

}  // namespace sem
