#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sem/config.hpp"

namespace sem {

struct StepLog {
    long step = 0;
    double time = 0.0;
    int order = 1;
    int solves = 0;  ///< linear solves performed in this step
    std::vector<int> velocity_iterations;
    int pressure_iterations = 0;
    int temperature_iterations = -1;  ///< -1 when there is no temperature solve
    double cfl = 0.0;
    double divergence = 0.0;
};

struct RunResult {
    long steps = 0;
    double time = 0.0;
    std::vector<StepLog> log;
    double max_divergence = 0.0;
    double final_divergence = 0.0;
    std::optional<double> velocity_error;     ///< max-norm against the analytic solution
    std::optional<double> temperature_error;
    double wall_seconds = 0.0;
    VectorField velocity;
    Field pressure;
    std::optional<Field> temperature;
};

struct RunOptions {
    bool write_files = true;
    std::ostream* progress = nullptr;  ///< CFL warnings
};

/// Integrates a configured case from t = 0 to end_time. With write_files, produces
/// snapshot_NNNNNN.semk, probes.csv and summary.json in the output directory.
RunResult run_case(const RunConfig& config, const RunOptions& options = {});

enum class SweepParameter { Order, TimeStep };

struct Sweep {
    SweepParameter parameter = SweepParameter::Order;
    std::vector<double> values;
};

/// "N=4:2:12" (start:step:end), "dt=1e-2/2^0..4" (halvings) or comma lists
/// such as "N=4,6,8" and "dt=0.01,0.005". Throws ParameterError.
[[nodiscard]] Sweep parse_sweep(const std::string& text);

struct ConvergencePoint {
    double parameter = 0.0;
    double error = 0.0;
    double wall_seconds = 0.0;
    double max_divergence = 0.0;
};

struct ConvergenceResult {
    Sweep sweep;
    std::vector<ConvergencePoint> points;
    /// dt sweeps: least-squares slope of log(error) against log(dt).
    std::optional<double> order;
    /// order sweeps: least-squares slope of -ln(error) against N.
    std::optional<double> decay_rate;
    /// order sweeps: smallest error(N_i) / error(N_{i+1}).
    std::optional<double> min_ratio;
};

/// Runs the sweep on an analytic case. dt sweeps start from the analytic solution
/// (exact_start) so the asymptotic order is measured. Throws ConfigError for a
/// case without an analytic reference.
ConvergenceResult run_convergence(const RunConfig& base, const Sweep& sweep, const RunOptions& options = {});

/// Least-squares slope of y against x; empty with fewer than two points.
[[nodiscard]] std::optional<double> fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sem
