// Command-line front end: run, pod, stats, convergence.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sem/error.hpp"
#include "sem/io.hpp"
#include "sem/pod.hpp"
#include "sem/run.hpp"

namespace {

enum Exit { Ok = 0, Usage = 1, BadConfig = 2, Numerical = 3, InputOutput = 4 };

struct RunArgs {
    std::string config;
    std::string out;
};

struct PodArgs {
    std::string snapshots;
    std::vector<std::string> clips;
    int modes = 4;
    double pair_tol = 0.05;
    bool keep_mean = false;
    std::string out = "pod";
};

struct StatsArgs {
    std::string csv;
    std::string column;
    int max_lag = 100;
    std::string out = ".";
};

struct ConvergenceArgs {
    std::string config;
    std::string sweep;
    std::string out = ".";
};

std::filesystem::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw sem::IoError("cannot create directory " + dir + ": " + ec.message());
    return dir;
}

int cmd_run(const RunArgs& a) {
    sem::RunConfig config = sem::load_config(a.config);
    if (!a.out.empty()) config.output_dir = a.out;
    sem::RunOptions options;
    options.progress = &std::cerr;
    const sem::RunResult r = sem::run_case(config, options);
    fmt::print("{} steps to t = {}, {:.2f} s, max divergence {}\n", r.steps, sem::format_real(r.time),
               r.wall_seconds, sem::format_real(r.max_divergence));
    if (config.analytic_error) {
        if (r.velocity_error) fmt::print("max velocity error: {}\n", sem::format_real(*r.velocity_error));
        if (r.temperature_error) fmt::print("max temperature error: {}\n", sem::format_real(*r.temperature_error));
        if (!r.velocity_error && !r.temperature_error)
            fmt::print("no analytic solution for case {}\n", sem::case_name(config.kind));
    }
    return Ok;
}

// "box:x0,x1,y0,y1[,z0,z1]"
std::pair<sem::Point, sem::Point> parse_clip(const std::string& spec, int dim) {
    if (spec.rfind("box:", 0) != 0) throw sem::ParameterError("clip must start with 'box:': " + spec);
    std::vector<double> v;
    std::stringstream in(spec.substr(4));
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw sem::ParameterError("malformed clip bound '" + item + "' in " + spec);
        }
    }
    if (v.size() != static_cast<std::size_t>(2 * dim))
        throw sem::ParameterError(fmt::format("clip {} needs {} bounds for a {}-d mesh", spec, 2 * dim, dim));
    sem::Point lo{0.0, 0.0, 0.0}, hi{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) lo[d] = v[2 * d], hi[d] = v[2 * d + 1];
    return {lo, hi};
}

int cmd_pod(const PodArgs& a) {
    const auto paths = sem::expand_glob(a.snapshots);
    if (paths.size() < 2) throw sem::IoError(fmt::format("need at least 2 snapshots, '{}' matched {}", a.snapshots, paths.size()));
    std::vector<sem::Snapshot> files;
    for (const auto& p : paths) files.push_back(sem::read_snapshot(p));
    const sem::SnapshotHeader& h0 = files.front().header;
    for (std::size_t i = 1; i < files.size(); ++i)
        if (!files[i].header.same_mesh(h0)) throw sem::IoError("snapshot " + paths[i] + " has a different mesh than " + paths[0]);
    if (h0.field_count < h0.dim) throw sem::IoError("snapshots hold fewer fields than velocity components");

    const sem::Discretization disc(sem::build_box_mesh(sem::box_from_header(h0), static_cast<int>(h0.order)));
    std::vector<sem::VectorField> velocity;
    for (auto& f : files) velocity.emplace_back(f.fields.begin(), f.fields.begin() + h0.dim);
    double spacing = 1.0;
    if (files.size() > 1 && files[1].header.time > files[0].header.time)
        spacing = files[1].header.time - files[0].header.time;
    const sem::SnapshotSet set(disc, std::move(velocity), spacing, !a.keep_mean);

    std::optional<sem::ClipRegion> clip;
    for (const std::string& spec : a.clips) {
        const auto [lo, hi] = parse_clip(spec, disc.dim());
        auto region = sem::ClipRegion::box(disc, lo, hi);
        clip = clip ? clip->united(region) : std::move(region);
    }

    const int count = std::min<int>(a.modes, static_cast<int>(set.size()));
    const sem::PodResult pod = sem::compute_pod(set, count, clip ? &*clip : nullptr);
    const auto dir = prepare_dir(a.out);

    sem::CsvTable eig{{"mode", "eigenvalue"}, {}};
    for (std::size_t i = 0; i < pod.eigenvalues.size(); ++i)
        eig.rows.push_back({static_cast<double>(i + 1), pod.eigenvalues[i]});
    sem::write_csv((dir / "eigenvalues.csv").string(), eig);

    sem::CsvTable coef{{"snapshot"}, {}};
    for (int i = 0; i < count; ++i) coef.columns.push_back(fmt::format("a_{}", i + 1));
    for (std::size_t n = 0; n < set.size(); ++n) {
        std::vector<double> row{static_cast<double>(n + 1)};
        for (int i = 0; i < count; ++i) row.push_back(pod.coefficients(static_cast<Eigen::Index>(n), i));
        coef.rows.push_back(std::move(row));
    }
    sem::write_csv((dir / "coefficients.csv").string(), coef);

    for (int i = 0; i < count; ++i) {
        const auto header = sem::make_header(disc.mesh(), h0.dim, 0.0, static_cast<std::uint64_t>(i + 1));
        sem::write_snapshot((dir / fmt::format("mode_{:03d}.semk", i + 1)).string(), header, pod.modes[i]);
    }

    fmt::print("{} snapshots, {} modes written to {}\n", set.size(), count, dir.string());
    for (int i = 0; i < count; ++i) fmt::print("lambda_{} = {}\n", i + 1, sem::format_real(pod.eigenvalues[i]));
    if (pod.eigenvalues.size() >= 2) {
        if (pod.eigenvalues[0] > 0.0)
            fmt::print("lambda_2/lambda_1 = {}\n", sem::format_real(pod.eigenvalues[1] / pod.eigenvalues[0]));
        else
            fmt::print("lambda_2/lambda_1 undefined: snapshots carry no energy (try --keep-mean)\n");
    }
    const auto pairs = sem::detect_mode_pairs(pod.eigenvalues, a.pair_tol);
    if (pairs.empty()) fmt::print("no mode pairs at tolerance {}\n", a.pair_tol);
    for (const auto& [i, j] : pairs) fmt::print("pair ({},{})\n", i + 1, j + 1);
    return Ok;
}

int cmd_stats(const StatsArgs& a) {
    const sem::CsvTable table = sem::read_csv(a.csv);
    const auto& series = table.column(a.column);
    const sem::Moments m = sem::moments(series);
    const auto rho = sem::autocorrelation(series, a.max_lag);
    fmt::print("samples  {}\nmean     {}\nrms      {}\nskewness {}\nkurtosis {}\n", series.size(),
               sem::format_real(m.mean), sem::format_real(m.rms), sem::format_real(m.skewness),
               sem::format_real(m.kurtosis));
    const auto dir = prepare_dir(a.out);
    sem::CsvTable out{{"lag", "autocorrelation"}, {}};
    for (std::size_t t = 0; t < rho.size(); ++t) out.rows.push_back({static_cast<double>(t), rho[t]});
    sem::write_csv((dir / "autocorrelation.csv").string(), out);
    return Ok;
}

int cmd_convergence(const ConvergenceArgs& a) {
    const sem::RunConfig config = sem::load_config(a.config);
    const sem::Sweep sweep = sem::parse_sweep(a.sweep);
    sem::validate_config(config);
    const sem::ConvergenceResult r = sem::run_convergence(config, sweep);
    const bool by_dt = sweep.parameter == sem::SweepParameter::TimeStep;
    const char* name = by_dt ? "dt" : "N";
    sem::CsvTable table{{name, "error", "wall_seconds"}, {}};
    fmt::print("{:>12} {:>24}\n", name, "error");
    for (const auto& p : r.points) {
        table.rows.push_back({p.parameter, p.error, p.wall_seconds});
        fmt::print("{:>12} {:>24}\n", sem::format_real(p.parameter), sem::format_real(p.error));
    }
    const auto dir = prepare_dir(a.out);
    sem::write_csv((dir / "convergence.csv").string(), table);
    if (by_dt && r.order)
        fmt::print("fitted temporal order {:.3f}\n", *r.order);
    else if (!by_dt && r.decay_rate)
        fmt::print("fitted decay rate {:.3f} per unit N, min error ratio per step {:.3g}\n", *r.decay_rate,
                   r.min_ratio.value_or(0.0));
    else
        fmt::print("no fit: fewer than two points\n");
    return Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral element flow solver and POD toolkit"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Integrate a configured case");
    run_cmd->add_option("--config", run.config, "Run configuration file")->required();
    run_cmd->add_option("--out", run.out, "Output directory (overrides the config)");

    PodArgs pod;
    auto* pod_cmd = app.add_subcommand("pod", "Snapshot POD of velocity fields");
    pod_cmd->add_option("--snapshots", pod.snapshots, "Glob matching snapshot files")->required();
    pod_cmd->add_option("--clip", pod.clips, "box:x0,x1,y0,y1[,z0,z1]; repeat for a union");
    pod_cmd->add_option("--modes", pod.modes, "Number of modes to write")->check(CLI::PositiveNumber);
    pod_cmd->add_option("--pair-tol", pod.pair_tol, "Relative tolerance for eigenvalue pairs");
    pod_cmd->add_flag("--keep-mean", pod.keep_mean, "Do not subtract the snapshot mean");
    pod_cmd->add_option("--out", pod.out, "Output directory");

    StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "Moments and autocorrelation of a CSV column");
    stats_cmd->add_option("--csv", stats.csv, "Input CSV (e.g. probes.csv)")->required();
    stats_cmd->add_option("--column", stats.column, "Column name")->required();
    stats_cmd->add_option("--max-lag", stats.max_lag, "Largest lag")->check(CLI::NonNegativeNumber);
    stats_cmd->add_option("--out", stats.out, "Output directory");

    ConvergenceArgs conv;
    auto* conv_cmd = app.add_subcommand("convergence", "Error sweep over N or dt");
    conv_cmd->add_option("--config", conv.config, "Run configuration file")->required();
    conv_cmd->add_option("--sweep", conv.sweep, "N=4:2:12 or dt=1e-2/2^0..4")->required();
    conv_cmd->add_option("--out", conv.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*pod_cmd) return cmd_pod(pod);
        if (*stats_cmd) return cmd_stats(stats);
        if (*conv_cmd) return cmd_convergence(conv);
    } catch (const sem::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return InputOutput;
    } catch (const sem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return BadConfig;
    } catch (const sem::MeshError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return BadConfig;
    } catch (const sem::ParameterError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return Usage;
    } catch (const sem::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return Numerical;
    }
    return Usage;
}
