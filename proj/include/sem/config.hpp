#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sem/mesh.hpp"
#include "sem/solver.hpp"

namespace sem {

enum class CaseKind { TaylorGreen, Kovasznay, LidCavity, Channel, CustomBox, Diffusion };

[[nodiscard]] CaseKind case_from_name(const std::string& name);
[[nodiscard]] std::string case_name(CaseKind kind);

/// Everything needed to run one case. Defaults come from the case preset; a config
/// file overrides individual keys.
struct RunConfig {
    CaseKind kind = CaseKind::TaylorGreen;
    bool analytic_error = false;
    double perturbation = 0.0;  ///< amplitude of seeded random initial noise
    std::uint64_t seed = 0;

    BoxSpec box;
    int order = 8;

    double dt = 1e-3;
    double end_time = 1.0;
    /// Fill the first two history levels from the analytic solution.
    bool exact_start = false;

    FlowParameters physics;
    bool temperature = false;
    std::array<double, 3> body_force{0.0, 0.0, 0.0};

    SolverSettings numerics;

    std::string output_dir = "out";
    int snapshot_every = 0;  ///< steps between snapshots; 0 disables them
    int probe_every = 1;
    std::vector<Point> probes;

    /// Number of steps so that steps * dt matches end_time to within one step.
    [[nodiscard]] long steps() const;
};

/// Preset for a named case; throws ConfigError for unknown names.
[[nodiscard]] RunConfig default_config(CaseKind kind);

/// Parses `[section]` headers and `key = value` lines; '#' starts a comment.
/// Errors carry "source:line:" prefixes.
[[nodiscard]] RunConfig parse_config(std::istream& in, const std::string& source = "config");
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Throws ConfigError naming the first offending field.
void validate_config(const RunConfig& config);

}  // namespace sem
