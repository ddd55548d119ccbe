#include "sem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sem/error.hpp"

namespace sem {

namespace {

const std::map<std::string, CaseKind>& case_table() {
    static const std::map<std::string, CaseKind> table{
        {"taylor_green", CaseKind::TaylorGreen}, {"kovasznay", CaseKind::Kovasznay},
        {"lid_cavity", CaseKind::LidCavity},     {"channel", CaseKind::Channel},
        {"custom-box", CaseKind::CustomBox},     {"diffusion", CaseKind::Diffusion}};
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& separators) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (separators.find(c) != std::string::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Location {
    const std::string& source;
    int line;
    std::string key;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(source + ":" + std::to_string(line) + ": " + key + ": " + what);
    }
};

double to_double(const std::string& token, const Location& at) {
    double v = 0.0;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) at.fail("expected a number, got '" + token + "'");
    return v;
}

long to_long(const std::string& token, const Location& at) {
    long v = 0;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end) at.fail("expected an integer, got '" + token + "'");
    return v;
}

bool to_bool(const std::string& token, const Location& at) {
    std::string t = token;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "on" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "off" || t == "no" || t == "0") return false;
    at.fail("expected a boolean, got '" + token + "'");
}

FaceKind to_face_kind(const std::string& token, const Location& at) {
    if (token == "dirichlet" || token == "wall") return FaceKind::Dirichlet;
    if (token == "neumann" || token == "outflow") return FaceKind::Neumann;
    at.fail("expected dirichlet or neumann, got '" + token + "'");
}

std::vector<std::string> tokens(const std::string& value) { return split(value, " \t,"); }

template <class T, class F>
void fill_axes(std::array<T, 3>& target, const std::string& value, const Location& at, F convert) {
    const auto t = tokens(value);
    if (t.empty() || t.size() > 3) at.fail("expected one value per axis");
    for (std::size_t i = 0; i < t.size(); ++i) target[i] = convert(t[i], at);
}

using Setter = std::function<void(RunConfig&, const std::string&, const Location&)>;

const std::map<std::string, Setter>& setters() {
    auto number = [](double RunConfig::*field) {
        return Setter([field](RunConfig& c, const std::string& v, const Location& at) { c.*field = to_double(v, at); });
    };
    auto physics = [](double FlowParameters::*field) {
        return Setter([field](RunConfig& c, const std::string& v, const Location& at) {
            c.physics.*field = to_double(v, at);
        });
    };
    auto numerics_double = [](double SolverSettings::*field) {
        return Setter([field](RunConfig& c, const std::string& v, const Location& at) {
            c.numerics.*field = to_double(v, at);
        });
    };
    auto numerics_int = [](int SolverSettings::*field) {
        return Setter([field](RunConfig& c, const std::string& v, const Location& at) {
            c.numerics.*field = static_cast<int>(to_long(v, at));
        });
    };
    auto numerics_bool = [](bool SolverSettings::*field) {
        return Setter([field](RunConfig& c, const std::string& v, const Location& at) {
            c.numerics.*field = to_bool(v, at);
        });
    };
    static const std::map<std::string, Setter> table{
        {"case.analytic_error", [](RunConfig& c, const std::string& v, const Location& at) { c.analytic_error = to_bool(v, at); }},
        {"case.perturbation", number(&RunConfig::perturbation)},
        {"case.seed", [](RunConfig& c, const std::string& v, const Location& at) {
             const long s = to_long(v, at);
             if (s < 0) at.fail("must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"mesh.dim", [](RunConfig& c, const std::string& v, const Location& at) {
             c.box.dim = static_cast<int>(to_long(v, at));
         }},
        {"mesh.elements", [](RunConfig& c, const std::string& v, const Location& at) {
             fill_axes(c.box.counts, v, at, [](const std::string& t, const Location& l) { return static_cast<int>(to_long(t, l)); });
         }},
        {"mesh.lo", [](RunConfig& c, const std::string& v, const Location& at) { fill_axes(c.box.lo, v, at, to_double); }},
        {"mesh.hi", [](RunConfig& c, const std::string& v, const Location& at) { fill_axes(c.box.hi, v, at, to_double); }},
        {"mesh.periodic", [](RunConfig& c, const std::string& v, const Location& at) { fill_axes(c.box.periodic, v, at, to_bool); }},
        {"mesh.grading", [](RunConfig& c, const std::string& v, const Location& at) { fill_axes(c.box.grading, v, at, to_double); }},
        {"mesh.order", [](RunConfig& c, const std::string& v, const Location& at) { c.order = static_cast<int>(to_long(v, at)); }},
        {"mesh.boundary", [](RunConfig& c, const std::string& v, const Location& at) {
             const auto t = tokens(v);
             if (t.empty() || t.size() > 6 || t.size() % 2 != 0) at.fail("expected a lo/hi pair of kinds per axis");
             for (std::size_t i = 0; i < t.size(); ++i) c.box.boundary[i / 2][i % 2] = to_face_kind(t[i], at);
         }},
        {"time.dt", number(&RunConfig::dt)},
        {"time.end_time", number(&RunConfig::end_time)},
        {"time.exact_start", [](RunConfig& c, const std::string& v, const Location& at) { c.exact_start = to_bool(v, at); }},
        {"physics.density", physics(&FlowParameters::density)},
        {"physics.viscosity", physics(&FlowParameters::viscosity)},
        {"physics.heat_capacity", physics(&FlowParameters::heat_capacity)},
        {"physics.conductivity", physics(&FlowParameters::conductivity)},
        {"physics.temperature", [](RunConfig& c, const std::string& v, const Location& at) { c.temperature = to_bool(v, at); }},
        {"physics.body_force", [](RunConfig& c, const std::string& v, const Location& at) { fill_axes(c.body_force, v, at, to_double); }},
        {"numerics.filter", numerics_bool(&SolverSettings::filter)},
        {"numerics.filter_cutoff", numerics_int(&SolverSettings::filter_cutoff)},
        {"numerics.filter_strength", numerics_double(&SolverSettings::filter_strength)},
        {"numerics.dealias", numerics_bool(&SolverSettings::dealias)},
        {"numerics.velocity_tol", numerics_double(&SolverSettings::velocity_tol)},
        {"numerics.pressure_tol", numerics_double(&SolverSettings::pressure_tol)},
        {"numerics.temperature_tol", numerics_double(&SolverSettings::temperature_tol)},
        {"numerics.projection", numerics_bool(&SolverSettings::projection)},
        {"numerics.projection_depth", numerics_int(&SolverSettings::projection_depth)},
        {"numerics.max_iterations", numerics_int(&SolverSettings::max_iterations)},
        {"numerics.cfl_limit", numerics_double(&SolverSettings::cfl_limit)},
        {"numerics.cfl_action", [](RunConfig& c, const std::string& v, const Location& at) {
             if (v == "warn") c.numerics.cfl_action = CflAction::Warn;
             else if (v == "abort") c.numerics.cfl_action = CflAction::Abort;
             else at.fail("expected warn or abort");
         }},
        {"output.directory", [](RunConfig& c, const std::string& v, const Location&) { c.output_dir = v; }},
        {"output.snapshot_every", [](RunConfig& c, const std::string& v, const Location& at) {
             c.snapshot_every = static_cast<int>(to_long(v, at));
         }},
        {"output.probe_every", [](RunConfig& c, const std::string& v, const Location& at) {
             c.probe_every = static_cast<int>(to_long(v, at));
         }},
        {"output.probes", [](RunConfig& c, const std::string& v, const Location& at) {
             c.probes.clear();
             for (const std::string& point : split(v, ";")) {
                 const auto t = tokens(point);
                 if (t.empty() || t.size() > 3) at.fail("each probe needs 2 or 3 coordinates");
                 Point p{0.0, 0.0, 0.0};
                 for (std::size_t i = 0; i < t.size(); ++i) p[i] = to_double(t[i], at);
                 c.probes.push_back(p);
             }
         }},
    };
    return table;
}

}  // namespace

CaseKind case_from_name(const std::string& name) {
    const auto it = case_table().find(name);
    if (it == case_table().end()) throw ConfigError("unknown case '" + name + "'");
    return it->second;
}

std::string case_name(CaseKind kind) {
    for (const auto& [name, k] : case_table())
        if (k == kind) return name;
    return "unknown";
}

long RunConfig::steps() const { return std::max(0L, std::lround(end_time / dt)); }

RunConfig default_config(CaseKind kind) {
    RunConfig c;
    c.kind = kind;
    BoxSpec& b = c.box;
    b.dim = 2;
    switch (kind) {
    case CaseKind::TaylorGreen:
        b.counts = {4, 4, 1};
        b.hi = {2.0 * M_PI, 2.0 * M_PI, 1.0};
        b.periodic = {true, true, false};
        c.physics.viscosity = 0.01;
        c.dt = 1e-3;
        c.end_time = 1.0;
        c.analytic_error = true;
        break;
    case CaseKind::Kovasznay:
        b.counts = {3, 2, 1};
        b.lo = {-0.5, 0.0, 0.0};
        b.hi = {1.0, 1.0, 1.0};
        b.periodic = {false, true, false};
        c.physics.viscosity = 1.0 / 40.0;
        c.order = 8;
        c.dt = 4e-3;
        c.end_time = 6.0;
        c.analytic_error = true;
        break;
    case CaseKind::LidCavity:
        b.counts = {4, 4, 1};
        c.physics.viscosity = 0.01;
        c.dt = 2e-3;
        c.end_time = 1.0;
        break;
    case CaseKind::Channel:
        b.counts = {4, 4, 1};
        b.lo = {0.0, -1.0, 0.0};
        b.hi = {2.0 * M_PI, 1.0, 1.0};
        b.periodic = {true, false, false};
        c.physics.viscosity = 0.01;
        c.body_force = {2.0 * 0.01, 0.0, 0.0};  // balances the laminar profile 1 - y^2
        c.dt = 2e-3;
        c.end_time = 1.0;
        c.analytic_error = true;
        break;
    case CaseKind::CustomBox:
        b.counts = {2, 2, 1};
        c.dt = 1e-3;
        c.end_time = 0.1;
        break;
    case CaseKind::Diffusion:
        b.counts = {2, 2, 1};
        c.temperature = true;
        c.physics.conductivity = 0.1;
        c.dt = 1e-3;
        c.end_time = 0.1;
        c.analytic_error = true;
        break;
    }
    return c;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    struct Entry {
        std::string key;
        std::string value;
        int line;
    };
    std::vector<Entry> entries;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(source + ":" + std::to_string(line) + ": malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line) + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        if (section.empty())
            throw ConfigError(source + ":" + std::to_string(line) + ": " + key + ": key outside of a section");
        entries.push_back({section + "." + key, trim(text.substr(eq + 1)), line});
    }

    std::string name;
    for (const Entry& e : entries)
        if (e.key == "case.name") name = e.value;
    if (name.empty()) throw ConfigError(source + ": missing [case] name");
    RunConfig config;
    try {
        config = default_config(case_from_name(name));
    } catch (const ConfigError& err) {
        int at = 0;
        for (const Entry& e : entries)
            if (e.key == "case.name") at = e.line;
        throw ConfigError(source + ":" + std::to_string(at) + ": case.name: " + err.what());
    }

    for (const Entry& e : entries) {
        if (e.key == "case.name") continue;
        const Location at{source, e.line, e.key};
        const auto it = setters().find(e.key);
        if (it == setters().end()) at.fail("unknown key");
        it->second(config, e.value, at);
    }
    try {
        validate_config(config);
    } catch (const ConfigError& err) {
        // point at the line that set the offending key, when there is one
        const std::string what = err.what();
        const std::string field = what.substr(0, what.find(' '));
        for (auto e = entries.rbegin(); e != entries.rend(); ++e)
            if (e->key == field) throw ConfigError(source + ":" + std::to_string(e->line) + ": " + what);
        throw ConfigError(source + ": " + what);
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    return parse_config(in, path);
}

void validate_config(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(c.box.dim == 2 || c.box.dim == 3, "mesh.dim must be 2 or 3");
    for (int d = 0; d < c.box.dim; ++d) {
        require(c.box.counts[d] >= 1, "mesh.elements must be positive");
        require(c.box.hi[d] > c.box.lo[d], "mesh.hi must exceed mesh.lo");
        require(c.box.grading[d] > 0.0, "mesh.grading must be positive");
    }
    require(c.order >= 1 && c.order <= max_order, "mesh.order must lie in 1.." + std::to_string(max_order));
    require(c.dt > 0.0, "time.dt must be positive");
    require(c.end_time >= 0.0, "time.end_time must be non-negative");
    require(c.physics.density > 0.0, "physics.density must be positive");
    require(c.physics.viscosity > 0.0, "physics.viscosity must be positive");
    require(c.physics.heat_capacity > 0.0, "physics.heat_capacity must be positive");
    require(c.physics.conductivity > 0.0, "physics.conductivity must be positive");
    require(c.perturbation >= 0.0, "case.perturbation must be non-negative");
    const SolverSettings& n = c.numerics;
    if (n.filter)
        require(n.filter_cutoff >= 1 && n.filter_cutoff <= c.order, "numerics.filter_cutoff must lie in 1..order");
    if (n.filter)
        require(n.filter_strength > 0.0 && n.filter_strength <= 1.0, "numerics.filter_strength must lie in (0, 1]");
    require(n.velocity_tol > 0.0, "numerics.velocity_tol must be positive");
    require(n.pressure_tol > 0.0, "numerics.pressure_tol must be positive");
    require(n.temperature_tol > 0.0, "numerics.temperature_tol must be positive");
    require(n.projection_depth >= 0, "numerics.projection_depth must be non-negative");
    require(n.max_iterations > 0, "numerics.max_iterations must be positive");
    require(n.cfl_limit > 0.0, "numerics.cfl_limit must be positive");
    require(c.snapshot_every >= 0, "output.snapshot_every must be non-negative");
    require(c.probe_every >= 1, "output.probe_every must be positive");
    if (c.kind == CaseKind::TaylorGreen || c.kind == CaseKind::Kovasznay)
        require(c.box.dim == 2, "mesh.dim must be 2 for case " + case_name(c.kind));
}

}  // namespace sem
