#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "sem/io.hpp"
#include "sem/operators.hpp"

using namespace sem;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

const fs::path root = fs::temp_directory_path() / ("sem_cli_" + std::to_string(::getpid()));

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome sem_cli(const std::string& args) {
    fs::create_directories(root);
    const fs::path out = root / "stdout.txt", err = root / "stderr.txt";
    const std::string cmd = std::string(SEM_EXE) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text(out), read_text(err)};
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::create_directories(root);
    const fs::path p = root / name;
    std::ofstream(p) << text;
    return p;
}

Discretization periodic_square(int cells, int order) {
    BoxSpec s;
    s.dim = 2;
    s.counts = {cells, cells, 1};
    s.hi = {2.0 * pi, 2.0 * pi, 1.0};
    s.periodic = {true, true, false};
    return Discretization(build_box_mesh(s, order));
}

// Snapshots of u = cos(k x - phase), v = 0 over one period of the phase.
void write_wave(const fs::path& dir, int count) {
    fs::create_directories(dir);
    const Discretization d = periodic_square(4, 8);
    for (int m = 0; m < count; ++m) {
        const double phase = 2.0 * pi * m / count;
        std::vector<Field> f{d.interpolate([&](const Point& x) { return std::cos(2.0 * x[0] - phase); }), d.zeros(),
                             d.zeros()};
        const auto h = make_header(d.mesh(), 3, 0.1 * m, static_cast<std::uint64_t>(m));
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%06d.semk", m);
        write_snapshot((dir / name).string(), h, f);
    }
}

double number_after(const std::string& text, const std::string& label) {
    const auto at = text.find(label);
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + label.size()));
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
    std::size_t n = 0;
    if (!fs::exists(dir)) return 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
    return n;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(sem_cli("").code == 1);
    CHECK(sem_cli("frobnicate").code == 1);
    CHECK(sem_cli("run").code == 1);
    CHECK(sem_cli("pod --snapshots x --modes -2").code == 1);
    CHECK(sem_cli("--help").code == 0);
}

TEST_CASE("run taylor_green reports the analytic error") {
    const auto cfg = write_config("tg.cfg", "[case]\nname = taylor_green\nanalytic_error = on\n[output]\nsnapshot_every = 500\n");
    const Outcome r = sem_cli("run --config " + cfg.string() + " --out " + (root / "tg").string());
    REQUIRE(r.code == 0);
    const double err = number_after(r.out, "max velocity error: ");
    CHECK(err <= 1e-6);
    CHECK(count_files(root / "tg", ".semk") == 3);
    CHECK(fs::exists(root / "tg" / "probes.csv"));
    const std::string summary = read_text(root / "tg" / "summary.json");
    CHECK(summary.find("\"pressure_iterations\"") != std::string::npos);
    CHECK(summary.find("\"cfl\"") != std::string::npos);
    CHECK(summary.find("\"wall_time_seconds\"") != std::string::npos);

    const CsvTable probes = read_csv((root / "tg" / "probes.csv").string());
    CHECK(probes.columns == std::vector<std::string>{"time", "u_0", "v_0", "p_0"});
    CHECK(probes.rows.size() == 1001);
}

TEST_CASE("invalid configs exit with 2 and name the field") {
    const auto cfg = write_config("neg.cfg", "[case]\nname = taylor_green\n[physics]\nviscosity = -0.01\n");
    const Outcome r = sem_cli("run --config " + cfg.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("physics.viscosity") != std::string::npos);
    CHECK(r.err.find(":4:") != std::string::npos);
}

TEST_CASE("missing files exit with 4") {
    CHECK(sem_cli("run --config " + (root / "absent.cfg").string()).code == 4);
    CHECK(sem_cli("pod --snapshots '" + (root / "absent_*.semk").string() + "'").code == 4);
    CHECK(sem_cli("stats --csv " + (root / "absent.csv").string() + " --column u_0").code == 4);
}

TEST_CASE("snapshot cadence 0 writes no snapshots") {
    const auto cfg = write_config("nosnap.cfg", "[case]\nname = custom-box\n[mesh]\norder = 4\n[time]\nend_time = 0.01\n[output]\nsnapshot_every = 0\n");
    const Outcome r = sem_cli("run --config " + cfg.string() + " --out " + (root / "nosnap").string());
    CHECK(r.code == 0);
    CHECK(count_files(root / "nosnap", ".semk") == 0);
    CHECK(fs::exists(root / "nosnap" / "probes.csv"));
}

TEST_CASE("CFL abort is a numerical failure") {
    const auto cfg = write_config("cfl.cfg",
                                  "[case]\nname = taylor_green\n[time]\ndt = 0.5\nend_time = 1\n[numerics]\ncfl_action = abort\n");
    const Outcome r = sem_cli("run --config " + cfg.string() + " --out " + (root / "cfl").string());
    CHECK(r.code == 3);
    CHECK(r.err.find("CFL") != std::string::npos);
}

TEST_CASE("identical runs give identical files") {
    const auto cfg = write_config("det.cfg", "[case]\nname = custom-box\nperturbation = 0.05\nseed = 9\n[mesh]\norder = 5\n"
                                             "[time]\nend_time = 0.02\n[output]\nsnapshot_every = 5\nprobes = 0.3 0.4; 0.7 0.2\n");
    REQUIRE(sem_cli("run --config " + cfg.string() + " --out " + (root / "det_a").string()).code == 0);
    REQUIRE(sem_cli("run --config " + cfg.string() + " --out " + (root / "det_b").string()).code == 0);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(root / "det_a")) {
        if (e.path().filename() == "summary.json") continue;
        CHECK(read_text(e.path()) == read_text(root / "det_b" / e.path().filename()));
        ++compared;
    }
    CHECK(compared == 6);  // five snapshots and the probe table
}

TEST_CASE("pod on a traveling wave reports the leading pair") {
    write_wave(root / "wave", 64);
    const std::string glob = "'" + (root / "wave" / "snapshot_*.semk").string() + "'";
    const Outcome r = sem_cli("pod --snapshots " + glob + " --modes 4 --out " + (root / "pod_none").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("pair (1,2)") != std::string::npos);
    CHECK(count_files(root / "pod_none", ".semk") == 4);
    const CsvTable eig = read_csv((root / "pod_none" / "eigenvalues.csv").string());
    REQUIRE(eig.rows.size() == 64);
    CHECK(std::abs(eig.rows[0][1] - eig.rows[1][1]) <= 0.01 * eig.rows[0][1]);
    const CsvTable coef = read_csv((root / "pod_none" / "coefficients.csv").string());
    CHECK(coef.rows.size() == 64);
    CHECK(coef.columns.size() == 5);

    const Snapshot mode = read_snapshot((root / "pod_none" / "mode_001.semk").string());
    CHECK(mode.header.field_count == 2);

    SUBCASE("a full-domain clip changes nothing") {
        const Outcome c = sem_cli("pod --snapshots " + glob + " --clip box:0,6.2832,0,6.2832 --modes 4 --out " +
                                  (root / "pod_full").string());
        REQUIRE(c.code == 0);
        CHECK(read_text(root / "pod_full" / "eigenvalues.csv") == read_text(root / "pod_none" / "eigenvalues.csv"));
    }
    SUBCASE("malformed clips are usage errors") {
        CHECK(sem_cli("pod --snapshots " + glob + " --clip box:0,1,0").code == 1);
        CHECK(sem_cli("pod --snapshots " + glob + " --clip circle:1").code == 1);
    }
}

TEST_CASE("pod of two identical snapshots is rank one") {
    const fs::path dir = root / "twin";
    fs::create_directories(dir);
    const Discretization d = periodic_square(2, 4);
    const std::vector<Field> f{d.interpolate([](const Point& x) { return std::sin(x[0]) + 0.5; }),
                               d.interpolate([](const Point& x) { return std::cos(x[1]); })};
    for (const char* name : {"a.semk", "b.semk"}) write_snapshot((dir / name).string(), make_header(d.mesh(), 2, 0.0, 0), f);
    const Outcome r = sem_cli("pod --snapshots '" + (dir / "*.semk").string() + "' --keep-mean --modes 2 --out " +
                              (root / "twin_out").string());
    REQUIRE(r.code == 0);
    CHECK(number_after(r.out, "lambda_2/lambda_1 = ") <= 1e-12);

    const Outcome centred = sem_cli("pod --snapshots '" + (dir / "*.semk").string() + "' --out " + (root / "twin_c").string());
    CHECK(centred.code == 0);
    CHECK(centred.out.find("undefined") != std::string::npos);
}

TEST_CASE("pod rejects incompatible snapshots") {
    const fs::path dir = root / "mixed";
    fs::create_directories(dir);
    const Discretization a = periodic_square(2, 4), b = periodic_square(2, 5);
    write_snapshot((dir / "a.semk").string(), make_header(a.mesh(), 2, 0, 0), std::vector<Field>{a.zeros(), a.zeros()});
    write_snapshot((dir / "b.semk").string(), make_header(b.mesh(), 2, 0, 0), std::vector<Field>{b.zeros(), b.zeros()});
    CHECK(sem_cli("pod --snapshots '" + (dir / "*.semk").string() + "'").code == 4);
    CHECK(sem_cli("pod --snapshots '" + (dir / "a.semk").string() + "'").code == 4);
}

TEST_CASE("stats prints moments and writes the autocorrelation") {
    const int n = 4000;
    CsvTable t{{"time", "cosine", "flat"}, {}};
    for (int i = 0; i < n; ++i) t.rows.push_back({i * 1.0, std::cos(2.0 * pi * i / 50.0), 2.0});
    fs::create_directories(root);
    write_csv((root / "series.csv").string(), t);
    const Outcome r = sem_cli("stats --csv " + (root / "series.csv").string() + " --column cosine --max-lag 60 --out " +
                              (root / "stats").string());
    REQUIRE(r.code == 0);
    CHECK(std::abs(number_after(r.out, "mean")) < 1e-12);
    CHECK(number_after(r.out, "rms") == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(number_after(r.out, "kurtosis") == doctest::Approx(1.5).epsilon(1e-6));
    const CsvTable rho = read_csv((root / "stats" / "autocorrelation.csv").string());
    REQUIRE(rho.rows.size() == 61);
    CHECK(rho.rows[0][1] == doctest::Approx(1.0));
    // full-length normalization: rho(tau) = (1 - tau/n) cos(2 pi tau / P) exactly when P divides n
    CHECK(rho.rows[50][1] == doctest::Approx(1.0 - 50.0 / n).epsilon(1e-9));

    CHECK(sem_cli("stats --csv " + (root / "series.csv").string() + " --column flat").code == 3);
    CHECK(sem_cli("stats --csv " + (root / "series.csv").string() + " --column w_9").code == 4);
    CHECK(sem_cli("stats --csv " + (root / "series.csv").string() + " --column cosine --max-lag 5000").code == 1);
}

TEST_CASE("convergence driver") {
    const auto diffusion = write_config("diff.cfg", "[case]\nname = diffusion\n[time]\nend_time = 0.01\n");
    const Outcome one = sem_cli("convergence --config " + diffusion.string() + " --sweep N=6 --out " + (root / "conv1").string());
    REQUIRE(one.code == 0);
    CHECK(one.out.find("no fit") != std::string::npos);
    CHECK(read_csv((root / "conv1" / "convergence.csv").string()).rows.size() == 1);

    const Outcome two = sem_cli("convergence --config " + diffusion.string() + " --sweep N=2:2:6 --out " + (root / "conv2").string());
    REQUIRE(two.code == 0);
    CHECK(two.out.find("fitted decay rate") != std::string::npos);

    const auto lid = write_config("lidc.cfg", "[case]\nname = lid_cavity\n");
    CHECK(sem_cli("convergence --config " + lid.string() + " --sweep N=4").code == 2);
    CHECK(sem_cli("convergence --config " + diffusion.string() + " --sweep M=4").code == 1);
}

TEST_CASE("cleanup") { fs::remove_all(root); }
