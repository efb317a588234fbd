#include <doctest.h>

#include "ioxsim/config.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace ioxsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ioxsim_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// CSV as a header-indexed table of numbers.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        FAIL("missing column " << name);
        return 0;
    }
    double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

Table read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    Table t;
    std::string line;
    std::getline(in, line);
    t.header = split(line);
    while (std::getline(in, line)) {
        t.rows.push_back(split(line));
    }
    return t;
}

RunConfig bundled(const std::string& name, const fs::path& out) {
    RunConfig cfg = load_config(fs::path(IOXSIM_CONFIG_DIR) / name);
    cfg.output.directory = out;
    return cfg;
}

void require_clean(const RunReport& r) {
    for (const auto& c : r.checks) {
        INFO(c.name << " = " << c.value << " (bound " << c.bound << ")");
        CHECK(c.passed);
    }
    CHECK(r.ok());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + IOXSIM_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("number formatting is exact and locale free") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(3.0) == "3");
    CHECK(std::stod(format_number(-2.5e-300)) == -2.5e-300);
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("csv writer") {
    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    {
        CsvWriter w(dir / "a.csv", {"x", "y"});
        w.row({1.0, 0.5});
        w.row(std::vector<std::string>{"ep", "2"});
        CHECK_THROWS(w.row({1.0}));
    }
    CHECK(slurp(dir / "a.csv") == "x,y\n1,0.5\nep,2\n");
}

TEST_CASE("check bookkeeping") {
    RunReport r;
    r.add_check("small", 1e-13, 1e-12);
    CHECK(r.ok());
    r.add_check("nan", std::numeric_limits<double>::quiet_NaN(), 1.0);
    CHECK_FALSE(r.checks.back().passed);
    CHECK_FALSE(r.ok());
}

TEST_CASE("dispersion with attraction") {
    const fs::path out = scratch("dispersion3");
    const auto report = run(bundled("dispersion_delta3.json", out));
    require_clean(report);
    CHECK(fs::exists(out / "power_map.csv"));
    CHECK(fs::exists(out / "dispersion.gp"));
    const Table t = read_csv(out / "branches.csv");
    REQUIRE(t.rows.size() == 121);
    // k = 0 is row 60; negative curvature of the lower branch there
    const double h = t.num(61, "k") - t.num(60, "k");
    const double curvature = (t.num(61, "re_lower") - 2.0 * t.num(60, "re_lower") + t.num(59, "re_lower")) / (h * h);
    CHECK(std::abs(t.num(60, "k")) < 1e-12);
    CHECK(curvature < 0.0);
    const Table map = read_csv(out / "power_map.csv");
    CHECK(map.rows.size() == 121u * 501u);
}

TEST_CASE("dispersion at smaller detuning has its lower maxima away from k = 0") {
    const fs::path out = scratch("dispersion2");
    require_clean(run(bundled("dispersion_delta2.json", out)));
    const Table t = read_csv(out / "branches.csv");
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < t.rows.size(); ++i) {
        const double a = t.num(i - 1, "re_lower");
        const double b = t.num(i, "re_lower");
        const double c = t.num(i + 1, "re_lower");
        if (b > a && b > c) {
            maxima.push_back(t.num(i, "k"));
        }
    }
    REQUIRE(maxima.size() == 2);
    CHECK(maxima[0] < -0.1);
    CHECK(maxima[1] > 0.1);
    CHECK(maxima[0] == doctest::Approx(-maxima[1]));
}

TEST_CASE("no environment gives the bare dispersions") {
    const fs::path out = scratch("bare");
    RunConfig cfg = parse_config(R"({"system": {"delta": 1, "gamma_c": 0, "gamma_x": 0},
                                     "scan": {"kind": "dispersion", "k_grid": [0, 0.5, 1, 1.5]}})");
    cfg.output.directory = out;
    require_clean(run(cfg));
    const Table t = read_csv(out / "branches.csv");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double lo = std::min(t.num(i, "bare_photon"), t.num(i, "bare_exciton"));
        const double hi = std::max(t.num(i, "bare_photon"), t.num(i, "bare_exciton"));
        CHECK(t.num(i, "re_lower") == doctest::Approx(lo).epsilon(1e-14));
        CHECK(t.num(i, "re_upper") == doctest::Approx(hi).epsilon(1e-14));
        CHECK(t.num(i, "im_lower") == 0.0);
    }
}

TEST_CASE("spectrum sweep towards the bound state") {
    const fs::path out = scratch("spectrum");
    require_clean(run(bundled("spectrum_bic_sweep.json", out)));
    const Table modes = read_csv(out / "spectrum_modes.csv");
    REQUIRE(modes.rows.size() == 5);
    for (std::size_t i = 1; i < modes.rows.size(); ++i) {
        CHECK(std::abs(modes.num(i, "im_lower")) < std::abs(modes.num(i - 1, "im_lower")));
        CHECK(modes.num(i, "intensity_at_re_lower") > modes.num(i - 1, "intensity_at_re_lower"));
    }
    CHECK(read_csv(out / "spectrum.csv").rows.size() == 5u * 2401u);
}

TEST_CASE("dynamics at and near the bound state") {
    const fs::path out = scratch("dynamics");
    require_clean(run(bundled("dynamics_bic.json", out)));
    const Table t = read_csv(out / "dynamics.csv");
    const Table closed = read_csv(out / "bic_closed_form.csv");
    REQUIRE(closed.rows.size() == 401);
    CHECK(closed.num(400, "exciton_population") == doctest::Approx(1.0 / 1.69).epsilon(1e-9));
    // last sample of each detuning: population left grows towards the bound state
    std::map<double, double> last;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i][t.column("method")] == "analytic") {
            last[t.num(i, "delta_over_bic")] = t.num(i, "exciton_population");
        }
    }
    REQUIRE(last.size() == 4);
    double previous = -1.0;
    for (const auto& [f, pop] : last) {
        CHECK(pop > previous);
        previous = pop;
    }
}

TEST_CASE("exceptional point and bound state locator") {
    const fs::path out = scratch("epbic");
    require_clean(run(bundled("ep_bic.json", out)));
    const Table t = read_csv(out / "ep_bic.csv");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "ep");
    CHECK(t.num(0, "d_eps_target") == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(t.num(0, "k_ring") == doctest::Approx(std::sqrt(2.0 * std::sqrt(2.0) - 1.0)));
    CHECK(t.rows[1][0] == "bic");
    CHECK(t.num(1, "d_eps_target") == doctest::Approx(0.5 * -1.0 / std::sqrt(2.0)));
}

TEST_CASE("absorption map") {
    const fs::path out = scratch("absorption");
    require_clean(run(bundled("absorption_delta3.json", out)));
    const Table t = read_csv(out / "absorption_map.csv");
    REQUIRE(t.rows.size() == 121u * 501u);
    for (std::size_t i = 0; i < t.rows.size(); i += 97) {
        const double a = t.num(i, "absorption");
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(a + t.num(i, "reflection") == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("oracle comparison") {
    const fs::path out = scratch("oracle");
    RunConfig cfg = bundled("oracle_compare.json", out);
    require_clean(run(cfg));
    const Table s = read_csv(out / "summary.csv");
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        CHECK(s.num(i, "passed") == 1.0);
    }
    const Table rates = read_csv(out / "oracle_rates.csv");
    CHECK(rates.num(0, "relative_error") < 0.02);

    cfg.scan.max_deviation = 1e-9;
    cfg.output.directory = scratch("oracle_strict");
    CHECK_FALSE(run(cfg).ok());
}

TEST_CASE("identical configs give byte-identical output") {
    const fs::path a = scratch("repeat_a");
    const fs::path b = scratch("repeat_b");
    const auto ra = run(bundled("absorption_delta2.json", a), 1);
    const auto rb = run(bundled("absorption_delta2.json", b), 4);
    REQUIRE(ra.files.size() == rb.files.size());
    for (const auto& f : ra.files) {
        CHECK(slurp(f) == slurp(b / f.filename()));
    }
    const auto da = run(bundled("dynamics_bic.json", a / "dyn"));
    const auto db = run(bundled("dynamics_bic.json", b / "dyn"));
    for (const auto& f : da.files) {
        CHECK(slurp(f) == slurp(b / "dyn" / f.filename()));
    }
}

TEST_CASE("command line exit codes") {
    const std::string cfg_dir = IOXSIM_CONFIG_DIR;
    const fs::path out = scratch("cli");
    CHECK(run_cli("ep-bic --config \"" + cfg_dir + "/ep_bic.json\" --out \"" + out.string() + "\"") == 0);
    CHECK(fs::exists(out / "ep_bic.csv"));

    // subcommand and scan kind disagree
    CHECK(run_cli("spectrum --config \"" + cfg_dir + "/ep_bic.json\" --out \"" + out.string() + "\"") == 2);
    // missing file
    CHECK(run_cli("spectrum --config /nonexistent.json") == 2);

    // unknown key
    const fs::path bad = out / "bad.json";
    std::ofstream(bad) << "{\n \"system\": {\"gama_x\": 1},\n \"scan\": {\"kind\": \"dispersion\"}\n}\n";
    CHECK(run_cli("dispersion --config \"" + bad.string() + "\"") == 2);

    // a failed internal check
    const fs::path strict = out / "strict.json";
    std::ofstream(strict) << R"({"system": {"delta": 3, "gamma_c": 1, "gamma_x": 1.8},
        "scan": {"kind": "oracle-compare", "omega_grid": {"start": -5, "stop": 5, "points": 11},
                 "max_deviation": 1e-12},
        "output": {"directory": ")" << (out / "strict").string() << R"("}})";
    CHECK(run_cli("oracle-compare --config \"" + strict.string() + "\"") == 3);

    // usage errors from the argument parser are nonzero
    CHECK(run_cli("dispersion") != 0);
    CHECK(run_cli("") != 0);
}

TEST_CASE("every bundled config runs cleanly") {
    for (const auto& entry : fs::directory_iterator(IOXSIM_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        INFO(entry.path().filename().string());
        RunConfig cfg = load_config(entry.path());
        cfg.output.directory = scratch("bundled") / entry.path().stem();
        CHECK(run(cfg, 0).ok());
    }
}
