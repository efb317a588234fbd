#include <doctest.h>

#include "ioxsim/config.hpp"
#include "ioxsim/core_model.hpp"

#include <cmath>
#include <string>

using namespace ioxsim;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "test.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config takes the defaults") {
    const auto cfg = parse_config(R"({"system": {}, "scan": {"kind": "dispersion"}})");
    CHECK(cfg.system.eps0 == 1000.0);
    CHECK(cfg.system.gamma_c == 1.0);
    CHECK(cfg.scan.kind == ScanKind::Dispersion);
    CHECK(cfg.scan.k_grid == std::vector<double>{0.0});
    CHECK(cfg.scan.omega_grid.empty());
    CHECK_FALSE(cfg.bath.has_value());
    CHECK(cfg.output.directory == "out");
    CHECK(cfg.output.csv);
    CHECK_FALSE(cfg.output.gnuplot);
}

TEST_CASE("scan kinds round trip") {
    for (auto kind : {ScanKind::Dispersion, ScanKind::Spectrum, ScanKind::Dynamics, ScanKind::EpBic,
                      ScanKind::Absorption, ScanKind::OracleCompare}) {
        CHECK(parse_scan_kind(to_string(kind)) == kind);
    }
    CHECK(to_string(ScanKind::EpBic) == "ep-bic");
    CHECK(to_string(ScanKind::OracleCompare) == "oracle-compare");
    CHECK_FALSE(parse_scan_kind("heatmap").has_value());
}

TEST_CASE("full config") {
    const auto cfg = parse_config(R"({
      "system": {"eps0": 800, "delta": 3, "g_rabi": 0.5, "mass_ratio": 0.1, "gamma_c": 1,
                 "gamma_x": 1.8, "gamma_nr_c": 0.15, "gamma_nr_x": 0.1},
      "bath": {"c_light": 2, "omega_min": 400, "omega_max": 1200, "kappa_c": 0.3, "modes": 3000,
               "taper_fraction": 0.1},
      "scan": {"kind": "spectrum", "k_grid": {"start": 0, "stop": 1, "points": 5},
               "omega_grid": [-1, 0, 2], "t_grid": {"start": 0, "stop": 10, "points": 11},
               "input_occupation": {"omega": [-5, 5], "n": [0, 2]},
               "initial": {"c": [0.5, 0.5], "x": 0}},
      "output": {"directory": "results", "formats": ["csv", "gnuplot"]}
    })");
    CHECK(cfg.system.eps0 == 800.0);
    CHECK(cfg.system.mass_ratio == 0.1);
    CHECK(cfg.system.gamma_nr_x == 0.1);
    REQUIRE(cfg.bath.has_value());
    CHECK(cfg.bath->c_light == 2.0);
    CHECK(cfg.bath->kappa_c == 0.3);
    CHECK_FALSE(cfg.bath->kappa_x.has_value());
    CHECK(cfg.bath->modes == 3000);
    CHECK(cfg.scan.k_grid.size() == 5);
    CHECK(cfg.scan.k_grid[2] == doctest::Approx(0.5));
    CHECK(cfg.scan.omega_grid == std::vector<double>{-1.0, 0.0, 2.0});
    CHECK(cfg.scan.t_grid.back() == doctest::Approx(10.0));
    // occupation abscissae are measured from eps0
    CHECK(cfg.scan.occupation(800.0) == doctest::Approx(1.0));
    CHECK(cfg.scan.occupation(805.0) == doctest::Approx(2.0));
    CHECK(cfg.scan.initial_c == cplx(0.5, 0.5));
    CHECK(cfg.scan.initial_x == cplx(0.0));
    CHECK(cfg.output.directory == "results");
    CHECK(cfg.output.csv);
    CHECK(cfg.output.gnuplot);

    // couplings missing from the bath block follow the system rates
    const auto b = make_bath(cfg, 0.0);
    CHECK(b.kappa_c == 0.3);
    CHECK(b.kappa_x > 0.0);
}

TEST_CASE("detuning given in units of the bound-state detuning") {
    const auto cfg = parse_config(
        R"({"system": {"g_rabi": 3, "gamma_c": 1, "gamma_x": 0.3, "delta_over_bic": 0.5},
            "scan": {"kind": "spectrum"}})");
    CHECK(cfg.system.delta == doctest::Approx(0.5 * 2.1 / std::sqrt(0.3)));

    CHECK(contains(error_of(R"({"system": {"delta": 1, "delta_over_bic": 1}, "scan": {"kind": "spectrum"}})"),
                   "not both"));
    // undefined without exciton radiative decay
    CHECK_FALSE(error_of(R"({"system": {"gamma_x": 0, "delta_over_bic": 1}, "scan": {"kind": "spectrum"}})")
                    .empty());
}

TEST_CASE("unknown keys are reported with their line") {
    const std::string text = "{\n  \"system\": {\n    \"delta\": 1.0,\n    \"gama_x\": 2.0\n  },\n"
                             "  \"scan\": {\"kind\": \"dispersion\"}\n}\n";
    const auto msg = error_of(text);
    CHECK(contains(msg, "test.json:4"));
    CHECK(contains(msg, "gama_x"));

    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion"}, "extra": 1})"), "extra"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion", "kgrid": [0]}})"), "kgrid"));
}

TEST_CASE("malformed configs") {
    CHECK(contains(error_of("{\"system\": {}, \n \"scan\": {\"kind\": }}"), "test.json"));
    CHECK(contains(error_of(R"({"scan": {"kind": "dispersion"}})"), "system"));
    CHECK(contains(error_of(R"({"system": {}})"), "scan"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "heatmap"}})"), "heatmap"));
    CHECK(contains(error_of(R"({"system": {"gamma_c": "one"}, "scan": {"kind": "dispersion"}})"), "gamma_c"));
    CHECK(contains(error_of(R"({"system": {"gamma_c": -1}, "scan": {"kind": "dispersion"}})"), "gamma_c"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion", "k_grid": []}})"), "k_grid"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion", "k_grid": [1, 0]}})"),
                   "strictly increasing"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion",
                                "k_grid": {"start": 0, "stop": 1, "points": 0}}})"),
                   "k_grid"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion",
                                "k_grid": {"start": 0, "stop": 1}}})"),
                   "points"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion"},
                                "output": {"formats": ["png"]}})"),
                   "png"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion"},
                                "output": {"formats": ["gnuplot"]}})"),
                   "csv"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dynamics"}})"), "t_grid"));
    CHECK(contains(error_of(R"({"system": {}, "scan": {"kind": "dispersion", "input_occupation": -1}})"),
                   "input_occupation"));
    CHECK(contains(error_of(R"({"system": {}, "bath": {"c_light": 0}, "scan": {"kind": "oracle-compare"}})"),
                   "c_light"));
}

TEST_CASE("load_config reports missing files") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/config.json"), ConfigError);
}
