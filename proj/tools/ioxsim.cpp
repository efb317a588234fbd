// ioxsim: command-line front end for scans and the acceptance suite.
//
//   ioxsim <subcommand> --config <path> [--out <dir>] [--threads N]
//
// Exit codes: 0 ok, 2 configuration error, 3 failed numerical check.

#include "ioxsim/acceptance.hpp"
#include "ioxsim/config.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run_scan(const std::string& subcommand, const std::string& config_path, const std::string& out_dir,
             unsigned threads) {
    ioxsim::RunConfig cfg;
    try {
        cfg = ioxsim::load_config(config_path);
    } catch (const ioxsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (ioxsim::to_string(cfg.scan.kind) != subcommand) {
        std::cerr << "config error: " << config_path << ": scan.kind is '" << ioxsim::to_string(cfg.scan.kind)
                  << "' but the subcommand is '" << subcommand << "'\n";
        return kExitConfig;
    }
    if (!out_dir.empty()) {
        cfg.output.directory = out_dir;
    }

    ioxsim::RunReport report;
    try {
        report = ioxsim::run(cfg, threads);
    } catch (const ioxsim::DomainError& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const ioxsim::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    for (const auto& f : report.files) {
        std::cout << "wrote " << f.string() << "\n";
    }
    for (const auto& c : report.checks) {
        std::cout << (c.passed ? "ok    " : "FAIL  ") << c.name << " = " << ioxsim::format_number(c.value)
                  << " (bound " << ioxsim::format_number(c.bound) << ")\n";
    }
    return report.ok() ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ioxsim: light-matter coupling through a common photonic environment"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned threads = 0;
    int only = 0;

    const char* scans[][2] = {
        {"dispersion", "complex branches and power spectrum map over k"},
        {"spectrum", "power spectra, optionally swept in detuning"},
        {"dynamics", "photon and exciton amplitudes in time"},
        {"ep-bic", "exceptional point and bound state conditions"},
        {"absorption", "absorption and reflection maps with loss channels"},
        {"oracle-compare", "discretized-bath oracle against the memoryless model"},
    };
    for (const auto& s : scans) {
        CLI::App* sub = app.add_subcommand(s[0], s[1]);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    }
    CLI::App* acc = app.add_subcommand("acceptance", "run the acceptance suite");
    acc->add_option("--config", config_path, "ignored; accepted for a uniform interface");
    acc->add_option("--out", out_dir, "ignored");
    acc->add_option("--threads", threads, "ignored");
    acc->add_option("--only", only, "run a single criterion (1-8)")->check(CLI::Range(0, 8));

    CLI11_PARSE(app, argc, argv);

    if (acc->parsed()) {
        const auto results = ioxsim::run_acceptance(std::cout, ioxsim::seed_from_env(), only);
        for (const auto& r : results) {
            if (!r.passed) {
                return kExitNumerical;
            }
        }
        return kExitOk;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    return run_scan(name, config_path, out_dir, threads);
}
