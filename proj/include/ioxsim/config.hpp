// config.hpp: JSON run configuration for the ioxsim command-line tool.

#pragma once

#include "ioxsim/bath_kernel.hpp"
#include "ioxsim/params.hpp"
#include "ioxsim/spectra.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ioxsim {

// Raised for malformed or inconsistent configuration files. The message
// carries the file name and, when it can be located, the line number.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScanKind { Dispersion, Spectrum, Dynamics, EpBic, Absorption, OracleCompare };

std::string to_string(ScanKind kind);
std::optional<ScanKind> parse_scan_kind(const std::string& name);

struct BathConfig {
    double c_light = 1.0;
    double omega_min = 500.0;
    double omega_max = 1500.0;
    std::optional<double> kappa_c;   // derived from the system rates when absent
    std::optional<double> kappa_x;
    std::size_t modes = 4000;
    double taper_fraction = 0.05;
};

struct ScanConfig {
    ScanKind kind = ScanKind::Dispersion;
    std::vector<double> k_grid{0.0};
    std::vector<double> omega_grid;          // measured from eps0; empty = default window
    std::vector<double> t_grid;
    std::vector<double> delta_over_bic;      // optional detuning sweep in units of the BiC detuning
    InputOccupation occupation;
    cplx initial_c{0.0, 0.0};
    cplx initial_x{1.0, 0.0};
    double max_deviation = 0.05;             // oracle-compare bound on the spectrum misfit
};

struct OutputConfig {
    std::filesystem::path directory = "out";
    bool csv = true;
    bool gnuplot = false;
};

struct RunConfig {
    SystemParams system;
    std::optional<BathConfig> bath;
    ScanConfig scan;
    OutputConfig output;
    std::string source;   // file name used in messages
};

// Parse and validate. Unknown keys, wrong types, empty or non-increasing
// grids and invalid parameters raise ConfigError.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// The BathSpec realizing the configured bath at momentum k, with couplings
// taken from the system rates when the config leaves them out.
BathSpec make_bath(const RunConfig& cfg, double k);

}  // namespace ioxsim
