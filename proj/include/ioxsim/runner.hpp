// runner.hpp: one function per scan kind. Each writes its CSV files (and
// optional gnuplot scripts) into the configured directory and reports the
// internal numerical checks it ran.

#pragma once

#include "ioxsim/config.hpp"

#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace ioxsim {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool passed = false;
};

struct RunReport {
    std::vector<std::filesystem::path> files;
    std::vector<CheckResult> checks;

    bool ok() const;
    void add_check(std::string name, double value, double bound);
};

// Fixed-width-free, locale-independent "%.17g" formatting.
std::string format_number(double x);

// Minimal CSV writer: one header line, then rows of numbers or strings.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;
    ~CsvWriter();

    void row(std::initializer_list<double> values);
    void row(const std::vector<std::string>& cells);

private:
    std::FILE* file_ = nullptr;
    std::size_t columns_ = 0;
};

RunReport run_dispersion(const RunConfig& cfg, unsigned threads = 0);
RunReport run_spectrum(const RunConfig& cfg, unsigned threads = 0);
RunReport run_dynamics(const RunConfig& cfg, unsigned threads = 0);
RunReport run_ep_bic(const RunConfig& cfg, unsigned threads = 0);
RunReport run_absorption(const RunConfig& cfg, unsigned threads = 0);
RunReport run_oracle_compare(const RunConfig& cfg, unsigned threads = 0);

// Dispatch on cfg.scan.kind.
RunReport run(const RunConfig& cfg, unsigned threads = 0);

}  // namespace ioxsim
