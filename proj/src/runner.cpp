#include "ioxsim/runner.hpp"

#include "ioxsim/bath_kernel.hpp"
#include "ioxsim/bath_oracle.hpp"
#include "ioxsim/core_model.hpp"
#include "ioxsim/dynamics.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/spectra.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>

namespace ioxsim {

namespace fs = std::filesystem;

bool RunReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void RunReport::add_check(std::string name, double value, double bound) {
    checks.push_back({std::move(name), value, bound, value <= bound});
}

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const fs::path& path, std::initializer_list<std::string> header) : columns_(header.size()) {
    file_ = std::fopen(path.string().c_str(), "w");
    if (!file_) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    std::vector<std::string> cells(header);
    row(cells);
}

CsvWriter::~CsvWriter() {
    if (file_) {
        std::fclose(file_);
    }
}

void CsvWriter::row(std::initializer_list<double> values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) {
        cells.push_back(format_number(v));
    }
    row(cells);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
        throw std::logic_error("CsvWriter: row width does not match the header");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::fputs(cells[i].c_str(), file_);
        std::fputc(i + 1 == cells.size() ? '\n' : ',', file_);
    }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

fs::path prepare(const RunConfig& cfg, RunReport& report, const std::string& name) {
    fs::create_directories(cfg.output.directory);
    fs::path path = cfg.output.directory / name;
    report.files.push_back(path);
    return path;
}

void warn_if_not_markovian(const SystemParams& p) {
    if (p.markov_advisory()) {
        std::cerr << "warning: eps0 is less than 100x the largest rate or coupling; "
                     "the memoryless model may be inaccurate\n";
    }
}

std::vector<double> absolute_omega(const RunConfig& cfg, const SystemParams& p) {
    if (cfg.scan.omega_grid.empty()) {
        return default_omega_grid(p);
    }
    std::vector<double> w(cfg.scan.omega_grid);
    for (double& x : w) {
        x += p.eps0;
    }
    return w;
}

// (label value, parameters) for each detuning of an optional sweep
std::vector<std::pair<double, SystemParams>> detuning_sweep(const RunConfig& cfg) {
    std::vector<std::pair<double, SystemParams>> out;
    if (cfg.scan.delta_over_bic.empty()) {
        out.emplace_back(kNaN, cfg.system);
        return out;
    }
    const double d_bic = bic_condition(cfg.system).d_eps_bic;
    for (double f : cfg.scan.delta_over_bic) {
        SystemParams p = cfg.system;
        p.delta = f * d_bic;
        out.emplace_back(f, p);
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << text;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best] || std::isnan(v[best])) {
            best = i;
        }
    }
    return best;
}

}  // namespace

RunReport run_dispersion(const RunConfig& cfg, unsigned threads) {
    RunReport report;
    const SystemParams& p = cfg.system;
    warn_if_not_markovian(p);
    const TrackedBranches tb = track_branches(p, cfg.scan.k_grid);

    double nonfinite = 0.0;
    {
        CsvWriter csv(prepare(cfg, report, "branches.csv"),
                      {"k", "re_lower", "im_lower", "re_upper", "im_upper", "bare_photon", "bare_exciton"});
        for (std::size_t i = 0; i < tb.k.size(); ++i) {
            const KineticEnergies e = kinetic_energies(p, tb.k[i]);
            const cplx lo = tb.lower[i].omega;
            const cplx up = tb.upper[i].omega;
            if (!std::isfinite(std::abs(lo)) || !std::isfinite(std::abs(up))) {
                nonfinite += 1.0;
            }
            csv.row({tb.k[i], lo.real(), lo.imag(), up.real(), up.imag(), e.photon, e.exciton});
        }
    }
    report.add_check("nonfinite_branch_values", nonfinite, 0.0);

    const std::vector<double> omega = absolute_omega(cfg, p);
    const SpectrumGrid grid = compute_spectrum_grid(p, cfg.scan.k_grid, omega, SpectrumKind::Power,
                                                    cfg.scan.occupation, threads);
    {
        CsvWriter csv(prepare(cfg, report, "power_map.csv"), {"k", "omega", "intensity"});
        for (std::size_t ik = 0; ik < grid.k_values.size(); ++ik) {
            for (std::size_t iw = 0; iw < omega.size(); ++iw) {
                const std::size_t idx = ik * omega.size() + iw;
                csv.row({grid.k_values[ik], omega[iw],
                         grid.divergent[idx] ? std::numeric_limits<double>::infinity() : grid.intensity[idx]});
            }
        }
    }

    if (cfg.output.gnuplot) {
        write_text(prepare(cfg, report, "dispersion.gp"),
                   "set datafile separator ','\n"
                   "set xlabel 'k'\n"
                   "set ylabel 'omega'\n"
                   "set view map\n"
                   "set palette rgbformulae 33,13,10\n"
                   "set logscale cb\n"
                   "splot 'power_map.csv' every ::1 using 1:2:3 with pm3d notitle, \\\n"
                   "      'branches.csv' every ::1 using 1:2:(0) with lines lw 2 lc 'white' title 'Re omega_L', \\\n"
                   "      'branches.csv' every ::1 using 1:4:(0) with lines lw 2 lc 'white' title 'Re omega_U', \\\n"
                   "      'branches.csv' every ::1 using 1:6:(0) with lines dt 2 lc 'black' title 'photon', \\\n"
                   "      'branches.csv' every ::1 using 1:7:(0) with lines dt 2 lc 'black' title 'exciton'\n");
    }
    return report;
}

RunReport run_spectrum(const RunConfig& cfg, unsigned threads) {
    RunReport report;
    warn_if_not_markovian(cfg.system);
    const auto sweep = detuning_sweep(cfg);
    const std::vector<double> omega = absolute_omega(cfg, cfg.system);

    CsvWriter spec(prepare(cfg, report, "spectrum.csv"), {"delta_over_bic", "delta", "k", "omega", "intensity"});
    CsvWriter modes(prepare(cfg, report, "spectrum_modes.csv"),
                    {"delta_over_bic", "delta", "k", "re_lower", "im_lower", "re_upper", "im_upper",
                     "intensity_at_re_lower"});
    double worst_identity = 0.0;
    for (const auto& [label, p] : sweep) {
        const SpectrumGrid grid =
            compute_spectrum_grid(p, cfg.scan.k_grid, omega, SpectrumKind::Power, cfg.scan.occupation, threads);
        for (std::size_t ik = 0; ik < grid.k_values.size(); ++ik) {
            const double k = grid.k_values[ik];
            for (std::size_t iw = 0; iw < omega.size(); ++iw) {
                const std::size_t idx = ik * omega.size() + iw;
                if (grid.divergent[idx]) {
                    spec.row({label, p.delta, k, omega[iw], std::numeric_limits<double>::infinity()});
                    continue;
                }
                spec.row({label, p.delta, k, omega[iw], grid.intensity[idx]});
                const double r = power_absorption_residual(p, k, omega[iw], cfg.scan.occupation);
                worst_identity = std::max(worst_identity, r / std::max(1.0, grid.intensity[idx]));
            }
            const BranchPair br = eigen_branches(p, k);
            const auto at_lower = power_spectrum(p, k, br.lower.omega.real(), cfg.scan.occupation);
            modes.row({label, p.delta, k, br.lower.omega.real(), br.lower.omega.imag(), br.upper.omega.real(),
                       br.upper.omega.imag(), at_lower ? *at_lower : std::numeric_limits<double>::infinity()});
        }
    }
    report.add_check("power_absorption_identity", worst_identity, 1e-10);

    if (cfg.output.gnuplot) {
        write_text(prepare(cfg, report, "spectrum.gp"),
                   "set datafile separator ','\n"
                   "set xlabel 'omega'\n"
                   "set ylabel 'I'\n"
                   "plot 'spectrum.csv' every ::1 using 4:5 with lines notitle\n");
    }
    return report;
}

RunReport run_dynamics(const RunConfig& cfg, unsigned /*threads*/) {
    RunReport report;
    warn_if_not_markovian(cfg.system);
    const auto sweep = detuning_sweep(cfg);
    const auto& ts = cfg.scan.t_grid;
    const AmplitudeState initial{cfg.scan.initial_c, cfg.scan.initial_x, ts.front()};
    const bool bic_initial = cfg.scan.initial_c == cplx(0.0, 0.0) && cfg.scan.initial_x == cplx(1.0, 0.0);

    CsvWriter csv(prepare(cfg, report, "dynamics.csv"),
                  {"delta_over_bic", "delta", "k", "t", "re_c", "im_c", "re_x", "im_x", "photon_population",
                   "exciton_population", "method"});
    std::unique_ptr<CsvWriter> closed;
    double worst_ode = 0.0;
    double worst_closed = 0.0;
    for (const auto& [label, p] : sweep) {
        for (const double k : cfg.scan.k_grid) {
            const std::vector<AmplitudeState> ode = evolve_ode(p, k, initial, ts);
            const bool degenerate = eigen_branches(p, k).degenerate;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                AmplitudeState s = ode[i];
                std::string method = "ode";
                if (!degenerate) {
                    s = evolve_analytic(p, k, initial, ts[i]);
                    method = "analytic";
                    worst_ode = std::max({worst_ode, std::abs(s.c - ode[i].c), std::abs(s.x - ode[i].x)});
                }
                csv.row({format_number(label), format_number(p.delta), format_number(k), format_number(ts[i]),
                         format_number(s.c.real()), format_number(s.c.imag()), format_number(s.x.real()),
                         format_number(s.x.imag()), format_number(s.photon_population()),
                         format_number(s.exciton_population()), method});
            }

            // populations on the bound-state condition have a closed form
            bool on_bic = false;
            if (k == 0.0 && bic_initial && ts.front() == 0.0 && !p.has_nonradiative_loss() &&
                p.gamma_c * p.gamma_x > 0.0) {
                const double d_bic = bic_condition(p).d_eps_bic;
                on_bic = std::abs(p.delta - d_bic) <= kConditionTol * std::max(1.0, std::abs(d_bic));
            }
            if (on_bic && !degenerate) {
                if (!closed) {
                    closed = std::make_unique<CsvWriter>(prepare(cfg, report, "bic_closed_form.csv"),
                                                         std::initializer_list<std::string>{
                                                             "delta", "t", "photon_population", "exciton_population"});
                }
                for (const double t : ts) {
                    const BicPopulations b = bic_amplitudes(p, t);
                    const AmplitudeState a = evolve_analytic(p, 0.0, initial, t);
                    worst_closed = std::max({worst_closed, std::abs(b.photon - a.photon_population()),
                                             std::abs(b.exciton - a.exciton_population())});
                    closed->row({p.delta, t, b.photon, b.exciton});
                }
            }
        }
    }
    report.add_check("analytic_vs_ode_sup", worst_ode, 1e-8);
    if (closed) {
        report.add_check("bic_closed_form_vs_analytic", worst_closed, 1e-8);
    }

    if (cfg.output.gnuplot) {
        write_text(prepare(cfg, report, "dynamics.gp"),
                   "set datafile separator ','\n"
                   "set xlabel 't'\n"
                   "set ylabel 'population'\n"
                   "plot 'dynamics.csv' every ::1 using 4:10 with lines title '|x|^2', \\\n"
                   "     'dynamics.csv' every ::1 using 4:9 with lines title '|c|^2'\n");
    }
    return report;
}

RunReport run_ep_bic(const RunConfig& cfg, unsigned /*threads*/) {
    RunReport report;
    const SystemParams& p = cfg.system;
    CsvWriter csv(prepare(cfg, report, "ep_bic.csv"),
                  {"condition", "sign", "d_eps_target", "d_gamma_target", "k_ring", "condition_residual",
                   "relative_discriminant"});
    const Detunings det = detunings(p, 0.0);

    const std::vector<ExceptionalPoint> eps = ep_conditions(p);
    for (const ExceptionalPoint& ep : eps) {
        double rel_disc = kNaN;
        if (ep.k_ep) {
            const ComplexPole z = complex_poles(p, *ep.k_ep);
            const Detunings d = detunings(p, *ep.k_ep);
            const double scale = std::norm(cplx(d.d_eps, -d.d_gamma)) + 4.0 * std::norm(z.g_tilde);
            rel_disc = std::abs(discriminant(p, *ep.k_ep)) / scale;
            report.add_check("ep_relative_discriminant_sign" + std::to_string(ep.sign), rel_disc, kConditionTol);
        }
        csv.row({"ep", std::to_string(ep.sign), format_number(ep.d_eps_ep), format_number(ep.d_gamma_ep),
                 format_number(ep.k_ep.value_or(kNaN)), format_number(ep.condition_residual),
                 format_number(rel_disc)});
    }
    if (eps.empty()) {
        // report the targets even though the linewidths do not meet them
        const double root = 2.0 * std::sqrt(p.gamma_c * p.gamma_x);
        for (int sign : {+1, -1}) {
            const double target = -sign * 2.0 * p.g_rabi;
            csv.row({"ep_unreachable", std::to_string(sign), format_number(sign * root), format_number(target),
                     format_number(kNaN), format_number(std::abs(det.d_gamma - target)), format_number(kNaN)});
        }
    }

    if (p.gamma_c * p.gamma_x > 0.0) {
        const BicCondition bic = bic_condition(p);
        csv.row({"bic", bic.undamped_branch == Branch::Lower ? "lower" : "upper", format_number(bic.d_eps_bic),
                 format_number(det.d_gamma), format_number(bic.k_bic.value_or(kNaN)),
                 format_number(bic.residual_im), format_number(kNaN)});
        if (bic.exact) {
            report.add_check("bic_residual_linewidth", bic.residual_im,
                             kConditionTol * std::max(1.0, p.total_linewidth()));
        }
    }
    return report;
}

RunReport run_absorption(const RunConfig& cfg, unsigned threads) {
    RunReport report;
    const SystemParams& p = cfg.system;
    warn_if_not_markovian(p);
    const std::vector<double> omega = absolute_omega(cfg, p);
    const SpectrumGrid a = compute_spectrum_grid(p, cfg.scan.k_grid, omega, SpectrumKind::Absorption, {}, threads);
    const SpectrumGrid r = compute_spectrum_grid(p, cfg.scan.k_grid, omega, SpectrumKind::Reflection, {}, threads);
    const SpectrumGrid pw = compute_spectrum_grid(p, cfg.scan.k_grid, omega, SpectrumKind::Power, {}, threads);

    double out_of_range = 0.0;
    double worst_sum = 0.0;
    double worst_ridge = 0.0;
    {
        CsvWriter csv(prepare(cfg, report, "absorption_map.csv"), {"k", "omega", "absorption", "reflection", "power"});
        for (std::size_t ik = 0; ik < a.k_values.size(); ++ik) {
            for (std::size_t iw = 0; iw < omega.size(); ++iw) {
                const double av = a.at(ik, iw);
                const double rv = r.at(ik, iw);
                if (std::isfinite(av) && std::isfinite(rv)) {
                    out_of_range = std::max({out_of_range, -av, av - 1.0});
                    worst_sum = std::max(worst_sum, std::abs(av + rv - 1.0));
                }
                csv.row({a.k_values[ik], omega[iw], av, rv, pw.at(ik, iw)});
            }
        }
    }
    {
        CsvWriter csv(prepare(cfg, report, "ridges.csv"), {"k", "omega_absorption_max", "omega_power_max"});
        for (std::size_t ik = 0; ik < a.k_values.size(); ++ik) {
            const std::size_t ia = argmax(a.row(ik));
            const std::size_t ip = argmax(pw.row(ik));
            worst_ridge = std::max(worst_ridge, std::abs(static_cast<double>(ia) - static_cast<double>(ip)));
            csv.row({a.k_values[ik], omega[ia], omega[ip]});
        }
    }
    report.add_check("absorption_outside_unit_interval", std::max(out_of_range, 0.0), 1e-12);
    report.add_check("reflection_plus_absorption_minus_one", worst_sum, 1e-12);
    report.add_check("ridge_offset_grid_steps", worst_ridge, 1.0);

    if (cfg.output.gnuplot) {
        write_text(prepare(cfg, report, "absorption.gp"),
                   "set datafile separator ','\n"
                   "set xlabel 'k'\n"
                   "set ylabel 'omega'\n"
                   "set view map\n"
                   "set cbrange [0:1]\n"
                   "splot 'absorption_map.csv' every ::1 using 1:2:3 with pm3d notitle\n");
    }
    return report;
}

RunReport run_oracle_compare(const RunConfig& cfg, unsigned threads) {
    RunReport report;
    const double k = cfg.scan.k_grid.front();
    const BathConfig bc = cfg.bath.value_or(BathConfig{});
    const BathSpec b = make_bath(cfg, k);
    const SystemParams p = with_bath_rates(cfg.system, b, k);
    const DiscretizedBath d = discretize_bath(b, k, {bc.modes, bc.taper_fraction});
    check_oracle_preconditions(d, p);
    const OracleEigensystem e = diagonalize(d, p);
    const double eta = 2.0 * d.spacing;

    const std::vector<double> omega = absolute_omega(cfg, p);
    std::vector<double> oracle(omega.size());
    detail::parallel_for(omega.size(), threads, [&](std::size_t i) {
        oracle[i] = oracle_spectrum(e, std::span<const double>(&omega[i], 1), eta)[0];
    });
    const std::vector<double> model = broadened_model_spectrum(p, k, omega, eta);
    double peak = 0.0;
    double worst = 0.0;
    {
        CsvWriter csv(prepare(cfg, report, "oracle_compare.csv"),
                      {"omega", "oracle", "model_broadened", "model"});
        for (std::size_t i = 0; i < omega.size(); ++i) {
            const auto exact = power_spectrum(p, k, omega[i]);
            csv.row({omega[i], oracle[i], model[i], exact ? *exact : std::numeric_limits<double>::infinity()});
            peak = std::max(peak, model[i]);
            worst = std::max(worst, std::abs(oracle[i] - model[i]));
        }
    }

    const MarkovRates markov = markov_rates(b, k, p.eps0);
    const Eigen::Matrix2d damping = extract_damping(e, p.eps0, eta);
    auto rel = [](double a, double ref) { return ref == 0.0 ? std::abs(a) : std::abs(a - ref) / std::abs(ref); };
    const double err_c = rel(damping(0, 0), markov.gamma_c);
    const double err_x = rel(damping(1, 1), markov.gamma_x);
    const double err_cross = rel(damping(0, 1), markov.cross);
    {
        CsvWriter csv(prepare(cfg, report, "oracle_rates.csv"), {"quantity", "oracle", "markov", "relative_error"});
        csv.row({"gamma_c", format_number(damping(0, 0)), format_number(markov.gamma_c), format_number(err_c)});
        csv.row({"gamma_x", format_number(damping(1, 1)), format_number(markov.gamma_x), format_number(err_x)});
        csv.row({"cross", format_number(damping(0, 1)), format_number(markov.cross), format_number(err_cross)});
    }
    report.add_check("spectrum_max_deviation_over_peak", worst / peak, cfg.scan.max_deviation);
    report.add_check("gamma_c_relative_error", err_c, 0.02);
    report.add_check("gamma_x_relative_error", err_x, 0.02);
    report.add_check("cross_damping_relative_error", err_cross, 0.03);

    if (!cfg.scan.t_grid.empty()) {
        const AmplitudeState initial{cfg.scan.initial_c, cfg.scan.initial_x, cfg.scan.t_grid.front()};
        const std::vector<AmplitudeState> od = oracle_dynamics(e, p.eps0, initial, cfg.scan.t_grid);
        const std::vector<AmplitudeState> md = evolve_ode(p, k, initial, cfg.scan.t_grid);
        double worst_pop = 0.0;
        CsvWriter csv(prepare(cfg, report, "oracle_dynamics.csv"),
                      {"t", "oracle_photon", "oracle_exciton", "model_photon", "model_exciton"});
        for (std::size_t i = 0; i < od.size(); ++i) {
            csv.row({od[i].t, od[i].photon_population(), od[i].exciton_population(), md[i].photon_population(),
                     md[i].exciton_population()});
            worst_pop = std::max({worst_pop, std::abs(od[i].photon_population() - md[i].photon_population()),
                                  std::abs(od[i].exciton_population() - md[i].exciton_population())});
        }
        report.add_check("dynamics_max_population_deviation", worst_pop, cfg.scan.max_deviation);
    }

    CsvWriter summary(prepare(cfg, report, "summary.csv"), {"metric", "value", "bound", "passed"});
    for (const CheckResult& c : report.checks) {
        summary.row({c.name, format_number(c.value), format_number(c.bound), c.passed ? "1" : "0"});
    }
    return report;
}

RunReport run(const RunConfig& cfg, unsigned threads) {
    switch (cfg.scan.kind) {
        case ScanKind::Dispersion: return run_dispersion(cfg, threads);
        case ScanKind::Spectrum: return run_spectrum(cfg, threads);
        case ScanKind::Dynamics: return run_dynamics(cfg, threads);
        case ScanKind::EpBic: return run_ep_bic(cfg, threads);
        case ScanKind::Absorption: return run_absorption(cfg, threads);
        case ScanKind::OracleCompare: return run_oracle_compare(cfg, threads);
    }
    throw std::logic_error("run: unhandled scan kind");
}

}  // namespace ioxsim
