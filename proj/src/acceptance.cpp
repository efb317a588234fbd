#include "ioxsim/acceptance.hpp"

#include "ioxsim/bath_kernel.hpp"
#include "ioxsim/bath_oracle.hpp"
#include "ioxsim/core_model.hpp"
#include "ioxsim/dynamics.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/spectra.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>

namespace ioxsim {

namespace {

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

// Least-squares line y = a + b x, returning (slope, R^2).
std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return {slope, r2};
}

SystemParams anomalous_set(double delta) {
    SystemParams p;
    p.delta = delta;
    p.gamma_c = 1.0;
    p.gamma_x = 1.8;
    p.g_rabi = 0.0;
    p.mass_ratio = 0.0;
    return p;
}

SystemParams bic_set() {
    SystemParams p;
    p.g_rabi = 3.0;
    p.gamma_c = 1.0;
    p.gamma_x = 0.3;
    p.delta = 2.1 / std::sqrt(0.3);
    return p;
}

struct Outcome {
    bool passed;
    std::string detail;
};

// 1. negative curvature of the lower branch at k = 0 and level attraction
Outcome criterion_dispersion() {
    const SystemParams p = anomalous_set(3.0);
    std::vector<double> kgrid(101);
    for (int i = 0; i <= 100; ++i) {
        kgrid[static_cast<std::size_t>(i)] = (i - 50) * 0.01;
    }
    const TrackedBranches tb = track_branches(p, kgrid);
    auto re = [&](std::size_t i) { return tb.lower[i].omega.real() - p.eps0; };
    const double curvature = (re(51) - 2.0 * re(50) + re(49)) / (0.01 * 0.01);

    const std::vector<double> omega = linspace(p.eps0 - 10.0, p.eps0 + 10.0, 2001);
    std::vector<double> intensity(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        intensity[i] = power_spectrum(p, 0.0, omega[i]).value();
    }
    const SpectralPoleFit fit = fit_spectral_poles(omega, intensity);
    const double separation = fit.upper.real() - fit.lower.real();
    const bool ok = curvature < 0.0 && separation < 2.0 && separation < 3.0;
    return {ok, fmt("d2ReL/dk2=%.4f (<0), peak separation=%.4f (<2.0, bare 3.0), fit residual=%.1e", curvature,
                    separation, fit.relative_residual)};
}

// 2. bound state in the continuum: real pole, lineshape slope, plateau
Outcome criterion_bic() {
    const SystemParams p = bic_set();
    const BranchPair br = eigen_branches(p, 0.0);
    const double im_lower = std::abs(br.lower.omega.imag());
    const bool ok_im = im_lower < 1e-12;

    // log-log slope of I against the distance from the real pole
    const double w0 = br.lower.omega.real();
    std::vector<double> lx, ly;
    for (int i = 0; i <= 20; ++i) {
        const double x = std::pow(10.0, -4.0 + 0.1 * i);
        const auto v = power_spectrum(p, 0.0, w0 + x);
        lx.push_back(std::log10(x));
        ly.push_back(v ? std::log10(*v) : std::nan(""));
    }
    const double slope = linear_fit(lx, ly).first;
    const bool ok_slope = std::abs(slope + 2.0) <= 0.05;

    const double x_limit = 0.591715976331361;   // 1 / 1.69
    const double c_limit = 0.177514792899408;   // 0.3 / 1.69
    const BicPopulations late = bic_amplitudes(p, 60.0);
    const double err_x = std::abs(late.exciton - x_limit);
    const double err_c = std::abs(late.photon - c_limit);
    const bool ok_closed = err_x < 1e-8 && err_c < 1e-8;

    const BathSpec b = bath_for_rates(1.0, 0.3, 0.0, p.eps0, 1.0, p.eps0 - 500.0, p.eps0 + 500.0);
    const DiscretizedBath d = discretize_bath(b, 0.0, {4000, 0.05});
    const SystemParams po = with_bath_rates(p, b, 0.0);
    const std::vector<double> ts = linspace(0.0, 12.0, 241);
    const std::vector<AmplitudeState> traj = oracle_dynamics(d, po, {0.0, 1.0, 0.0}, ts);
    double px = 0.0, pc = 0.0;
    int count = 0;
    for (const AmplitudeState& s : traj) {
        if (s.t >= 8.0) {
            px += s.exciton_population();
            pc += s.photon_population();
            ++count;
        }
    }
    px /= count;
    pc /= count;
    const double dev_x = std::abs(px - x_limit) / x_limit;
    const double dev_c = std::abs(pc - c_limit) / c_limit;
    const bool ok_oracle = dev_x < 0.05 && dev_c < 0.05;

    return {ok_im && ok_slope && ok_closed && ok_oracle,
            fmt("|Im wL|=%.2e (<1e-12) %s; slope=%.4f (-2.00+-0.05) %s; closed form |x|^2 err=%.1e |c|^2 err=%.1e "
                "(<1e-8) %s; oracle plateau |x|^2=%.5f |c|^2=%.5f (5%%) %s",
                im_lower, ok_im ? "ok" : "FAIL", slope, ok_slope ? "ok" : "FAIL", err_x, err_c,
                ok_closed ? "ok" : "FAIL", px, pc, ok_oracle ? "ok" : "FAIL")};
}

// 3. exceptional point: vanishing discriminant, coalesced eigenvectors,
// linear-times-exponential dynamics
Outcome criterion_ep() {
    SystemParams p;
    p.gamma_c = 1.0;
    p.gamma_x = 2.0;
    p.g_rabi = 0.5;
    p.delta = 2.0 * std::sqrt(2.0);
    const cplx disc = discriminant(p, 0.0);
    const bool ok_disc = std::abs(disc) < 1e-10;

    // right eigenvectors from the first row of H - w for both roots
    const Eigen::Matrix2cd h = effective_hamiltonian(p, 0.0);
    const cplx root = principal_sqrt(disc);
    const cplx mean = 0.5 * (h(0, 0) + h(1, 1));
    auto null_vector = [&](cplx w) {
        Eigen::Vector2cd v(h(0, 1), w - h(0, 0));
        return Eigen::Vector2cd(v / v.norm());
    };
    const Eigen::Vector2cd vl = null_vector(mean - 0.5 * root);
    const Eigen::Vector2cd vu = null_vector(mean + 0.5 * root);
    const double overlap = std::abs(vl.dot(vu));
    const bool ok_vec = overlap > 1.0 - 1e-8;

    std::vector<double> ts = linspace(0.05, 10.0, 200);
    const std::vector<AmplitudeState> traj = evolve_ode(p, 0.0, {0.0, 1.0, 0.0}, ts);
    std::vector<double> y(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        y[i] = std::log(std::abs(traj[i].c) / ts[i]);
    }
    const auto [slope, r2] = linear_fit(ts, y);
    const bool ok_fit = r2 > 0.999;
    return {ok_disc && ok_vec && ok_fit,
            fmt("|D|=%.2e (<1e-10); overlap=%.12f (>1-1e-8); envelope fit Gamma=%.6f R^2=%.9f (>0.999)", std::abs(disc),
                overlap, -slope, r2)};
}

// 4. flux conservation and the emission/absorption identity
Outcome criterion_conservation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_s = 0.0, worst_ra = 0.0, worst_id = 0.0;
    for (int i = 0; i < 1000; ++i) {
        SystemParams p;
        p.delta = -5.0 + 10.0 * u(rng);
        p.g_rabi = 3.0 * u(rng);
        p.gamma_c = 0.05 + 1.95 * u(rng);
        p.gamma_x = 2.0 * u(rng);
        p.mass_ratio = 0.9 * u(rng);
        const double k = 2.0 * u(rng);
        const double w = p.eps0 - 10.0 + 20.0 * u(rng);
        const auto s = scattering_amplitude_single_bath(p, k, w);
        worst_s = std::max(worst_s, s ? std::abs(std::abs(*s) - 1.0) : 1.0);

        p.gamma_nr_c = u(rng);
        p.gamma_nr_x = u(rng);
        worst_ra = std::max(worst_ra, std::abs(reflection(p, k, w) + absorption(p, k, w) - 1.0));
        worst_id = std::max(worst_id, power_absorption_residual(p, k, w));
    }
    const bool ok = worst_s < 1e-12 && worst_ra < 1e-12 && worst_id < 1e-10;
    return {ok, fmt("max ||S|-1|=%.2e (<1e-12), max |R+A-1|=%.2e (<1e-12), max |I-(Ag+Am)n|=%.2e (<1e-10)", worst_s,
                    worst_ra, worst_id)};
}

// 5. M G = 1 with the frequency-dependent kernels
Outcome criterion_green(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        SystemParams p;
        p.delta = -5.0 + 10.0 * u(rng);
        p.g_rabi = 3.0 * u(rng);
        p.mass_ratio = 0.9 * u(rng);
        const double k = u(rng);
        BathSpec b;
        b.c_light = 0.5 + 1.5 * u(rng);
        b.kappa_c = 0.1 + u(rng);
        b.kappa_x = u(rng);
        b.omega_min = p.eps0 - 500.0;
        b.omega_max = p.eps0 + 500.0;
        const double w = p.eps0 - 50.0 + 100.0 * u(rng);
        Eigen::Matrix2cd m;
        if (i % 2 == 0) {
            m = full_matrix(b, p, k, w);
        } else {
            const LossChannel photon{0.5 * u(rng), p.eps0 - 300.0, p.eps0 + 300.0};
            const LossChannel exciton{0.5 * u(rng)};
            m = full_matrix_lossy(b, photon, exciton, p, k, w);
        }
        const Eigen::Matrix2cd g = green_matrix(m);
        const double residual = (m * g - Eigen::Matrix2cd::Identity()).cwiseAbs().rowwise().sum().maxCoeff();
        worst = std::max(worst, residual);
    }
    return {worst < 1e-12, fmt("max ||M G - 1||_inf=%.2e (<1e-12) over 1000 points", worst)};
}

// 6. rates and cross damping emerge from a discretized common bath
Outcome criterion_markov() {
    const SystemParams p = anomalous_set(3.0);
    const BathSpec b = bath_for_rates(p.gamma_c, p.gamma_x, 0.0, p.eps0, 1.0, p.eps0 - 500.0, p.eps0 + 500.0);
    const DiscretizedBath d = discretize_bath(b, 0.0, {4000, 0.05});
    check_oracle_preconditions(d, p);
    const OracleEigensystem e = diagonalize(d, p);
    const Eigen::Matrix2d damping = extract_damping(e, p.eps0);
    const double cross = std::sqrt(p.gamma_c * p.gamma_x);
    const double err_c = std::abs(damping(0, 0) - p.gamma_c) / p.gamma_c;
    const double err_x = std::abs(damping(1, 1) - p.gamma_x) / p.gamma_x;
    const double err_cross = std::abs(damping(0, 1) - cross) / cross;
    const bool ok_rates = err_c < 0.02 && err_x < 0.02 && err_cross < 0.03;

    // peak positions need two resolved peaks: strongly coupled set at zero
    // detuning. The comb broadening (two mode spacings) drags the maximum of a
    // broad line, so this part uses a finer bath on the same window.
    SystemParams q = bic_set();
    q.delta = 0.0;
    const BathSpec bq = bath_for_rates(q.gamma_c, q.gamma_x, 0.0, q.eps0, 1.0, q.eps0 - 500.0, q.eps0 + 500.0);
    const DiscretizedBath dq = discretize_bath(bq, 0.0, {16000, 0.05});
    const std::vector<double> omega = linspace(q.eps0 - 8.0, q.eps0 + 8.0, 1601);
    const std::vector<double> spec = oracle_spectrum(dq, q, omega);
    std::vector<std::size_t> peaks = local_maxima(spec);
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t c) { return spec[a] > spec[c]; });
    const BranchPair br = eigen_branches(q, 0.0);
    double off_l = 1e300, off_u = 1e300;
    if (peaks.size() >= 2) {
        const double w1 = std::min(omega[peaks[0]], omega[peaks[1]]);
        const double w2 = std::max(omega[peaks[0]], omega[peaks[1]]);
        off_l = std::abs(w1 - br.lower.omega.real());
        off_u = std::abs(w2 - br.upper.omega.real());
    }
    const double step = omega[1] - omega[0];
    const bool ok_peaks = off_l <= step * (1.0 + 1e-9) && off_u <= step * (1.0 + 1e-9);
    return {ok_rates && ok_peaks,
            fmt("gC=%.5f (2%%) gX=%.5f (2%%) cross=%.5f vs %.5f (3%%); peak offsets %.4f, %.4f (<= step %.2f)",
                damping(0, 0), damping(1, 1), damping(0, 1), cross, off_l, off_u, step)};
}

// 7. absorption with extra loss channels: bounded and ridge-aligned
Outcome criterion_absorption() {
    const std::vector<double> kgrid = linspace(0.0, 2.5, 101);
    double worst_range = 0.0;
    double worst_offset = 0.0;
    for (double delta : {3.0, 2.0}) {
        SystemParams p = anomalous_set(delta);
        p.gamma_nr_c = 0.15;
        p.gamma_nr_x = 0.15;
        const std::vector<double> omega = linspace(p.eps0 - 5.0, p.eps0 + 12.0, 1701);
        const SpectrumGrid a = compute_spectrum_grid(p, kgrid, omega, SpectrumKind::Absorption);
        const SpectrumGrid pw = compute_spectrum_grid(p, kgrid, omega, SpectrumKind::Power);
        for (std::size_t ik = 0; ik < kgrid.size(); ++ik) {
            const auto ra = a.row(ik);
            const auto rp = pw.row(ik);
            for (double v : ra) {
                worst_range = std::max({worst_range, -v, v - 1.0, std::isfinite(v) ? 0.0 : 1.0});
            }
            const auto ia = std::max_element(ra.begin(), ra.end()) - ra.begin();
            const auto ip = std::max_element(rp.begin(), rp.end()) - rp.begin();
            worst_offset = std::max(worst_offset, static_cast<double>(std::abs(ia - ip)));
        }
    }
    return {worst_range <= 0.0 && worst_offset <= 1.0,
            fmt("max excursion outside [0,1]=%.2e, max ridge offset=%g grid steps (<=1)", worst_range, worst_offset)};
}

// 8. closed-form dynamics against adaptive integration
Outcome criterion_dynamics(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> ts = linspace(0.0, 20.0, 201);
    double worst = 0.0;
    int drawn = 0;
    while (drawn < 100) {
        SystemParams p;
        p.delta = -5.0 + 10.0 * u(rng);
        p.g_rabi = 3.0 * u(rng);
        p.gamma_c = 0.05 + 1.95 * u(rng);
        p.gamma_x = 2.0 * u(rng);
        p.gamma_nr_c = 0.5 * u(rng);
        p.gamma_nr_x = 0.5 * u(rng);
        p.mass_ratio = 0.9 * u(rng);
        const double k = 2.0 * u(rng);
        const double phase = 2.0 * std::numbers::pi * u(rng);
        const double mix = u(rng);
        const AmplitudeState init{std::sqrt(mix) * std::polar(1.0, phase), cplx(std::sqrt(1.0 - mix), 0.0), 0.0};
        if (eigen_branches(p, k).degenerate) {
            continue;
        }
        ++drawn;
        const std::vector<AmplitudeState> ode = evolve_ode(p, k, init, ts, {1e-12, 1e-14, 1e-3});
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const AmplitudeState a = evolve_analytic(p, k, init, ts[i]);
            worst = std::max({worst, std::abs(a.c - ode[i].c), std::abs(a.x - ode[i].x)});
        }
    }
    return {worst < 1e-8, fmt("sup |analytic - ode|=%.2e (<1e-8) over 100 draws, t in [0,20]", worst)};
}

}  // namespace

std::uint64_t seed_from_env() {
    if (const char* s = std::getenv("IOXSIM_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s && *end == '\0') {
            return v;
        }
    }
    return kDefaultSeed;
}

std::vector<CriterionResult> run_acceptance(std::ostream& out, std::uint64_t seed, int only) {
    std::mt19937_64 rng(seed);
    struct Entry {
        int id;
        const char* title;
        double budget;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries{
        {1, "anomalous dispersion and level attraction", 5.0, criterion_dispersion},
        {2, "bound state in the continuum", 60.0, criterion_bic},
        {3, "exceptional point certificate", 5.0, criterion_ep},
        {4, "conservation suite", 5.0, [&] { return criterion_conservation(rng); }},
        {5, "Green's matrix identity", 10.0, [&] { return criterion_green(rng); }},
        {6, "Markov emergence from a discretized bath", 120.0, criterion_markov},
        {7, "absorption map with loss channels", 10.0, criterion_absorption},
        {8, "analytic vs ODE dynamics", 10.0, [&] { return criterion_dynamics(rng); }},
    };
    out << "acceptance suite, seed " << seed << "\n";
    std::vector<CriterionResult> results;
    for (const Entry& e : entries) {
        if (only != 0 && only != e.id) {
            continue;
        }
        CriterionResult r{e.id, e.title, false, "", 0.0, e.budget};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Outcome o = e.fn();
            r.passed = o.passed;
            r.detail = o.detail;
        } catch (const std::exception& ex) {
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = r.seconds <= r.budget;
        r.passed = r.passed && in_budget;
        out << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.title << ": " << r.detail
            << fmt("; time %.2fs (budget %.0fs)%s", r.seconds, r.budget, in_budget ? "" : " OVER BUDGET") << "\n";
        out.flush();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace ioxsim
