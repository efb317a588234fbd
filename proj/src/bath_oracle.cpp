#include "ioxsim/bath_oracle.hpp"

#include "ioxsim/core_model.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/matrix2.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace ioxsim {

namespace {

constexpr double kPi = std::numbers::pi;

double default_eta(const OracleEigensystem& e, double eta) {
    return eta > 0.0 ? eta : 2.0 * e.spacing;
}

void check_bath(const DiscretizedBath& d) {
    const std::size_t n = d.size();
    if (n == 0 || d.coupling_c.size() != n || d.coupling_x.size() != n || !(d.spacing > 0.0)) {
        throw DomainError("DiscretizedBath: inconsistent mode arrays");
    }
}

}  // namespace

DiscretizedBath discretize_bath(const BathSpec& b, double k, const DiscretizationOptions& opts) {
    b.validate();
    if (opts.modes < 2) {
        throw DomainError("discretize_bath: need at least two modes");
    }
    if (opts.taper_fraction < 0.0 || opts.taper_fraction >= 0.5) {
        throw DomainError("discretize_bath: taper fraction must lie in [0, 0.5)");
    }
    if (!(b.omega_min > b.c_light * std::abs(k))) {
        throw DomainError("discretize_bath: window must lie above the light cone c*k");
    }
    DiscretizedBath d;
    d.k = k;
    const double width = b.omega_max - b.omega_min;
    d.spacing = width / static_cast<double>(opts.modes);
    const double ramp = opts.taper_fraction * width;
    d.mode_freqs.resize(opts.modes);
    d.coupling_c.resize(opts.modes);
    d.coupling_x.resize(opts.modes);
    for (std::size_t j = 0; j < opts.modes; ++j) {
        const double w = b.omega_min + d.spacing * (static_cast<double>(j) + 0.5);
        const double edge = std::min(w - b.omega_min, b.omega_max - w);
        const double taper = (ramp > 0.0 && edge < ramp) ? 0.5 * (1.0 - std::cos(kPi * edge / ramp)) : 1.0;
        const double weight = std::sqrt(env_density_of_states(b, k, w) * d.spacing * taper);
        d.mode_freqs[j] = w;
        d.coupling_c[j] = b.kappa_c * weight;
        d.coupling_x[j] = b.kappa_x * weight;
    }
    return d;
}

MarkovRates discretized_rates(const DiscretizedBath& d, double omega0) {
    check_bath(d);
    const auto it = std::lower_bound(d.mode_freqs.begin(), d.mode_freqs.end(), omega0);
    std::size_t j = static_cast<std::size_t>(it - d.mode_freqs.begin());
    if (j == d.size() || (j > 0 && omega0 - d.mode_freqs[j - 1] < d.mode_freqs[j] - omega0)) {
        j = j == 0 ? 0 : j - 1;
    }
    const double gc = d.coupling_c[j];
    const double gx = d.coupling_x[j];
    return {kPi * gc * gc / d.spacing, kPi * gx * gx / d.spacing, kPi * gc * gx / d.spacing};
}

Eigen::MatrixXd single_excitation_matrix(const DiscretizedBath& d, const SystemParams& p) {
    check_bath(d);
    const auto n = static_cast<Eigen::Index>(d.size());
    const KineticEnergies e = kinetic_energies(p, d.k);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 2, n + 2);
    h(0, 0) = e.photon;
    h(1, 1) = e.exciton;
    h(0, 1) = h(1, 0) = p.g_rabi;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto s = static_cast<std::size_t>(j);
        h(0, j + 2) = h(j + 2, 0) = d.coupling_c[s];
        h(1, j + 2) = h(j + 2, 1) = d.coupling_x[s];
        h(j + 2, j + 2) = d.mode_freqs[s];
    }
    return h;
}

OracleEigensystem diagonalize_dense(const DiscretizedBath& d, const SystemParams& p) {
    Eigen::MatrixXd h = single_excitation_matrix(d, p);
    h.diagonal().array() -= p.eps0;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) {
        throw NumericalError("diagonalize_dense: eigensolver failed");
    }
    OracleEigensystem out;
    out.spacing = d.spacing;
    const Eigen::Index m = h.rows();
    out.energies.resize(static_cast<std::size_t>(m));
    out.photon_amp.resize(static_cast<std::size_t>(m));
    out.exciton_amp.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto s = static_cast<std::size_t>(i);
        out.energies[s] = es.eigenvalues()(i) + p.eps0;
        out.photon_amp[s] = es.eigenvectors()(0, i);
        out.exciton_amp[s] = es.eigenvectors()(1, i);
    }
    return out;
}

OracleEigensystem diagonalize(const DiscretizedBath& d, const SystemParams& p) {
    check_bath(d);
    const std::size_t n = d.size();
    double nc = 0.0;
    double nx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        nc += d.coupling_c[j] * d.coupling_c[j];
        nx += d.coupling_x[j] * d.coupling_x[j];
    }
    const double theta = std::atan2(std::sqrt(nx), std::sqrt(nc));
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);

    // bright = (cs, sn), dark = (-sn, cs); the bath sees only the bright part
    Eigen::VectorXd z(static_cast<Eigen::Index>(n) + 1);
    Eigen::VectorXd poles(static_cast<Eigen::Index>(n) + 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double s = std::hypot(d.coupling_c[j], d.coupling_x[j]);
        const double leak = std::abs(-sn * d.coupling_c[j] + cs * d.coupling_x[j]);
        if (leak > 1e-13 * std::max(s, 1e-300)) {
            return diagonalize_dense(d, p);
        }
        z(static_cast<Eigen::Index>(j) + 1) = cs * d.coupling_c[j] + sn * d.coupling_x[j];
        poles(static_cast<Eigen::Index>(j) + 1) = d.mode_freqs[j] - p.eps0;
    }

    const KineticEnergies e = kinetic_energies(p, d.k);
    const double hc = e.photon - p.eps0;
    const double hx = e.exciton - p.eps0;
    const double g = p.g_rabi;
    const double h_bb = cs * cs * hc + 2.0 * cs * sn * g + sn * sn * hx;
    const double h_dd = sn * sn * hc - 2.0 * cs * sn * g + cs * cs * hx;
    const double h_bd = cs * sn * (hx - hc) + (cs * cs - sn * sn) * g;
    z(0) = h_bd;
    poles(0) = h_dd;

    const std::array<Eigen::Index, 1> tracked{0};
    const detail::ArrowheadResult r = detail::arrowhead_eigen(h_bb, z, poles, tracked);

    OracleEigensystem out;
    out.spacing = d.spacing;
    const Eigen::Index m = r.values.size();
    out.energies.resize(static_cast<std::size_t>(m));
    out.photon_amp.resize(static_cast<std::size_t>(m));
    out.exciton_amp.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double vb = r.components(0, i);
        const double vd = r.components(1, i);
        out.energies[s] = r.values(i) + p.eps0;
        out.photon_amp[s] = cs * vb - sn * vd;
        out.exciton_amp[s] = sn * vb + cs * vd;
    }
    return out;
}

void check_oracle_preconditions(const DiscretizedBath& d, const SystemParams& p) {
    check_bath(d);
    if (d.size() < 2000) {
        throw DomainError("oracle: at least 2000 bath modes are required, got " + std::to_string(d.size()));
    }
    if (p.has_nonradiative_loss()) {
        throw DomainError("oracle: nonradiative losses have no discrete-bath realization");
    }
    const MarkovRates r = discretized_rates(d, p.eps0);
    const double reach = 50.0 * std::max({r.gamma_c, r.gamma_x, p.g_rabi});
    const double lo = d.mode_freqs.front() - 0.5 * d.spacing;
    const double hi = d.mode_freqs.back() + 0.5 * d.spacing;
    if (p.eps0 - reach < lo || p.eps0 + reach > hi) {
        throw DomainError("oracle: bath window must cover eps0 +- 50 x the largest rate");
    }
}

Eigen::Matrix2cd oracle_green(const OracleEigensystem& e, double omega, double eta) {
    Eigen::Matrix2cd g = Eigen::Matrix2cd::Zero();
    const cplx w(omega, eta);
    for (std::size_t n = 0; n < e.energies.size(); ++n) {
        const cplx r = 1.0 / (w - e.energies[n]);
        const double uc = e.photon_amp[n];
        const double ux = e.exciton_amp[n];
        g(0, 0) += uc * uc * r;
        g(0, 1) += uc * ux * r;
        g(1, 1) += ux * ux * r;
    }
    g(1, 0) = g(0, 1);
    return g;
}

std::vector<double> oracle_spectrum(const OracleEigensystem& e, std::span<const double> omega_grid, double eta) {
    eta = default_eta(e, eta);
    std::vector<double> out(omega_grid.size(), 0.0);
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        double acc = 0.0;
        for (std::size_t n = 0; n < e.energies.size(); ++n) {
            const double weight = e.photon_amp[n] * e.photon_amp[n] + e.exciton_amp[n] * e.exciton_amp[n];
            const double x = omega_grid[i] - e.energies[n];
            acc += weight / (x * x + eta * eta);
        }
        out[i] = 4.0 * eta * acc;
    }
    return out;
}

std::vector<double> oracle_spectrum(const DiscretizedBath& d, const SystemParams& p,
                                    std::span<const double> omega_grid, double eta) {
    check_oracle_preconditions(d, p);
    return oracle_spectrum(diagonalize(d, p), omega_grid, eta);
}

std::vector<double> broadened_model_spectrum(const SystemParams& p, double k, std::span<const double> omega_grid,
                                             double eta) {
    Eigen::Matrix2cd h = effective_hamiltonian(p, k);
    h.diagonal().array() -= cplx(p.eps0, 0.0);
    std::vector<double> out(omega_grid.size(), 0.0);
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        Eigen::Matrix2cd m = -h;
        m.diagonal().array() += cplx(omega_grid[i] - p.eps0, eta);
        const auto g = inverse2x2(m);
        if (!g) {
            throw NumericalError("broadened_model_spectrum: singular resolvent");
        }
        out[i] = -4.0 * g->trace().imag();
    }
    return out;
}

Eigen::Matrix2d extract_damping(const OracleEigensystem& e, double omega, double eta) {
    eta = default_eta(e, eta);
    const auto inv = inverse2x2(oracle_green(e, omega, eta));
    if (!inv) {
        throw NumericalError("extract_damping: oracle Green's matrix is singular");
    }
    Eigen::Matrix2d gamma = inv->imag();
    gamma.diagonal().array() -= eta;
    return gamma;
}

std::vector<AmplitudeState> oracle_dynamics(const OracleEigensystem& e, double eps0, const AmplitudeState& initial,
                                            std::span<const double> t_grid) {
    if (t_grid.empty()) {
        return {};
    }
    const double recurrence = kPi / e.spacing;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < initial.t || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
            throw DomainError("oracle_dynamics: time grid must be increasing and start at or after the initial state");
        }
    }
    if (t_grid.back() - initial.t > recurrence) {
        throw DomainError("oracle_dynamics: time grid reaches the recurrence time pi/spacing = " +
                          std::to_string(recurrence));
    }
    const std::size_t m = e.energies.size();
    // overlap of the initial state with every eigenvector
    std::vector<cplx> overlap(m);
    for (std::size_t n = 0; n < m; ++n) {
        overlap[n] = e.photon_amp[n] * initial.c + e.exciton_amp[n] * initial.x;
    }
    std::vector<AmplitudeState> out;
    out.reserve(t_grid.size());
    for (const double t : t_grid) {
        const double dt = t - initial.t;
        cplx c = 0.0;
        cplx x = 0.0;
        for (std::size_t n = 0; n < m; ++n) {
            const cplx a = overlap[n] * std::exp(cplx(0.0, -(e.energies[n] - eps0) * dt));
            c += e.photon_amp[n] * a;
            x += e.exciton_amp[n] * a;
        }
        const cplx phase = std::exp(cplx(0.0, -eps0 * dt));
        out.push_back({c * phase, x * phase, t});
    }
    return out;
}

std::vector<AmplitudeState> oracle_dynamics(const DiscretizedBath& d, const SystemParams& p,
                                            const AmplitudeState& initial, std::span<const double> t_grid) {
    check_oracle_preconditions(d, p);
    return oracle_dynamics(diagonalize(d, p), p.eps0, initial, t_grid);
}

}  // namespace ioxsim
