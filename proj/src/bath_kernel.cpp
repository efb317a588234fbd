#include "ioxsim/bath_kernel.hpp"

#include "ioxsim/core_model.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/matrix2.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ioxsim {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t odd_nodes(std::size_t n) {
    n = std::max<std::size_t>(n, 3);
    return n % 2 == 1 ? n : n + 1;
}

// Composite Simpson rule on `n` (odd) equally spaced nodes.
template <class F>
auto simpson(F&& f, double a, double b, std::size_t n) {
    n = odd_nodes(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    auto sum = f(a) + f(b);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double w = (i % 2 == 1) ? 4.0 : 2.0;
        sum += w * f(a + h * static_cast<double>(i));
    }
    return sum * (h / 3.0);
}

double bath_frequency(const BathSpec& b, double k, double q) {
    return b.c_light * std::hypot(k, q);
}

Eigen::Matrix2d coupling_products(const BathSpec& b) {
    Eigen::Matrix2d kk;
    kk << b.kappa_c * b.kappa_c, b.kappa_c * b.kappa_x,
          b.kappa_x * b.kappa_c, b.kappa_x * b.kappa_x;
    return kk;
}

Eigen::Matrix2cd bare_part(const SystemParams& p, double k, double omega) {
    const KineticEnergies e = kinetic_energies(p, k);
    Eigen::Matrix2cd m;
    // photon and exciton energies measured from eps0 keep the diagonal exact
    const double w = omega - p.eps0;
    m << w - (e.photon - p.eps0), -p.g_rabi,
         -p.g_rabi, w - (e.exciton - p.eps0);
    return m;
}

}  // namespace

void BathSpec::validate() const {
    if (!(c_light > 0.0) || !std::isfinite(c_light)) {
        throw DomainError("BathSpec: c_light must be positive");
    }
    if (!(kappa_c >= 0.0) || !(kappa_x >= 0.0)) {
        throw DomainError("BathSpec: couplings must be real and non-negative");
    }
    if (!(omega_max > omega_min) || !std::isfinite(omega_min) || !std::isfinite(omega_max)) {
        throw DomainError("BathSpec: omega window must satisfy omega_min < omega_max");
    }
}

std::array<double, 2> BathSpec::q_range(double k) const {
    auto q_of = [&](double w) {
        const double s = w / c_light;
        return s > std::abs(k) ? std::sqrt((s - k) * (s + k)) : 0.0;
    };
    return {q_of(omega_min), q_of(omega_max)};
}

double env_density_of_states(const BathSpec& b, double k, double omega) {
    b.validate();
    const double ck = b.c_light * std::abs(k);
    if (!(omega > ck)) {
        throw DomainError("env_density_of_states: omega must lie above the light cone c*k");
    }
    return omega / (b.c_light * std::sqrt((omega - ck) * (omega + ck)));
}

Eigen::Matrix2cd kernel_time(const BathSpec& b, double k, double tau, std::size_t nodes) {
    b.validate();
    if (tau < 0.0) {
        return Eigen::Matrix2cd::Zero();
    }
    const auto [qa, qb] = b.q_range(k);
    if (!(qb > qa)) {
        return Eigen::Matrix2cd::Zero();
    }
    // keep at least ~40 nodes per oscillation of the phase across the window
    const double cycles = (bath_frequency(b, k, qb) - bath_frequency(b, k, qa)) * tau / (2.0 * kPi);
    const auto needed = static_cast<std::size_t>(std::ceil(40.0 * cycles)) + 1;
    const cplx integral = simpson(
        [&](double q) { return std::exp(cplx(0.0, -bath_frequency(b, k, q) * tau)); }, qa, qb,
        std::max(nodes, needed));
    return coupling_products(b).cast<cplx>() * integral;
}

Eigen::Matrix2cd kernel_freq(const BathSpec& b, double k, double omega, std::size_t nodes) {
    b.validate();
    nodes = odd_nodes(nodes);
    const auto [qa, qb] = b.q_range(k);
    if (!(qb > qa)) {
        return Eigen::Matrix2cd::Zero();
    }
    const double c = b.c_light;
    const double h = (qb - qa) / static_cast<double>(nodes - 1);
    const double ck = c * std::abs(k);

    double re = 0.0;
    double im = 0.0;
    const bool above_cone = omega > ck;
    const double qp = above_cone ? std::sqrt((omega / c - std::abs(k)) * (omega / c + std::abs(k))) : -1.0;
    if (above_cone && (std::abs(qp - qa) <= h || std::abs(qp - qb) <= h)) {
        throw NumericalError("kernel_freq: pole within one quadrature cell of the window edge at omega = " +
                             std::to_string(omega));
    }

    if (above_cone && qp > qa && qp < qb) {
        const double rho = omega / (c * c * qp);
        const double taylor = k * k / (2.0 * omega * qp * qp);
        // integrand with the pole removed: 1/(w - w(q)) + rho/(q - qp)
        auto regular = [&](double q) {
            const double s = q - qp;
            if (std::abs(s) < 1e-3 * h) {
                return taylor;
            }
            const double wq = bath_frequency(b, k, q);
            return ((omega + wq) / (c * c * (qp + q)) - rho) / (qp - q);
        };
        re = kPi * rho;
        im = simpson(regular, qa, qb, nodes) - rho * std::log((qb - qp) / (qp - qa));
    } else {
        // no pole on the window: ordinary integral, no emission
        auto direct = [&](double q) {
            const double wq = bath_frequency(b, k, q);
            return 1.0 / (omega - wq);
        };
        im = simpson(direct, qa, qb, nodes);
    }
    return coupling_products(b).cast<cplx>() * cplx(re, im);
}

MemoryKernel kernel_freq_grid(const BathSpec& b, double k, std::span<const double> omega_grid,
                              std::size_t nodes, unsigned threads) {
    MemoryKernel out;
    out.omega_grid.assign(omega_grid.begin(), omega_grid.end());
    out.gamma_tilde.resize(omega_grid.size());
    detail::parallel_for(omega_grid.size(), threads,
                         [&](std::size_t i) { out.gamma_tilde[i] = kernel_freq(b, k, omega_grid[i], nodes); });
    return out;
}

cplx LossChannel::kernel(double omega) const {
    if (rate < 0.0) {
        throw DomainError("LossChannel: rate must be non-negative");
    }
    if (std::isinf(omega_min) && std::isinf(omega_max)) {
        return {rate, 0.0};
    }
    if (!(omega_max > omega_min)) {
        throw DomainError("LossChannel: empty window");
    }
    if (omega == omega_min || omega == omega_max) {
        throw NumericalError("LossChannel: kernel diverges at the window edge");
    }
    if (!std::isfinite(omega_min) || !std::isfinite(omega_max)) {
        throw DomainError("LossChannel: half-infinite windows are not supported");
    }
    const bool inside = omega > omega_min && omega < omega_max;
    const double shift = rate / kPi * std::log(std::abs(omega - omega_min) / std::abs(omega_max - omega));
    return {inside ? rate : 0.0, shift};
}

Eigen::Matrix2cd full_matrix(const Eigen::Matrix2cd& gamma_tilde, const SystemParams& p, double k,
                             double omega) {
    return bare_part(p, k, omega) + cplx(0.0, 1.0) * gamma_tilde;
}

Eigen::Matrix2cd full_matrix(const BathSpec& b, const SystemParams& p, double k, double omega) {
    return full_matrix(kernel_freq(b, k, omega), p, k, omega);
}

Eigen::Matrix2cd full_matrix_lossy(const Eigen::Matrix2cd& gamma_tilde, const LossChannel& photon_loss,
                                   const LossChannel& exciton_loss, const SystemParams& p, double k,
                                   double omega) {
    Eigen::Matrix2cd m = full_matrix(gamma_tilde, p, k, omega);
    m(0, 0) += cplx(0.0, 1.0) * photon_loss.kernel(omega);
    m(1, 1) += cplx(0.0, 1.0) * exciton_loss.kernel(omega);
    return m;
}

Eigen::Matrix2cd full_matrix_lossy(const BathSpec& b, const LossChannel& photon_loss,
                                   const LossChannel& exciton_loss, const SystemParams& p, double k,
                                   double omega) {
    return full_matrix_lossy(kernel_freq(b, k, omega), photon_loss, exciton_loss, p, k, omega);
}

Eigen::Matrix2cd green_matrix(const Eigen::Matrix2cd& m) {
    const auto inv = inverse2x2(m);
    if (!inv) {
        throw NumericalError("green_matrix: M is singular");
    }
    return *inv;
}

Eigen::Matrix2cd green_matrix(const BathSpec& b, const SystemParams& p, double k, double omega) {
    return green_matrix(full_matrix(b, p, k, omega));
}

MarkovRates markov_rates(const BathSpec& b, double k, double omega0) {
    const double rho = env_density_of_states(b, k, omega0);
    return {kPi * rho * b.kappa_c * b.kappa_c, kPi * rho * b.kappa_x * b.kappa_x,
            kPi * rho * b.kappa_c * b.kappa_x};
}

BathSpec bath_for_rates(double gamma_c, double gamma_x, double k, double omega0, double c_light,
                        double omega_min, double omega_max) {
    if (gamma_c < 0.0 || gamma_x < 0.0) {
        throw DomainError("bath_for_rates: rates must be non-negative");
    }
    BathSpec b{c_light, 0.0, 0.0, omega_min, omega_max};
    b.validate();
    const double rho = env_density_of_states(b, k, omega0);
    b.kappa_c = std::sqrt(gamma_c / (kPi * rho));
    b.kappa_x = std::sqrt(gamma_x / (kPi * rho));
    return b;
}

SystemParams with_bath_rates(SystemParams p, const BathSpec& b, double k) {
    const MarkovRates r = markov_rates(b, k, p.eps0);
    p.gamma_c = r.gamma_c;
    p.gamma_x = r.gamma_x;
    return p;
}

Eigen::Matrix2cd markov_kernel(const SystemParams& p) {
    const double cross = std::sqrt(p.gamma_c * p.gamma_x);
    Eigen::Matrix2cd g;
    g << p.gamma_c, cross,
         cross, p.gamma_x;
    return g;
}

std::array<cplx, 2> quasi_modes(const BathSpec& b, const SystemParams& p, double k, std::size_t nodes) {
    SystemParams seed_params = with_bath_rates(p, b, k);
    seed_params.gamma_nr_c = 0.0;
    seed_params.gamma_nr_x = 0.0;
    const BranchPair seed = eigen_branches(seed_params, k);
    const KineticEnergies e = kinetic_energies(p, k);

    std::array<cplx, 2> roots{seed.lower.omega, seed.upper.omega};
    const double scale = std::max({1.0, p.g_rabi, seed_params.gamma_c + seed_params.gamma_x});
    for (cplx& w : roots) {
        bool converged = false;
        for (int it = 0; it < 200 && !converged; ++it) {
            const Eigen::Matrix2cd gt = kernel_freq(b, k, w.real(), nodes);
            Eigen::Matrix2cd h;
            h << e.photon - p.eps0, p.g_rabi,
                 p.g_rabi, e.exciton - p.eps0;
            h -= cplx(0.0, 1.0) * gt;
            const Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(h, false);
            const cplx w_rel = w - p.eps0;
            cplx best = es.eigenvalues()(0);
            if (std::abs(es.eigenvalues()(1) - w_rel) < std::abs(best - w_rel)) {
                best = es.eigenvalues()(1);
            }
            const cplx next = best + p.eps0;
            converged = std::abs(next - w) <= 1e-12 * scale;
            w = next;
        }
        if (!converged) {
            throw NumericalError("quasi_modes: fixed-point iteration did not converge");
        }
    }
    if (roots[1].real() < roots[0].real()) {
        std::swap(roots[0], roots[1]);
    }
    return roots;
}

}  // namespace ioxsim
