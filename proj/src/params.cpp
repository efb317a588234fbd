#include "ioxsim/params.hpp"

#include "ioxsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ioxsim {

namespace {

void require_non_negative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string("SystemParams: ") + name + " must be finite and >= 0");
    }
}

}  // namespace

void SystemParams::validate() const {
    if (!(eps0 > 0.0) || !std::isfinite(eps0)) {
        throw DomainError("SystemParams: eps0 must be finite and > 0");
    }
    if (!std::isfinite(delta)) {
        throw DomainError("SystemParams: delta must be finite");
    }
    require_non_negative(g_rabi, "g_rabi");
    require_non_negative(gamma_c, "gamma_c");
    require_non_negative(gamma_x, "gamma_x");
    require_non_negative(gamma_nr_c, "gamma_nr_c");
    require_non_negative(gamma_nr_x, "gamma_nr_x");
    if (!(mass_ratio >= 0.0 && mass_ratio <= 1.0)) {
        throw DomainError("SystemParams: mass_ratio must lie in [0, 1]");
    }
}

bool SystemParams::markov_advisory() const {
    const double largest = std::max({gamma_c, gamma_x, gamma_nr_c, gamma_nr_x, g_rabi});
    return eps0 < 100.0 * largest;
}

double SystemParams::total_linewidth() const {
    return gamma_c + gamma_x + gamma_nr_c + gamma_nr_x;
}

KineticEnergies kinetic_energies(const SystemParams& p, double k) {
    const double k2 = k * k;
    return {p.eps0 + p.delta + k2, p.eps0 + p.mass_ratio * k2};
}

ComplexPole complex_poles(const SystemParams& p, double k) {
    const auto [eps_c, eps_x] = kinetic_energies(p, k);
    return {
        cplx(eps_c, -(p.gamma_c + p.gamma_nr_c)),
        cplx(eps_x, -(p.gamma_x + p.gamma_nr_x)),
        cplx(p.g_rabi, -std::sqrt(p.gamma_c * p.gamma_x)),
    };
}

Detunings detunings(const SystemParams& p, double k) {
    return {
        p.delta + (1.0 - p.mass_ratio) * k * k,
        (p.gamma_c + p.gamma_nr_c) - (p.gamma_x + p.gamma_nr_x),
    };
}

}  // namespace ioxsim
