// params.hpp: physical constants of the emitter-cavity system and the
// memoryless complex poles derived from them.
//
// Units: hbar = 1 and the reference photon decay rate is 1, so every energy,
// rate and frequency is measured in units of that rate. The in-plane momentum
// is the dimensionless k~ = hbar k / sqrt(2 m_C), which makes the photon
// kinetic term exactly k~^2.

#pragma once

#include <complex>

namespace ioxsim {

using cplx = std::complex<double>;

struct SystemParams {
    double eps0 = 1000.0;      // exciton transition energy
    double delta = 0.0;        // photon-exciton detuning
    double g_rabi = 0.0;       // Rabi coupling
    double mass_ratio = 0.0;   // m_C / m_X, 0 means a flat exciton band
    double gamma_c = 1.0;      // photon decay into the common bath
    double gamma_x = 0.0;      // exciton decay into the common bath
    double gamma_nr_c = 0.0;   // nonradiative photon loss
    double gamma_nr_x = 0.0;   // nonradiative exciton loss

    // Throws DomainError unless all rates and g_rabi are >= 0, eps0 > 0 and
    // mass_ratio lies in [0, 1].
    void validate() const;

    // True when eps0 is not at least 100x every rate and the Rabi coupling,
    // i.e. the memoryless approximation is questionable.
    bool markov_advisory() const;

    // gamma_c + gamma_x + gamma_nr_c + gamma_nr_x
    double total_linewidth() const;

    bool has_nonradiative_loss() const { return gamma_nr_c > 0.0 || gamma_nr_x > 0.0; }
};

struct KineticEnergies {
    double photon;
    double exciton;
};

KineticEnergies kinetic_energies(const SystemParams& p, double k);

// Diagonal and off-diagonal entries of the effective non-Hermitian
// Hamiltonian. Nonradiative rates are folded into z_c and z_x.
struct ComplexPole {
    cplx z_c;
    cplx z_x;
    cplx g_tilde;
};

ComplexPole complex_poles(const SystemParams& p, double k);

// Energy and linewidth detunings between the photon and exciton poles.
// Computed without going through eps0 so they stay exact when eps0 is large.
struct Detunings {
    double d_eps;     // Re(z_c - z_x)
    double d_gamma;   // -Im(z_c - z_x)
};

Detunings detunings(const SystemParams& p, double k);

}  // namespace ioxsim
