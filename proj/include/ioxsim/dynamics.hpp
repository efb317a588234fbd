// dynamics.hpp: mean field amplitudes of the photon and exciton with the
// environment in its vacuum.

#pragma once

#include "ioxsim/params.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ioxsim {

struct AmplitudeState {
    cplx c;        // photon amplitude
    cplx x;        // exciton amplitude
    double t = 0.0;

    double photon_population() const { return std::norm(c); }
    double exciton_population() const { return std::norm(x); }
    double total_population() const { return std::norm(c) + std::norm(x); }
};

// Closed-form two-mode solution, evolving `initial` (taken at initial.t) to
// time t >= initial.t. Throws DomainError at an exceptional point, where the
// expression has no finite form; use evolve_ode there.
AmplitudeState evolve_analytic(const SystemParams& p, double k, const AmplitudeState& initial, double t);

struct BicPopulations {
    double photon;    // |c(t)|^2
    double exciton;   // |x(t)|^2
    double t;
};

// Populations at k = 0 for x(0) = 1, c(0) = 0 when the detuning sits exactly
// on the bound-state condition. Throws DomainError off the condition or with
// nonradiative losses.
BicPopulations bic_amplitudes(const SystemParams& p, double t);

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    double initial_step = 1e-3;
};

// Adaptive Dormand-Prince integration of i d/dt (c, x) = H_k (c, x). Valid at
// exceptional points. Throws NumericalError when the step control fails.
std::vector<AmplitudeState> evolve_ode(const SystemParams& p, double k, const AmplitudeState& initial,
                                       std::span<const double> t_grid, const OdeOptions& opts = {});

}  // namespace ioxsim
