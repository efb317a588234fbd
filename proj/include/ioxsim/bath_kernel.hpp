// bath_kernel.hpp: the external photon continuum behind the nonideal mirror.
// Bath photons have frequency w(q) = c sqrt(k^2 + q^2) with q >= 0 and couple
// to the cavity photon and the emitter with flat amplitudes kappa_c, kappa_x.
// Everything else in the memoryless model (rates, the cross damping) follows
// from the kernels computed here.

#pragma once

#include "ioxsim/params.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ioxsim {

struct BathSpec {
    double c_light = 1.0;
    double kappa_c = 0.0;
    double kappa_x = 0.0;
    double omega_min = 500.0;    // quadrature window on the bath frequency
    double omega_max = 1500.0;

    // Throws DomainError on c <= 0, negative couplings or an empty window.
    void validate() const;

    // Half-line q interval [q_a, q_b] covered by the window at momentum k.
    // q_a is 0 when omega_min lies below the light cone c k.
    std::array<double, 2> q_range(double k) const;
};

// Number of Simpson nodes used by the q quadratures unless told otherwise.
inline constexpr std::size_t kDefaultQuadratureNodes = 4001;

// (dw/dq)^-1 = w / (c sqrt(w^2 - c^2 k^2)). Throws DomainError for w <= c k.
double env_density_of_states(const BathSpec& b, double k, double omega);

// Gamma^{AB}(tau) = int dq kappa_A kappa_B exp(-i w(q) tau) over the window,
// with index 0 the photon and 1 the emitter. Zero for tau < 0.
Eigen::Matrix2cd kernel_time(const BathSpec& b, double k, double tau,
                             std::size_t nodes = kDefaultQuadratureNodes);

// Gamma~^{AB}(w): real part pi rho kappa_A kappa_B inside the radiative part
// of the window, imaginary part the principal value
// P int dq kappa_A kappa_B / (w - w(q)). Throws NumericalError when the pole
// falls within one quadrature cell of a window end.
Eigen::Matrix2cd kernel_freq(const BathSpec& b, double k, double omega,
                             std::size_t nodes = kDefaultQuadratureNodes);

struct MemoryKernel {
    std::vector<double> omega_grid;
    std::vector<Eigen::Matrix2cd> gamma_tilde;
};

MemoryKernel kernel_freq_grid(const BathSpec& b, double k, std::span<const double> omega_grid,
                              std::size_t nodes = kDefaultQuadratureNodes, unsigned threads = 1);

// Independent flat-band loss bath acting on a single mode. With the default
// infinite window it is memoryless and the kernel is just `rate`.
struct LossChannel {
    double rate = 0.0;
    double omega_min = -std::numeric_limits<double>::infinity();
    double omega_max = std::numeric_limits<double>::infinity();

    cplx kernel(double omega) const;
};

// M = w 1 - [[eps_C, g_R], [g_R, eps_X]] + i gamma_tilde. The radiative rates
// and nonradiative rates of `p` are not used; the kernel supplies the damping.
Eigen::Matrix2cd full_matrix(const Eigen::Matrix2cd& gamma_tilde, const SystemParams& p, double k,
                             double omega);
Eigen::Matrix2cd full_matrix(const BathSpec& b, const SystemParams& p, double k, double omega);

// M' = M + i diag(photon loss kernel, exciton loss kernel)
Eigen::Matrix2cd full_matrix_lossy(const Eigen::Matrix2cd& gamma_tilde, const LossChannel& photon_loss,
                                   const LossChannel& exciton_loss, const SystemParams& p, double k,
                                   double omega);
Eigen::Matrix2cd full_matrix_lossy(const BathSpec& b, const LossChannel& photon_loss,
                                   const LossChannel& exciton_loss, const SystemParams& p, double k,
                                   double omega);

// G = M^-1. Throws NumericalError when M is singular.
Eigen::Matrix2cd green_matrix(const Eigen::Matrix2cd& m);
Eigen::Matrix2cd green_matrix(const BathSpec& b, const SystemParams& p, double k, double omega);

struct MarkovRates {
    double gamma_c = 0.0;
    double gamma_x = 0.0;
    double cross = 0.0;
};

// Rates pi rho(w0) kappa_A kappa_B at the reference frequency w0.
MarkovRates markov_rates(const BathSpec& b, double k, double omega0);

// Couplings that realize the requested rates at w0 (and momentum k) for the
// given light speed and window.
BathSpec bath_for_rates(double gamma_c, double gamma_x, double k, double omega0, double c_light,
                        double omega_min, double omega_max);

// Copy of p whose radiative rates are those of the bath at (k, eps0).
SystemParams with_bath_rates(SystemParams p, const BathSpec& b, double k);

// The constant kernel [[gC, sqrt(gC gX)], [sqrt(gC gX), gX]] of the
// memoryless model; with it full_matrix equals w 1 - H_k.
Eigen::Matrix2cd markov_kernel(const SystemParams& p);

// Complex roots of det M(w) = 0 seeded at the memoryless eigenvalues. The
// kernel is evaluated at Re w and the roots are refined to a fixed point.
// Returns {lower, upper}. Throws NumericalError without convergence.
std::array<cplx, 2> quasi_modes(const BathSpec& b, const SystemParams& p, double k,
                                std::size_t nodes = kDefaultQuadratureNodes);

}  // namespace ioxsim
