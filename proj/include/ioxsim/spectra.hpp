// spectra.hpp: memoryless power spectrum, scattering amplitudes and the
// reflection/absorption spectra of the cavity with extra nonradiative baths.

#pragma once

#include "ioxsim/params.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ioxsim {

// Input photon distribution n(omega) >= 0 of the common bath.
class InputOccupation {
public:
    InputOccupation() = default;   // n = 1

    static InputOccupation constant(double n);
    // Piecewise-linear interpolation, clamped at the table ends.
    static InputOccupation tabulated(std::vector<double> omega, std::vector<double> n);

    double operator()(double omega) const;

private:
    double constant_ = 1.0;
    std::vector<double> omega_;
    std::vector<double> n_;
};

// Power spectrum at (k, omega). nullopt marks evaluation on a real pole
// (a bound state in the continuum), where the expression is not a number.
std::optional<double> power_spectrum(const SystemParams& p, double k, double omega,
                                     const InputOccupation& n = {});

// Single common bath (no nonradiative loss). nullopt when M is singular.
std::optional<cplx> scattering_amplitude_single_bath(const SystemParams& p, double k, double omega);

// Channels in order: common bath, exciton loss bath, photon loss bath.
// Density-of-states ratios are absorbed in the rates, so the matrix acts on
// flux-normalized amplitudes. nullopt when M' is singular.
std::optional<Eigen::Matrix3cd> scattering_matrix_three_bath(const SystemParams& p, double k,
                                                             double omega);

struct AbsorptionParts {
    double photon_loss;   // A_gamma, weight of the photon loss channel
    double exciton_loss;  // A_m, weight of the exciton loss channel
};

// Closed-form absorption weights. Throws NumericalError on a real pole.
AbsorptionParts absorption_parts(const SystemParams& p, double k, double omega);

// |S_11|^2 from the three-bath scattering matrix.
double reflection(const SystemParams& p, double k, double omega);
// gamma_nr_c * A_gamma + gamma_nr_x * A_m
double absorption(const SystemParams& p, double k, double omega);

// |I - (A_gamma + A_m) n|, which vanishes identically.
double power_absorption_residual(const SystemParams& p, double k, double omega,
                                 const InputOccupation& n = {});

enum class SpectrumKind { Power, Reflection, Absorption };

struct SpectrumGrid {
    std::vector<double> k_values;
    std::vector<double> omega_values;
    std::vector<double> intensity;          // row-major, one row per k
    std::vector<unsigned char> divergent;   // same layout; 1 on a real pole
    SpectrumKind kind = SpectrumKind::Power;

    double at(std::size_t ik, std::size_t iw) const { return intensity[ik * omega_values.size() + iw]; }
    std::span<const double> row(std::size_t ik) const {
        return {intensity.data() + ik * omega_values.size(), omega_values.size()};
    }
};

// Evaluates one kind of spectrum on the (k, omega) grid with `threads`
// workers (0 = hardware concurrency). Both axes must be strictly increasing.
SpectrumGrid compute_spectrum_grid(const SystemParams& p, std::span<const double> k_values,
                                   std::span<const double> omega_values, SpectrumKind kind,
                                   const InputOccupation& n = {}, unsigned threads = 1);

// eps0 +- 8 max(g_R, total linewidth) sampled at `points` points.
std::vector<double> default_omega_grid(const SystemParams& p, std::size_t points = 2001);

// Indices of strict interior local maxima.
std::vector<std::size_t> local_maxima(std::span<const double> values);

// Rational fit I(w) = N(w) / Q(w) of a sampled two-mode spectrum, with Q a
// real monic quartic and N a real quadratic. The fitted pole pairs locate the
// modes even when the lineshape shows a single maximum.
struct SpectralPoleFit {
    cplx lower;   // pole with the smaller real part, Im < 0
    cplx upper;
    double relative_residual = 0.0;   // rms misfit / rms intensity
};

SpectralPoleFit fit_spectral_poles(std::span<const double> omega, std::span<const double> intensity);

}  // namespace ioxsim
