#include "ioxsim/spectra.hpp"

#include "ioxsim/core_model.hpp"
#include "ioxsim/errors.hpp"
#include "ioxsim/matrix2.hpp"
#include "parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace ioxsim {

// ----------------------------------------------------------------------------
// Input occupation

InputOccupation InputOccupation::constant(double n) {
    if (!(n >= 0.0) || !std::isfinite(n)) {
        throw DomainError("InputOccupation: n must be finite and >= 0");
    }
    InputOccupation occ;
    occ.constant_ = n;
    return occ;
}

InputOccupation InputOccupation::tabulated(std::vector<double> omega, std::vector<double> n) {
    if (omega.empty() || omega.size() != n.size()) {
        throw DomainError("InputOccupation: table axes must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!(n[i] >= 0.0)) {
            throw DomainError("InputOccupation: n must be >= 0 everywhere");
        }
        if (i > 0 && !(omega[i] > omega[i - 1])) {
            throw DomainError("InputOccupation: omega table must be strictly increasing");
        }
    }
    InputOccupation occ;
    occ.omega_ = std::move(omega);
    occ.n_ = std::move(n);
    return occ;
}

double InputOccupation::operator()(double omega) const {
    if (omega_.empty()) {
        return constant_;
    }
    if (omega <= omega_.front()) {
        return n_.front();
    }
    if (omega >= omega_.back()) {
        return n_.back();
    }
    const auto it = std::upper_bound(omega_.begin(), omega_.end(), omega);
    const std::size_t hi = static_cast<std::size_t>(it - omega_.begin());
    const std::size_t lo = hi - 1;
    const double t = (omega - omega_[lo]) / (omega_[hi] - omega_[lo]);
    return (1.0 - t) * n_[lo] + t * n_[hi];
}

// ----------------------------------------------------------------------------
// Memoryless spectra

namespace {

struct PoleData {
    ComplexPole z;
    cplx lower;
    cplx upper;
};

PoleData pole_data(const SystemParams& p, double k) {
    const BranchPair br = eigen_branches(p, k);
    return {complex_poles(p, k), br.lower.omega, br.upper.omega};
}

bool on_pole(double omega, cplx pole) {
    const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(omega));
    return std::abs(omega - pole) <= tol;
}

// |omega - omega_L|^2 |omega - omega_U|^2, or nullopt on a real pole
std::optional<double> mode_denominator(const PoleData& d, double omega) {
    if (on_pole(omega, d.lower) || on_pole(omega, d.upper)) {
        return std::nullopt;
    }
    return std::norm(omega - d.lower) * std::norm(omega - d.upper);
}

Eigen::Matrix2cd response_matrix(const ComplexPole& z, double omega) {
    Eigen::Matrix2cd m;
    m << omega - z.z_c, -z.g_tilde,
         -z.g_tilde, omega - z.z_x;
    return m;
}

}  // namespace

std::optional<double> power_spectrum(const SystemParams& p, double k, double omega,
                                     const InputOccupation& n) {
    const PoleData d = pole_data(p, k);
    const auto den = mode_denominator(d, omega);
    if (!den) {
        return std::nullopt;
    }
    const cplx g = d.z.g_tilde;
    const double a = 4.0 * (std::norm(g) + std::norm(omega - d.z.z_x));
    const double b = 4.0 * (std::norm(g) + std::norm(omega - d.z.z_c));
    const double c = 8.0 * ((2.0 * omega - d.z.z_c - d.z.z_x) * std::conj(g)).real();
    const double numerator = a * p.gamma_c + b * p.gamma_x + c * std::sqrt(p.gamma_c * p.gamma_x);
    return numerator / *den * n(omega);
}

std::optional<cplx> scattering_amplitude_single_bath(const SystemParams& p, double k, double omega) {
    if (p.has_nonradiative_loss()) {
        throw DomainError("scattering_amplitude_single_bath: nonradiative rates must be zero");
    }
    const auto green = inverse2x2(response_matrix(complex_poles(p, k), omega));
    if (!green) {
        return std::nullopt;
    }
    const Eigen::Vector2cd w(std::sqrt(p.gamma_c), std::sqrt(p.gamma_x));
    const cplx inner = w.transpose() * (*green) * w;
    return cplx(1.0, 0.0) - cplx(0.0, 2.0) * inner;
}

std::optional<Eigen::Matrix3cd> scattering_matrix_three_bath(const SystemParams& p, double k,
                                                             double omega) {
    const auto green = inverse2x2(response_matrix(complex_poles(p, k), omega));
    if (!green) {
        return std::nullopt;
    }
    // columns: couplings of each bath to (photon, exciton)
    Eigen::Matrix<cplx, 2, 3> w;
    w << std::sqrt(p.gamma_c), 0.0, std::sqrt(p.gamma_nr_c),
         std::sqrt(p.gamma_x), std::sqrt(p.gamma_nr_x), 0.0;
    return Eigen::Matrix3cd::Identity() - cplx(0.0, 2.0) * (w.transpose() * (*green) * w);
}

AbsorptionParts absorption_parts(const SystemParams& p, double k, double omega) {
    const PoleData d = pole_data(p, k);
    const auto den = mode_denominator(d, omega);
    if (!den) {
        throw NumericalError("absorption_parts: evaluation on a real pole");
    }
    const cplx g = d.z.g_tilde;
    const double cross = std::sqrt(p.gamma_c * p.gamma_x);
    const cplx wx = omega - d.z.z_x;
    const cplx wc = omega - d.z.z_c;
    const double photon = 4.0 * (p.gamma_c * std::norm(wx) + p.gamma_x * std::norm(g)) +
                          8.0 * cross * (std::conj(g) * wx).real();
    const double exciton = 4.0 * (p.gamma_c * std::norm(g) + p.gamma_x * std::norm(wc)) +
                           8.0 * cross * (std::conj(g) * wc).real();
    return {photon / *den, exciton / *den};
}

double reflection(const SystemParams& p, double k, double omega) {
    const auto s = scattering_matrix_three_bath(p, k, omega);
    if (!s) {
        throw NumericalError("reflection: evaluation on a real pole");
    }
    return std::norm((*s)(0, 0));
}

double absorption(const SystemParams& p, double k, double omega) {
    const AbsorptionParts a = absorption_parts(p, k, omega);
    return p.gamma_nr_c * a.photon_loss + p.gamma_nr_x * a.exciton_loss;
}

double power_absorption_residual(const SystemParams& p, double k, double omega,
                                 const InputOccupation& n) {
    const auto power = power_spectrum(p, k, omega, n);
    if (!power) {
        throw NumericalError("power_absorption_residual: evaluation on a real pole");
    }
    const AbsorptionParts a = absorption_parts(p, k, omega);
    return std::abs(*power - (a.photon_loss + a.exciton_loss) * n(omega));
}

// ----------------------------------------------------------------------------
// Grids and lineshape analysis

namespace {

void require_increasing(std::span<const double> axis, const char* what) {
    if (axis.empty()) {
        throw DomainError(std::string("compute_spectrum_grid: empty ") + what);
    }
    for (std::size_t i = 1; i < axis.size(); ++i) {
        if (!(axis[i] > axis[i - 1])) {
            throw DomainError(std::string("compute_spectrum_grid: ") + what + " must be strictly increasing");
        }
    }
}

}  // namespace

SpectrumGrid compute_spectrum_grid(const SystemParams& p, std::span<const double> k_values,
                                   std::span<const double> omega_values, SpectrumKind kind,
                                   const InputOccupation& n, unsigned threads) {
    p.validate();
    require_increasing(k_values, "k axis");
    require_increasing(omega_values, "omega axis");

    SpectrumGrid grid;
    grid.kind = kind;
    grid.k_values.assign(k_values.begin(), k_values.end());
    grid.omega_values.assign(omega_values.begin(), omega_values.end());
    const std::size_t nw = omega_values.size();
    grid.intensity.assign(k_values.size() * nw, 0.0);
    grid.divergent.assign(k_values.size() * nw, 0);

    detail::parallel_for(k_values.size(), threads, [&](std::size_t ik) {
        const double k = k_values[ik];
        for (std::size_t iw = 0; iw < nw; ++iw) {
            const std::size_t slot = ik * nw + iw;
            const double w = omega_values[iw];
            switch (kind) {
            case SpectrumKind::Power: {
                const auto v = power_spectrum(p, k, w, n);
                if (v) {
                    grid.intensity[slot] = *v;
                } else {
                    grid.intensity[slot] = std::numeric_limits<double>::quiet_NaN();
                    grid.divergent[slot] = 1;
                }
                break;
            }
            case SpectrumKind::Reflection:
            case SpectrumKind::Absorption: {
                const auto s = scattering_matrix_three_bath(p, k, w);
                if (!s) {
                    grid.intensity[slot] = std::numeric_limits<double>::quiet_NaN();
                    grid.divergent[slot] = 1;
                } else if (kind == SpectrumKind::Reflection) {
                    grid.intensity[slot] = std::norm((*s)(0, 0));
                } else {
                    grid.intensity[slot] = absorption(p, k, w);
                }
                break;
            }
            }
        }
    });
    return grid;
}

std::vector<double> default_omega_grid(const SystemParams& p, std::size_t points) {
    if (points < 2) {
        throw DomainError("default_omega_grid: need at least two points");
    }
    double half = 8.0 * std::max(p.g_rabi, p.total_linewidth());
    if (half <= 0.0) {
        half = 8.0;
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = p.eps0 - half + 2.0 * half * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

std::vector<std::size_t> local_maxima(std::span<const double> values) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (values[i] > values[i - 1] && values[i] > values[i + 1]) {
            out.push_back(i);
        }
    }
    return out;
}

SpectralPoleFit fit_spectral_poles(std::span<const double> omega, std::span<const double> intensity) {
    if (omega.size() != intensity.size() || omega.size() < 8) {
        throw DomainError("fit_spectral_poles: need at least 8 matching samples");
    }
    const double center = 0.5 * (omega.front() + omega.back());
    const double scale = 0.5 * (omega.back() - omega.front());
    if (!(scale > 0.0)) {
        throw DomainError("fit_spectral_poles: omega axis must span a nonzero range");
    }

    // I(x) Q(x) - N(x) = 0 with Q monic of degree 4, linear in the unknowns
    // (q0..q3, n0..n2).
    const auto rows = static_cast<Eigen::Index>(omega.size());
    Eigen::MatrixXd a(rows, 7);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double x = (omega[static_cast<std::size_t>(i)] - center) / scale;
        const double y = intensity[static_cast<std::size_t>(i)];
        double xp = 1.0;
        for (int j = 0; j < 4; ++j) {
            a(i, j) = y * xp;
            xp *= x;
        }
        a(i, 4) = -1.0;
        a(i, 5) = -x;
        a(i, 6) = -x * x;
        rhs(i) = -y * xp;
    }
    const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);

    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    companion.block<3, 3>(1, 0).setIdentity();
    for (int j = 0; j < 4; ++j) {
        companion(j, 3) = -sol(j);
    }
    const Eigen::EigenSolver<Eigen::Matrix4d> es(companion, false);
    std::vector<cplx> poles;
    for (Eigen::Index i = 0; i < 4; ++i) {
        const cplx r = es.eigenvalues()(i);
        if (r.imag() < 0.0) {
            poles.emplace_back(center + scale * r.real(), scale * r.imag());
        }
    }
    if (poles.size() != 2) {
        throw NumericalError("fit_spectral_poles: spectrum is not a two-pole lineshape");
    }
    std::sort(poles.begin(), poles.end(), [](cplx l, cplx r) { return l.real() < r.real(); });

    double misfit = 0.0;
    double norm = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double x = (omega[static_cast<std::size_t>(i)] - center) / scale;
        const double q = sol(0) + x * (sol(1) + x * (sol(2) + x * (sol(3) + x)));
        const double num = sol(4) + x * (sol(5) + x * sol(6));
        const double y = intensity[static_cast<std::size_t>(i)];
        misfit += (y - num / q) * (y - num / q);
        norm += y * y;
    }
    return {poles[0], poles[1], norm > 0.0 ? std::sqrt(misfit / norm) : 0.0};
}

}  // namespace ioxsim
