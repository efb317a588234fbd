// bath_oracle.hpp: brute-force check of the memoryless model. The continuum
// is replaced by N discrete modes and the single-excitation problem
// (photon, exciton, N bath modes) is diagonalized exactly.

#pragma once

#include "ioxsim/bath_kernel.hpp"
#include "ioxsim/dynamics.hpp"
#include "ioxsim/params.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ioxsim {

struct DiscretizedBath {
    std::vector<double> mode_freqs;
    std::vector<double> coupling_c;   // g_j^C
    std::vector<double> coupling_x;   // g_j^X
    double spacing = 0.0;             // uniform mode spacing
    double k = 0.0;

    std::size_t size() const { return mode_freqs.size(); }
};

struct DiscretizationOptions {
    std::size_t modes = 4000;
    double taper_fraction = 0.05;   // cosine roll-off length at each window end
};

// Uniform midpoint grid on the bath window with g_j = kappa sqrt(rho(w_j) dw),
// rolled off smoothly near both window ends.
DiscretizedBath discretize_bath(const BathSpec& b, double k, const DiscretizationOptions& opts = {});

// Golden-rule rates pi sum_j g_j^A g_j^B delta(w0 - w_j) of the discretized
// bath, read off at the mode nearest to w0.
MarkovRates discretized_rates(const DiscretizedBath& d, double omega0);

// Real symmetric matrix in the basis (photon, exciton, mode 1..N). Radiative
// rates in p are ignored; the bath supplies them.
Eigen::MatrixXd single_excitation_matrix(const DiscretizedBath& d, const SystemParams& p);

struct OracleEigensystem {
    std::vector<double> energies;
    std::vector<double> photon_amp;    // photon component of each eigenvector
    std::vector<double> exciton_amp;   // exciton component of each eigenvector
    double spacing = 0.0;
};

// Exact eigensystem. Uses the secular-equation solver when the photon and
// exciton couplings are proportional (a single bright combination couples to
// the bath), otherwise the dense solver.
OracleEigensystem diagonalize(const DiscretizedBath& d, const SystemParams& p);
OracleEigensystem diagonalize_dense(const DiscretizedBath& d, const SystemParams& p);

// Throws DomainError unless N >= 2000, p carries no nonradiative loss and the
// window covers eps0 +- 50 times the largest bath rate and g_R.
void check_oracle_preconditions(const DiscretizedBath& d, const SystemParams& p);

// System Green's matrix sum_n u_n u_n^T / (w + i eta - E_n).
Eigen::Matrix2cd oracle_green(const OracleEigensystem& e, double omega, double eta);

// Broadened emission spectrum -4 Im Tr G_sys(w + i eta). eta <= 0 selects the
// default broadening of two mode spacings.
std::vector<double> oracle_spectrum(const OracleEigensystem& e, std::span<const double> omega_grid,
                                    double eta = 0.0);
std::vector<double> oracle_spectrum(const DiscretizedBath& d, const SystemParams& p,
                                    std::span<const double> omega_grid, double eta = 0.0);

// -4 Im Tr (w + i eta - H_k)^-1 of the memoryless model, the quantity the
// oracle spectrum converges to.
std::vector<double> broadened_model_spectrum(const SystemParams& p, double k, std::span<const double> omega_grid,
                                             double eta);

// Effective damping Im G^-1(w + i eta) - eta of the oracle; its entries are
// the emerging (gC, cross; cross, gX) matrix.
Eigen::Matrix2d extract_damping(const OracleEigensystem& e, double omega, double eta = 0.0);

// Exact amplitudes of the photon and exciton starting from `initial` with
// the bath empty. Throws DomainError when the grid reaches the recurrence
// time pi / spacing.
std::vector<AmplitudeState> oracle_dynamics(const OracleEigensystem& e, double eps0, const AmplitudeState& initial,
                                            std::span<const double> t_grid);
std::vector<AmplitudeState> oracle_dynamics(const DiscretizedBath& d, const SystemParams& p,
                                            const AmplitudeState& initial, std::span<const double> t_grid);

namespace detail {

// Eigenpairs of the symmetric arrowhead matrix [[alpha, z^T], [z, diag(d)]].
// values are ascending; components(0, n) is the head entry of eigenvector n
// and components(1 + r, n) its entry on pole tracked[r]. Exposed for testing.
struct ArrowheadResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd components;
};

ArrowheadResult arrowhead_eigen(double alpha, const Eigen::VectorXd& z, const Eigen::VectorXd& d,
                                std::span<const Eigen::Index> tracked = {});

}  // namespace detail

}  // namespace ioxsim
