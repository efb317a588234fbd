// core_model.hpp: memoryless effective Hamiltonian of a photon mode and an
// emitter sharing one radiative bath, its complex eigenmode branches, and the
// exceptional-point and bound-state-in-the-continuum conditions.

#pragma once

#include "ioxsim/params.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace ioxsim {

enum class Branch { Lower, Upper };

struct ComplexBranch {
    cplx omega;
    Branch label = Branch::Lower;
    // (photon, exciton) amplitudes, unit norm, first nonzero entry real > 0
    Eigen::Vector2cd eigvec = Eigen::Vector2cd::Zero();
    double k = 0.0;
};

struct BranchPair {
    ComplexBranch lower;
    ComplexBranch upper;
    cplx discriminant;          // (z_c - z_x)^2 + 4 g~^2
    bool degenerate = false;    // eigenvalues coincide within tolerance
    bool exceptional = false;   // degenerate and defective: one shared eigenvector
};

// Relative tolerance used for EP/BiC condition matching and for flagging a
// vanishing discriminant.
inline constexpr double kConditionTol = 1e-9;

// [[z_c, g~], [g~, z_x]]
Eigen::Matrix2cd effective_hamiltonian(const SystemParams& p, double k);

// Principal square root with the cut placed so that a purely imaginary
// result always has a non-negative imaginary part.
cplx principal_sqrt(cplx z);

cplx discriminant(const SystemParams& p, double k);

// Lower branch takes the minus sign in front of the principal square root,
// upper the plus sign. At an EP both entries carry the coalesced eigenvector.
BranchPair eigen_branches(const SystemParams& p, double k);

struct TrackedBranches {
    std::vector<double> k;
    std::vector<ComplexBranch> lower;
    std::vector<ComplexBranch> upper;
};

// Continuity-sorted branches along an increasing k grid. Assignment follows
// eigenvector overlap with the previous point and falls back to eigenvalue
// proximity near coalescence.
TrackedBranches track_branches(const SystemParams& p, std::span<const double> kgrid);

struct ExceptionalPoint {
    int sign = +1;               // +1: d_eps = +2 sqrt(gC gX), d_gamma = -2 g_R
    double d_eps_ep = 0.0;
    double d_gamma_ep = 0.0;
    std::optional<double> k_ep;  // ring radius in k~ when reachable
    double condition_residual = 0.0;  // |d_gamma - d_gamma_ep|
};

// Sign branches whose linewidth condition is met by the (k independent)
// rates. Empty when neither is.
std::vector<ExceptionalPoint> ep_conditions(const SystemParams& p);

struct BicCondition {
    double d_eps_bic = 0.0;
    std::optional<double> k_bic;
    // false when nonradiative losses are present; the formula value is still
    // returned but no mode is exactly undamped
    bool exact = true;
    Branch undamped_branch = Branch::Lower;
    double residual_im = 0.0;    // |Im omega| of the least damped branch at d_eps_bic
};

// Throws DomainError when gamma_c * gamma_x == 0.
BicCondition bic_condition(const SystemParams& p);

// Wavenumber k~ >= 0 at which the energy detuning reaches `target`.
std::optional<double> ring_wavenumber(const SystemParams& p, double target);

}  // namespace ioxsim
