#include "ioxsim/core_model.hpp"

#include "ioxsim/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ioxsim {

namespace {

Eigen::Vector2cd normalize_phase(Eigen::Vector2cd v) {
    const double norm = v.norm();
    if (norm == 0.0) {
        return v;
    }
    v /= norm;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > 1e-12) {
            v *= std::conj(v(i)) / mag;
            v(i) = cplx(mag, 0.0);
            break;
        }
    }
    return v;
}

// Null vector of (omega - H) given omega - z_c and omega - z_x. Uses the row
// with the larger cofactor so that a vanishing g~ is handled.
Eigen::Vector2cd kernel_vector(cplx w_minus_zc, cplx w_minus_zx, cplx g) {
    const Eigen::Vector2cd from_first(g, w_minus_zc);
    const Eigen::Vector2cd from_second(w_minus_zx, g);
    return from_first.squaredNorm() >= from_second.squaredNorm() ? from_first : from_second;
}

}  // namespace

Eigen::Matrix2cd effective_hamiltonian(const SystemParams& p, double k) {
    const ComplexPole z = complex_poles(p, k);
    Eigen::Matrix2cd h;
    h << z.z_c, z.g_tilde,
         z.g_tilde, z.z_x;
    return h;
}

cplx principal_sqrt(cplx z) {
    cplx r = std::sqrt(z);
    if (r.real() == 0.0 && r.imag() < 0.0) {
        r = -r;
    }
    return r;
}

namespace {

cplx relative_splitting(const SystemParams& p, double k) {
    const Detunings d = detunings(p, k);
    return cplx(d.d_eps, -d.d_gamma);
}

}  // namespace

cplx discriminant(const SystemParams& p, double k) {
    const cplx dz = relative_splitting(p, k);
    const cplx g = complex_poles(p, k).g_tilde;
    return dz * dz + 4.0 * g * g;
}

BranchPair eigen_branches(const SystemParams& p, double k) {
    const ComplexPole z = complex_poles(p, k);
    const cplx dz = relative_splitting(p, k);   // z_c - z_x
    const cplx g = z.g_tilde;
    const cplx disc = dz * dz + 4.0 * g * g;
    const cplx root = principal_sqrt(disc);
    const cplx sum = z.z_c + z.z_x;

    BranchPair out;
    out.discriminant = disc;
    out.lower.label = Branch::Lower;
    out.upper.label = Branch::Upper;
    out.lower.k = out.upper.k = k;

    const double scale = std::norm(dz) + 4.0 * std::norm(g);
    out.degenerate = std::abs(disc) <= kConditionTol * scale;

    if (!out.degenerate) {
        out.lower.omega = 0.5 * (sum - root);
        out.upper.omega = 0.5 * (sum + root);
        // omega - z_c and omega - z_x relative to the pole difference, which
        // avoids cancellation against a large eps0
        out.lower.eigvec = normalize_phase(kernel_vector(0.5 * (-dz - root), 0.5 * (dz - root), g));
        out.upper.eigvec = normalize_phase(kernel_vector(0.5 * (-dz + root), 0.5 * (dz + root), g));
        return out;
    }

    out.lower.omega = out.upper.omega = 0.5 * sum;
    if (scale == 0.0) {
        // H proportional to the identity: degenerate but not defective
        out.lower.eigvec = Eigen::Vector2cd(1.0, 0.0);
        out.upper.eigvec = Eigen::Vector2cd(0.0, 1.0);
        return out;
    }

    out.exceptional = true;
    Eigen::Matrix2cd h = effective_hamiltonian(p, k);
    h.diagonal().array() -= cplx(p.eps0, 0.0);
    Eigen::ComplexSchur<Eigen::Matrix2cd> schur(h);
    const Eigen::Vector2cd v = normalize_phase(schur.matrixU().col(0));
    out.lower.eigvec = out.upper.eigvec = v;
    return out;
}

TrackedBranches track_branches(const SystemParams& p, std::span<const double> kgrid) {
    if (kgrid.empty()) {
        throw DomainError("track_branches: empty k grid");
    }
    for (std::size_t i = 1; i < kgrid.size(); ++i) {
        if (!(kgrid[i] > kgrid[i - 1])) {
            throw DomainError("track_branches: k grid must be strictly increasing");
        }
    }

    TrackedBranches out;
    out.k.assign(kgrid.begin(), kgrid.end());
    out.lower.reserve(kgrid.size());
    out.upper.reserve(kgrid.size());

    BranchPair prev = eigen_branches(p, kgrid[0]);
    out.lower.push_back(prev.lower);
    out.upper.push_back(prev.upper);

    for (std::size_t i = 1; i < kgrid.size(); ++i) {
        BranchPair cur = eigen_branches(p, kgrid[i]);
        const ComplexBranch& a = out.lower.back();
        const ComplexBranch& b = out.upper.back();

        bool swap = false;
        bool by_value = prev.degenerate || cur.degenerate;
        if (!by_value) {
            const double same = std::abs(a.eigvec.dot(cur.lower.eigvec)) +
                                std::abs(b.eigvec.dot(cur.upper.eigvec));
            const double crossed = std::abs(a.eigvec.dot(cur.upper.eigvec)) +
                                   std::abs(b.eigvec.dot(cur.lower.eigvec));
            if (std::abs(same - crossed) > 1e-6) {
                swap = crossed > same;
            } else {
                by_value = true;
            }
        }
        if (by_value) {
            cplx pa = a.omega;
            cplx pb = b.omega;
            if (i >= 2) {
                // linear extrapolation through the coalescence
                const double t = (kgrid[i] - kgrid[i - 1]) / (kgrid[i - 1] - kgrid[i - 2]);
                pa += t * (a.omega - out.lower[i - 2].omega);
                pb += t * (b.omega - out.upper[i - 2].omega);
            }
            const double same = std::abs(pa - cur.lower.omega) + std::abs(pb - cur.upper.omega);
            const double crossed = std::abs(pa - cur.upper.omega) + std::abs(pb - cur.lower.omega);
            swap = crossed < same;
        }

        ComplexBranch lo = swap ? cur.upper : cur.lower;
        ComplexBranch hi = swap ? cur.lower : cur.upper;
        lo.label = Branch::Lower;
        hi.label = Branch::Upper;
        out.lower.push_back(lo);
        out.upper.push_back(hi);
        prev = cur;
    }
    return out;
}

std::optional<double> ring_wavenumber(const SystemParams& p, double target) {
    const double gap = target - p.delta;
    const double tol = kConditionTol * std::max(1.0, std::abs(target));
    const double stiffness = 1.0 - p.mass_ratio;   // d(d_eps)/d(k~^2)
    if (stiffness <= 0.0) {
        if (std::abs(gap) <= tol) {
            return 0.0;
        }
        return std::nullopt;
    }
    if (gap < -tol) {
        return std::nullopt;
    }
    return std::sqrt(std::max(gap, 0.0) / stiffness);
}

std::vector<ExceptionalPoint> ep_conditions(const SystemParams& p) {
    p.validate();
    const double d_gamma = detunings(p, 0.0).d_gamma;
    const double cross = std::sqrt(p.gamma_c * p.gamma_x);

    std::vector<ExceptionalPoint> out;
    for (int sign : {+1, -1}) {
        const double target_gamma = -sign * 2.0 * p.g_rabi;
        const double residual = std::abs(d_gamma - target_gamma);
        const double tol = kConditionTol * std::max({1.0, std::abs(d_gamma), 2.0 * p.g_rabi});
        if (residual > tol) {
            continue;
        }
        ExceptionalPoint ep;
        ep.sign = sign;
        ep.d_eps_ep = sign * 2.0 * cross;
        ep.d_gamma_ep = target_gamma;
        ep.k_ep = ring_wavenumber(p, ep.d_eps_ep);
        ep.condition_residual = residual;
        // with g_R = 0 and cross = 0 both signs describe the same point
        if (!out.empty() && out.front().d_eps_ep == ep.d_eps_ep) {
            continue;
        }
        out.push_back(ep);
    }
    return out;
}

BicCondition bic_condition(const SystemParams& p) {
    p.validate();
    const double product = p.gamma_c * p.gamma_x;
    if (!(product > 0.0)) {
        throw DomainError("bic_condition: requires gamma_c * gamma_x > 0");
    }
    BicCondition out;
    out.d_eps_bic = p.g_rabi * detunings(p, 0.0).d_gamma / std::sqrt(product);
    out.k_bic = ring_wavenumber(p, out.d_eps_bic);
    out.exact = !p.has_nonradiative_loss();

    // evaluate the branches at k = 0 with the detuning placed on the condition
    SystemParams at = p;
    at.delta = out.d_eps_bic;
    const BranchPair br = eigen_branches(at, 0.0);
    const double im_lower = std::abs(br.lower.omega.imag());
    const double im_upper = std::abs(br.upper.omega.imag());
    out.undamped_branch = im_lower <= im_upper ? Branch::Lower : Branch::Upper;
    out.residual_im = std::min(im_lower, im_upper);
    return out;
}

}  // namespace ioxsim
