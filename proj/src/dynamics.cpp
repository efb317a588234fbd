#include "ioxsim/dynamics.hpp"

#include "ioxsim/core_model.hpp"
#include "ioxsim/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

namespace ioxsim {

namespace {

cplx rotating_phase(double eps0, double dt) {
    return std::exp(cplx(0.0, -eps0 * dt));
}

}  // namespace

AmplitudeState evolve_analytic(const SystemParams& p, double k, const AmplitudeState& initial, double t) {
    if (t < initial.t) {
        throw DomainError("evolve_analytic: target time precedes the initial state");
    }
    const BranchPair br = eigen_branches(p, k);
    if (br.degenerate) {
        throw DomainError("evolve_analytic: degenerate branches (exceptional point); use evolve_ode");
    }
    const ComplexPole z = complex_poles(p, k);
    const Detunings det = detunings(p, k);
    const cplx dz(det.d_eps, -det.d_gamma);          // z_c - z_x
    const cplx root = principal_sqrt(br.discriminant);  // omega_U - omega_L
    const cplx g = z.g_tilde;

    // mode frequencies measured from eps0; the eps0 phase is applied once
    const cplx sum_rel = (z.z_c - p.eps0) + (z.z_x - p.eps0);
    const cplx lower_rel = 0.5 * (sum_rel - root);
    const cplx upper_rel = 0.5 * (sum_rel + root);
    const cplx upper_minus_zx = 0.5 * (dz + root);
    const cplx upper_minus_zc = 0.5 * (-dz + root);

    const double dt = t - initial.t;
    const cplx eu = std::exp(cplx(0.0, -1.0) * upper_rel * dt);
    const cplx el = std::exp(cplx(0.0, -1.0) * lower_rel * dt);
    const cplx c0 = initial.c;
    const cplx x0 = initial.x;

    const cplx c = (eu * (x0 * g + c0 * upper_minus_zx) - el * (x0 * g - c0 * upper_minus_zc)) / root;
    const cplx x = (eu * (c0 * g + x0 * upper_minus_zc) - el * (c0 * g - x0 * upper_minus_zx)) / root;
    const cplx phase = rotating_phase(p.eps0, dt);
    return {c * phase, x * phase, t};
}

BicPopulations bic_amplitudes(const SystemParams& p, double t) {
    if (p.has_nonradiative_loss()) {
        throw DomainError("bic_amplitudes: requires purely radiative losses");
    }
    if (t < 0.0) {
        throw DomainError("bic_amplitudes: t must be >= 0");
    }
    const BicCondition bic = bic_condition(p);
    if (std::abs(p.delta - bic.d_eps_bic) > kConditionTol * std::max(1.0, std::abs(bic.d_eps_bic))) {
        throw DomainError("bic_amplitudes: detuning is not on the bound-state condition");
    }
    const double gc = p.gamma_c;
    const double gx = p.gamma_x;
    const double gamma = gc + gx;
    const double omega = p.g_rabi * gamma / std::sqrt(gc * gx);
    const double decay = std::exp(-gamma * t);
    const double beat = std::cos(omega * t);
    const double weight = gc * gx / (gamma * gamma);
    return {
        (1.0 + decay * decay - 2.0 * decay * beat) * weight,
        (gc / gx + gx / gc * decay * decay + 2.0 * decay * beat) * weight,
        t,
    };
}

std::vector<AmplitudeState> evolve_ode(const SystemParams& p, double k, const AmplitudeState& initial,
                                       std::span<const double> t_grid, const OdeOptions& opts) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 4>;   // Re c, Im c, Re x, Im x

    if (t_grid.empty()) {
        return {};
    }
    if (t_grid.front() < initial.t) {
        throw DomainError("evolve_ode: time grid starts before the initial state");
    }
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw DomainError("evolve_ode: time grid must be strictly increasing");
        }
    }

    // integrate in the frame rotating at eps0
    Eigen::Matrix2cd h = effective_hamiltonian(p, k);
    h.diagonal().array() -= cplx(p.eps0, 0.0);
    const cplx h00 = h(0, 0), h01 = h(0, 1), h10 = h(1, 0), h11 = h(1, 1);
    auto rhs = [=](const State& s, State& ds, double) {
        const cplx c(s[0], s[1]);
        const cplx x(s[2], s[3]);
        const cplx dc = cplx(0.0, -1.0) * (h00 * c + h01 * x);
        const cplx dx = cplx(0.0, -1.0) * (h10 * c + h11 * x);
        ds = {dc.real(), dc.imag(), dx.real(), dx.imag()};
    };

    std::vector<double> times;
    times.reserve(t_grid.size() + 1);
    const bool prepend = t_grid.front() > initial.t;
    if (prepend) {
        times.push_back(initial.t);
    }
    times.insert(times.end(), t_grid.begin(), t_grid.end());

    State state{initial.c.real(), initial.c.imag(), initial.x.real(), initial.x.imag()};
    std::vector<AmplitudeState> out;
    out.reserve(t_grid.size());
    auto observer = [&](const State& s, double t) {
        if (prepend && out.empty() && t == initial.t) {
            return;
        }
        const cplx phase = rotating_phase(p.eps0, t - initial.t);
        out.push_back({cplx(s[0], s[1]) * phase, cplx(s[2], s[3]) * phase, t});
    };

    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, rhs, state, times.begin(), times.end(), opts.initial_step, observer);
    } catch (const odeint::odeint_error& e) {
        throw NumericalError(std::string("evolve_ode: step-size control failed: ") + e.what());
    }
    return out;
}

}  // namespace ioxsim
