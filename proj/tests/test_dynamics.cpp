#include <doctest.h>

#include "ioxsim/core_model.hpp"
#include "ioxsim/dynamics.hpp"
#include "ioxsim/errors.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace ioxsim;

namespace {

SystemParams bic_params() {
    SystemParams p;
    p.g_rabi = 3.0;
    p.gamma_c = 1.0;
    p.gamma_x = 0.3;
    return p;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = a + (b - a) * i / (n - 1);
    }
    return v;
}

const AmplitudeState kExciton{cplx(0.0), cplx(1.0), 0.0};

}  // namespace

TEST_CASE("undamped Rabi oscillation") {
    SystemParams p;
    p.gamma_c = 0.0;
    p.g_rabi = 1.7;
    for (double t : {0.0, 0.3, 1.0, 2.5, 10.0}) {
        const auto s = evolve_analytic(p, 0.0, kExciton, t);
        CHECK(s.exciton_population() == doctest::Approx(std::pow(std::cos(1.7 * t), 2)).epsilon(1e-12).scale(1e-12));
        CHECK(s.photon_population() == doctest::Approx(std::pow(std::sin(1.7 * t), 2)).epsilon(1e-12).scale(1e-12));
        CHECK(s.t == t);
    }
}

TEST_CASE("decoupled modes decay independently") {
    SystemParams p;
    p.gamma_c = 0.8;
    p.gamma_x = 0.0;
    p.delta = 1.0;
    const AmplitudeState both{cplx(1.0), cplx(0.0, 1.0), 0.0};
    for (double t : {0.5, 2.0, 7.0}) {
        const auto s = evolve_analytic(p, 0.0, both, t);
        CHECK(std::abs(s.c) == doctest::Approx(std::exp(-0.8 * t)).epsilon(1e-12));
        CHECK(std::abs(s.x) == doctest::Approx(1.0).epsilon(1e-12));
        // photon carries eps0 + delta, exciton eps0
        const cplx ref_c = std::exp(cplx(-0.8 * t, -1001.0 * t));
        CHECK(std::abs(s.c - ref_c) < 1e-10);
    }
}

TEST_CASE("analytic evolution composes") {
    SystemParams p = bic_params();
    p.delta = 1.2;
    const auto mid = evolve_analytic(p, 0.3, kExciton, 2.0);
    const auto a = evolve_analytic(p, 0.3, mid, 5.0);
    const auto b = evolve_analytic(p, 0.3, kExciton, 5.0);
    CHECK(std::abs(a.c - b.c) < 1e-10);
    CHECK(std::abs(a.x - b.x) < 1e-10);
    CHECK_THROWS_AS(evolve_analytic(p, 0.3, mid, 1.0), DomainError);
}

TEST_CASE("analytic evolution refuses the exceptional point") {
    SystemParams p;
    p.gamma_c = 1.0;
    p.gamma_x = 2.0;
    p.g_rabi = 0.5;
    p.delta = 2.0 * std::numbers::sqrt2;
    CHECK_THROWS_AS(evolve_analytic(p, 0.0, kExciton, 1.0), DomainError);
}

TEST_CASE("bound state closed form") {
    SystemParams p = bic_params();
    p.delta = bic_condition(p).d_eps_bic;
    const auto s0 = bic_amplitudes(p, 0.0);
    CHECK(s0.exciton == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s0.photon == doctest::Approx(0.0).scale(1e-14));

    const auto late = bic_amplitudes(p, 60.0);
    CHECK(late.photon == doctest::Approx(0.3 / 1.69).epsilon(1e-10));
    CHECK(late.exciton == doctest::Approx(1.0 / 1.69).epsilon(1e-10));
    CHECK(late.photon == doctest::Approx(0.17751479).epsilon(1e-7));
    CHECK(late.exciton == doctest::Approx(0.59171598).epsilon(1e-7));

    for (double t : linspace(0.0, 20.0, 81)) {
        const auto closed = bic_amplitudes(p, t);
        const auto full = evolve_analytic(p, 0.0, kExciton, t);
        CHECK(std::abs(closed.photon - full.photon_population()) < 1e-10);
        CHECK(std::abs(closed.exciton - full.exciton_population()) < 1e-10);
    }

    // plateau
    const double a = bic_amplitudes(p, 40.0).exciton;
    const double b = bic_amplitudes(p, 80.0).exciton;
    CHECK(std::abs(a - b) < 1e-10);
    CHECK(std::abs(b - 1.0 / 1.69) < 1e-10);
}

TEST_CASE("bound state closed form preconditions") {
    SystemParams p = bic_params();
    p.delta = bic_condition(p).d_eps_bic + 0.1;
    CHECK_THROWS_AS(bic_amplitudes(p, 1.0), DomainError);
    p.delta -= 0.1;
    CHECK_THROWS_AS(bic_amplitudes(p, -1.0), DomainError);
    p.gamma_nr_c = 0.01;
    CHECK_THROWS_AS(bic_amplitudes(p, 1.0), DomainError);
}

TEST_CASE("closer to the bound state means slower decay") {
    SystemParams p = bic_params();
    const double bic = bic_condition(p).d_eps_bic;
    double previous = 0.0;
    for (double frac : {0.0, 0.5, 0.8, 0.95}) {
        p.delta = frac * bic;
        const double late = evolve_analytic(p, 0.0, kExciton, 15.0).exciton_population();
        CHECK(late > previous);
        previous = late;
    }
    p.delta = bic;
    CHECK(evolve_analytic(p, 0.0, kExciton, 15.0).exciton_population() > previous);
}

TEST_CASE("ODE integration agrees with the closed form") {
    SystemParams p = bic_params();
    p.delta = 0.9 * bic_condition(p).d_eps_bic;
    const auto times = linspace(0.0, 10.0, 201);
    const auto ode = evolve_ode(p, 0.0, kExciton, times);
    REQUIRE(ode.size() == times.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto ref = evolve_analytic(p, 0.0, kExciton, times[i]);
        CHECK(ode[i].t == times[i]);
        worst = std::max({worst, std::abs(ode[i].c - ref.c), std::abs(ode[i].x - ref.x)});
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("ODE against closed form over random parameters") {
    auto rng = testing::make_rng(31);
    const auto times = linspace(0.0, 20.0, 41);
    int tried = 0;
    while (tried < 100) {
        SystemParams p;
        p.delta = testing::uniform(rng, -4.0, 4.0);
        p.g_rabi = testing::uniform(rng, 0.0, 3.0);
        p.gamma_c = testing::uniform(rng, 0.0, 2.0);
        p.gamma_x = testing::uniform(rng, 0.0, 2.0);
        p.gamma_nr_x = testing::uniform(rng, 0.0, 0.3);
        p.mass_ratio = testing::uniform(rng, 0.0, 0.3);
        const double k = testing::uniform(rng, 0.0, 1.5);
        const auto br = eigen_branches(p, k);
        if (std::abs(br.upper.omega - br.lower.omega) < 1e-2) {
            continue;
        }
        ++tried;
        const AmplitudeState init{cplx(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)),
                                  cplx(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)), 0.0};
        const auto ode = evolve_ode(p, k, init, times);
        double worst = 0.0;
        double previous = init.total_population();
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto ref = evolve_analytic(p, k, init, times[i]);
            worst = std::max({worst, std::abs(ode[i].c - ref.c), std::abs(ode[i].x - ref.x)});
            // passivity
            CHECK(ode[i].total_population() <= previous * (1.0 + 1e-9) + 1e-15);
            previous = ode[i].total_population();
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("exceptional point dynamics carry a secular factor") {
    SystemParams p;
    p.gamma_c = 1.0;
    p.gamma_x = 2.0;
    p.g_rabi = 0.5;
    p.delta = 2.0 * std::numbers::sqrt2;
    const cplx omega = eigen_branches(p, 0.0).lower.omega;
    CHECK(omega.imag() == doctest::Approx(-1.5));

    // removing the decay amplifies integration error by exp(1.5 t); stop at t = 6
    const auto times = linspace(0.0, 6.0, 61);
    const auto ode = evolve_ode(p, 0.0, kExciton, times);

    // x(t) exp(i omega t) is affine in t: fit a + b t by least squares
    Eigen::MatrixXcd a(times.size(), 2);
    Eigen::VectorXcd y(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = times[i];
        y(i) = ode[i].x * std::exp(cplx(0.0, 1.0) * omega * times[i]);
    }
    const Eigen::VectorXcd coef = a.colPivHouseholderQr().solve(y);
    const double misfit = (a * coef - y).cwiseAbs().maxCoeff();
    CHECK(misfit < 1e-6);
    CHECK(std::abs(coef(0) - 1.0) < 1e-6);
    CHECK(std::abs(coef(1)) > 0.1);
}

TEST_CASE("zero initial state stays zero") {
    const SystemParams p = bic_params();
    const auto out = evolve_ode(p, 0.0, {cplx(0.0), cplx(0.0), 0.0}, linspace(0.0, 5.0, 11));
    for (const auto& s : out) {
        CHECK(s.c == cplx(0.0));
        CHECK(s.x == cplx(0.0));
    }
}

TEST_CASE("ODE grid handling") {
    const SystemParams p = bic_params();
    const AmplitudeState late_start{cplx(0.0), cplx(1.0), 1.0};
    const std::vector<double> grid{2.0, 3.0};
    const auto out = evolve_ode(p, 0.0, late_start, grid);
    REQUIRE(out.size() == 2);
    CHECK(out[0].t == 2.0);
    const auto ref = evolve_analytic(p, 0.0, late_start, 3.0);
    CHECK(std::abs(out[1].x - ref.x) < 1e-8);

    CHECK(evolve_ode(p, 0.0, kExciton, std::vector<double>{}).empty());
    CHECK_THROWS_AS(evolve_ode(p, 0.0, late_start, std::vector<double>{0.5}), DomainError);
    CHECK_THROWS_AS(evolve_ode(p, 0.0, kExciton, std::vector<double>{1.0, 1.0}), DomainError);
}
