#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace nmdeg;
using Catch::Matchers::WithinAbs;

TEST_CASE("time grid", "[evolution]") {
    const TimeGrid g{2.0, 8};
    CHECK(g.dt() == 0.25);
    CHECK(g.nodes() == 9);
    CHECK(g.time(8) == 2.0);
    CHECK_THROWS_AS((TimeGrid{0.0, 10}.validate()), InvalidInput);
    CHECK_THROWS_AS((TimeGrid{1.0, 1}.validate()), InvalidInput);
}

TEST_CASE("constant generators agree with the matrix exponential", "[evolution]") {
    std::mt19937_64 rng(21);
    for (Index d : {2, 3}) {
        const GeneratorSpec g = test::random_lindblad(rng, d, 2);
        const MapTrajectory traj = integrate(g, {2.0, 2000});
        for (int i : {0, 500, 1317, 2000}) {
            const Superoperator oracle = test::expm_map(g, traj.time(i));
            CHECK(test::max_abs(traj.maps[i].matrix() - oracle.matrix()) < 1e-9);
        }
        for (const auto& m : traj.maps) CHECK(m.trace_defect() < 1e-12);
    }
}

TEST_CASE("dephasing: the norm of the evolved sigma_x is 2 exp(-Gamma)", "[evolution]") {
    const RateFunction rate = RateFunction::exp_poly({1.0, -1.0}, 1.0);
    const MapTrajectory traj = integrate(dephasing_spec(rate), {10.0, 2000});
    double worst = 0.0;
    for (int i = 0; i < traj.nodes(); ++i) {
        const double expected = 2.0 * std::exp(-gamma_integral(rate, traj.time(i)));
        worst = std::max(worst, std::abs(trace_norm(traj.maps[i].apply(pauli(1))) - expected));
        CHECK(test::max_abs(traj.maps[i].matrix() - analytic_dephasing_map(rate, traj.time(i)).matrix()) < 1e-9);
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("Pauli model: integrated and closed-form maps agree", "[evolution]") {
    const RateFunction g1 = RateFunction::constant(1.0), g2 = RateFunction::constant(1.0),
                       g3 = RateFunction::tanh(-1.0, 1.0);
    const MapTrajectory traj = integrate(pauli_spec(g1, g2, g3), {3.0, 1500});
    for (int i = 0; i < traj.nodes(); i += 100) {
        const Superoperator oracle = analytic_pauli_map(g1, g2, g3, traj.time(i));
        CHECK(test::max_abs(traj.maps[i].matrix() - oracle.matrix()) < 1e-9);
    }
    const auto p = pauli_probabilities(0.2, 0.5, -0.1);
    CHECK_THAT(p[0] + p[1] + p[2] + p[3], WithinAbs(1.0, 1e-15));
    const Eigen::Matrix4d r = pauli_transfer_matrix(pauli_channel(p));
    CHECK_THAT(r(1, 1), WithinAbs(0.2, 1e-15));
    CHECK_THAT(r(2, 2), WithinAbs(0.5, 1e-15));
    CHECK_THAT(r(3, 3), WithinAbs(-0.1, 1e-15));
}

TEST_CASE("propagators compose back to the dynamical map", "[evolution]") {
    std::mt19937_64 rng(22);
    GeneratorSpec g = test::random_lindblad(rng, 3, 2);
    g.channels[0].rate = RateFunction::sinusoid(0.5, 2.0, 0.0, 0.6);
    const MapTrajectory traj = integrate(g, {2.0, 400});
    for (auto [s, t] : std::initializer_list<std::pair<int, int>>{{0, 400}, {100, 250}, {399, 400}, {37, 37}}) {
        const Superoperator v = propagator(traj, s, t);
        CHECK(test::max_abs((v * traj.maps[s]).matrix() - traj.maps[t].matrix()) < 1e-10);
        CHECK(v.trace_defect() < 1e-10);
    }
    CHECK_THROWS_AS(propagator(traj, 5, 4), InvalidInput);
    CHECK_THROWS_AS(propagator(traj, 0, 401), InvalidInput);
}

TEST_CASE("singular maps are reported", "[evolution]") {
    // strong dephasing drives the coherences to ~e^{-60}
    const MapTrajectory traj = integrate(dephasing_spec(RateFunction::constant(30.0)), {2.0, 4000});
    CHECK(traj.condition_numbers.back() > 1e20);
    try {
        (void)propagator(traj, 3999, 4000);
        FAIL("expected SingularMap");
    } catch (const SingularMap& e) {
        CHECK(e.time() > 1.0);
        CHECK(e.condition_number() > default_cond_max);
    }
    CHECK_NOTHROW(propagator(traj, 10, 11));
}

TEST_CASE("non-finite integration is a numerical failure", "[evolution]") {
    // e^{+50 t} rate overflows the RK4 stages
    const GeneratorSpec g = dephasing_spec(RateFunction::exp_poly({-1.0}, -50.0));
    CHECK_THROWS_AS(integrate(g, {20.0, 200}), NumericalFailure);
}
