#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace nmdeg;
using Catch::Matchers::WithinAbs;

namespace {

// ln cosh without overflow
double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

} // namespace

TEST_CASE("rate values", "[rates]") {
    CHECK(RateFunction::constant(0.7)(3.0) == 0.7);
    CHECK_THAT(RateFunction::sinusoid(2.0, 3.0, 0.5, 1.0)(0.4), WithinAbs(1.0 + 2.0 * std::sin(1.2 + 0.5), 1e-15));
    const RateFunction r = RateFunction::exp_poly({1.0, -1.0}, 1.0);  // (1 - t) e^{-t}
    CHECK_THAT(r(2.0), WithinAbs(-std::exp(-2.0), 1e-15));
    CHECK_THAT(RateFunction::tanh(-1.0, 1.0)(0.3), WithinAbs(-std::tanh(0.3), 1e-15));
    const RateFunction sharp = RateFunction::bump(-1.5, 1.0, 2.0, 0.0);
    CHECK(sharp(0.5) == 0.0);
    CHECK(sharp(1.5) == -1.5);
    CHECK(sharp(2.5) == 0.0);
    const RateFunction tab = RateFunction::tabulated({0.0, 1.0, 3.0}, {0.0, 2.0, -2.0});
    CHECK_THAT(tab(0.5), WithinAbs(1.0, 1e-15));
    CHECK_THAT(tab(2.0), WithinAbs(0.0, 1e-15));
    CHECK(tab(10.0) == -2.0);
    CHECK(tab.extrapolates(4.0));
    CHECK_FALSE(tab.extrapolates(3.0));
    const RateFunction s = RateFunction::sum({RateFunction::constant(1.0), tab.scaled(2.0)});
    CHECK_THAT(s(0.5), WithinAbs(3.0, 1e-15));
}

TEST_CASE("rate validation", "[rates]") {
    CHECK_THROWS_AS(RateFunction::exp_poly({}, 1.0), InvalidInput);
    CHECK_THROWS_AS(RateFunction::bump(1.0, 2.0, 1.0, 0.1), InvalidInput);
    CHECK_THROWS_AS(RateFunction::bump(1.0, 1.0, 2.0, -0.1), InvalidInput);
    CHECK_THROWS_AS(RateFunction::tabulated({0.0, 0.0}, {1.0, 1.0}), InvalidInput);
    CHECK_THROWS_AS(RateFunction::tabulated({0.0, 1.0}, {1.0}), InvalidInput);
    CHECK_THROWS_AS(RateFunction::constant(std::nan("")), InvalidInput);
    CHECK_THROWS_AS(RateFunction::sum({}), InvalidInput);
    CHECK_THROWS_AS(gamma_integral(RateFunction::constant(1.0), -1.0), InvalidInput);
}

TEST_CASE("integrated rates match closed forms", "[rates]") {
    for (double t : {0.1, 1.0, 2.5, 7.0, 30.0}) {
        INFO("t = " << t);
        CHECK_THAT(gamma_integral(RateFunction::constant(0.3), t), WithinAbs(0.3 * t, 1e-12));
        // (1 - t) e^{-t} integrates to t e^{-t}
        CHECK_THAT(gamma_integral(RateFunction::exp_poly({1.0, -1.0}, 1.0), t), WithinAbs(t * std::exp(-t), 1e-10));
        CHECK_THAT(gamma_integral(RateFunction::exp_poly({0.0, 1.0}, 1.0), t),
                   WithinAbs(1.0 - (1.0 + t) * std::exp(-t), 1e-10));
        CHECK_THAT(gamma_integral(RateFunction::tanh(-1.0, 2.0), t), WithinAbs(-0.5 * log_cosh(2.0 * t), 1e-10));
        const double a = 1.5, w = 2.0, ph = 0.3, off = 1.0;
        CHECK_THAT(gamma_integral(RateFunction::sinusoid(a, w, ph, off), t),
                   WithinAbs(off * t + a / w * (std::cos(ph) - std::cos(w * t + ph)), 1e-10));
        const double b = -1.5, t0 = 2.0, t1 = 3.0, width = 0.05;
        const double smooth = 0.5 * b * width *
                              (log_cosh((t - t0) / width) - log_cosh(t0 / width) - log_cosh((t - t1) / width) +
                               log_cosh(t1 / width));
        CHECK_THAT(gamma_integral(RateFunction::bump(b, t0, t1, width), t), WithinAbs(smooth, 1e-9));
        const double overlap = std::clamp(t, t0, t1) - t0;
        CHECK_THAT(gamma_integral(RateFunction::bump(b, t0, t1, 0.0), t), WithinAbs(b * overlap, 1e-10));
    }
}

TEST_CASE("tabulated rates integrate exactly as piecewise-linear functions", "[rates]") {
    const RateFunction tab = RateFunction::tabulated({0.0, 1.0, 3.0}, {0.0, 2.0, -2.0});
    CHECK_THAT(gamma_integral(tab, 1.0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(gamma_integral(tab, 3.0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(gamma_integral(tab, 5.0), WithinAbs(-3.0, 1e-12));
    CHECK_THAT(gamma_integral(tab, 3.0, 1.0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("integration is additive and linear", "[rates]") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const double a = 2 * uniform01(rng) - 1, w = 5 * uniform01(rng), c = uniform01(rng);
        const RateFunction r = RateFunction::sum({RateFunction::sinusoid(a, w), RateFunction::constant(c).scaled(2.0)});
        const double x = 4 * uniform01(rng), y = x + 3 * uniform01(rng);
        CHECK_THAT(gamma_integral(r, 0.0, x) + gamma_integral(r, x, y), WithinAbs(gamma_integral(r, y), 1e-10));
        CHECK_THAT(gamma_integral(r, y, x), WithinAbs(-gamma_integral(r, x, y), 1e-12));
    }
    const auto grid = gamma_on_grid(RateFunction::exp_poly({1.0, -1.0}, 1.0), 5.0, 50);
    REQUIRE(grid.size() == 51);
    for (int i = 0; i <= 50; ++i) CHECK_THAT(grid[i], WithinAbs(0.1 * i * std::exp(-0.1 * i), 1e-10));
}

TEST_CASE("vectorized generator reproduces the direct action", "[generators]") {
    std::mt19937_64 rng(12);
    for (Index d : {2, 3}) {
        GeneratorSpec g = test::random_lindblad(rng, d, 3);
        g.channels[1].rate = RateFunction::sinusoid(1.0, 2.0, 0.0, 0.2);
        g.channels[2].rate = RateFunction::tanh(-0.5, 1.0);
        const CompiledGenerator cg(g);
        for (double t : {0.0, 0.7, 2.0}) {
            const Matrix x = test::random_matrix(rng, d, d);
            const Matrix direct = generator_action(g, x, t);
            CHECK(test::max_abs(unvec(cg.at(t) * vec(x), d) - direct) < 1e-12);
            CHECK(test::max_abs(generator_superoperator(g, t).apply(x) - direct) < 1e-12);
            // trace annihilation: Tr L(X) = 0
            CHECK(std::abs(direct.trace()) < 1e-12);
            // Hermiticity preservation
            const Matrix h = test::random_hermitian(rng, d);
            const Matrix lh = generator_action(g, h, t);
            CHECK(test::max_abs(lh - lh.adjoint()) < 1e-12);
        }
    }
}

TEST_CASE("qubit model generators act diagonally on Pauli matrices", "[generators]") {
    const double g1 = 0.4, g2 = -0.3, g3 = 1.1;
    const GeneratorSpec p =
        pauli_spec(RateFunction::constant(g1), RateFunction::constant(g2), RateFunction::constant(g3));
    const std::array<double, 3> gammas{g1, g2, g3};
    for (int k = 1; k <= 3; ++k) {
        const double decay = gammas[0] + gammas[1] + gammas[2] - gammas[static_cast<std::size_t>(k - 1)];
        CHECK(test::max_abs(generator_action(p, pauli(k), 0.0) + decay * pauli(k)) < 1e-14);
    }
    CHECK(test::max_abs(generator_action(p, pauli(0), 0.0)) < 1e-14);

    const GeneratorSpec dep = dephasing_spec(RateFunction::constant(0.8));
    CHECK(test::max_abs(generator_action(dep, pauli(1), 0.0) + 0.8 * pauli(1)) < 1e-14);
    CHECK(test::max_abs(generator_action(dep, pauli(3), 0.0)) < 1e-14);

    // pump-decay populations: p_ground' = -g+ p_ground + g- p_excited
    const double gp = 0.3, gm = 0.9;
    const GeneratorSpec pd = pump_decay_spec(RateFunction::constant(gp), RateFunction::constant(gm));
    Matrix ground = Matrix::Zero(2, 2);
    ground(0, 0) = 1.0;
    const Matrix out = generator_action(pd, ground, 0.0);
    CHECK_THAT(out(0, 0).real(), WithinAbs(-gp, 1e-15));
    CHECK_THAT(out(1, 1).real(), WithinAbs(gp, 1e-15));
    CHECK(test::max_abs(sigma_plus() * ground * sigma_plus().adjoint() - Matrix(Matrix::Identity(2, 2) - ground)) == 0.0);
}

TEST_CASE("generator validation", "[generators]") {
    GeneratorSpec g = dephasing_spec(RateFunction::constant(1.0));
    CHECK_NOTHROW(g.validate());
    g.channels.push_back({Matrix::Identity(3, 3), RateFunction::constant(1.0), "wrong"});
    CHECK_THROWS_AS(g.validate(), DimensionMismatch);
    GeneratorSpec h = dephasing_spec(RateFunction::constant(1.0));
    std::mt19937_64 rng(3);
    h.hamiltonian = test::random_matrix(rng, 2, 2);
    CHECK_THROWS_AS(h.validate(), InvalidInput);
    CHECK_THROWS_AS(generator_action(dephasing_spec(RateFunction::constant(1.0)), Matrix::Zero(3, 3), 0.0),
                    DimensionMismatch);
    CHECK_THROWS_AS(generator_action(dephasing_spec(RateFunction::constant(1.0)), Matrix::Zero(2, 2), -1.0),
                    InvalidInput);
    CHECK(dephasing_spec(RateFunction::tabulated({0.0, 1.0}, {1.0, 1.0})).extrapolates(2.0));
}
