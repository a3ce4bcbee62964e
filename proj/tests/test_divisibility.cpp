#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace nmdeg;
using Catch::Matchers::WithinAbs;

namespace {

// Ancilla factor of a product vector a (x) b.
Vector ancilla_factor(const Vector& psi, Index d) {
    Matrix m(d, d);
    for (Index a = 0; a < d; ++a)
        for (Index i = 0; i < d; ++i) m(a, i) = psi(a * d + i);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    return svd.matrixU().col(0);
}

} // namespace

TEST_CASE("complete positivity from the Choi spectrum", "[divisibility]") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        const auto v = is_completely_positive(test::random_channel(rng, 3, 2));
        CHECK_FALSE(v.violated());
        CHECK(v.floor > -1e-12);
    }
    const auto t = is_completely_positive(test::transpose_map(2));
    REQUIRE(t.violated());
    CHECK_THAT(t.floor, WithinAbs(-1.0, 1e-12));
    CHECK_THAT(choi_expectation(test::transpose_map(2), *t.certificate), WithinAbs(-1.0, 1e-12));
}

TEST_CASE("reduction map is positive but not 2-positive", "[divisibility]") {
    // <psi|C|psi> = 1 - |<Omega|psi>|^2 >= 1 - k on Schmidt rank k
    const Superoperator r = test::reduction_map(3);
    const auto k1 = is_k_positive(r, 1);
    CHECK_FALSE(k1.violated());
    CHECK(k1.floor > -1e-9);

    const auto k2 = is_k_positive(r, 2);
    REQUIRE(k2.violated());
    REQUIRE(k2.certificate);
    CHECK(test::schmidt_rank(*k2.certificate, 3) <= 2);
    CHECK_THAT(k2.certificate->norm(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(choi_expectation(r, *k2.certificate), WithinAbs(k2.floor, 1e-10));
    CHECK(k2.floor >= -1.0 - 1e-10);

    // a threshold nobody reaches turns off the early exit, so the search converges
    const KPositivityOptions converge{.tol = 1e6, .patience = 0};
    CHECK_THAT(is_k_positive(r, 2, converge).floor, WithinAbs(-1.0, 1e-8));
    CHECK_THAT(is_k_positive(r, 3, converge).floor, WithinAbs(-2.0, 1e-8));
    CHECK(is_k_positive(r, 1, converge).floor > -1e-9);
}

TEST_CASE("transposition is positive but not 2-positive", "[divisibility]") {
    const Superoperator t = test::transpose_map(2);
    CHECK_FALSE(is_k_positive(t, 1).violated());
    CHECK(is_k_positive(t, 2).violated());
    CHECK_THAT(is_k_positive(t, 2, {.tol = 1e6, .patience = 0}).floor, WithinAbs(-1.0, 1e-8));
}

TEST_CASE("k = dim search agrees with the exact Choi floor", "[divisibility]") {
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 10; ++rep) {
        const double mix = uniform01(rng);
        const Superoperator ch = test::random_channel(rng, 2, 2);
        const Superoperator phi(2, 2, (1 - mix) * ch.matrix() + mix * test::transpose_map(2).matrix());
        const auto exact = is_completely_positive(phi);
        CHECK_THAT(is_k_positive(phi, 2, {.tol = 1e6, .patience = 0}).floor, WithinAbs(exact.floor, 1e-8));
        CHECK(is_k_positive(phi, 2).violated() == exact.violated());
    }
}

TEST_CASE("positivity of Pauli-diagonal maps matches the Bloch ellipsoid", "[divisibility]") {
    // positive iff every |l_k| <= 1; CP iff 1 +- l3 >= |l1 +- l2|
    std::mt19937_64 rng(33);
    int violated = 0, clean = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const double l1 = 2.6 * uniform01(rng) - 1.3, l2 = 2.6 * uniform01(rng) - 1.3, l3 = 2.6 * uniform01(rng) - 1.3;
        const double margin = 1.0 - std::max({std::abs(l1), std::abs(l2), std::abs(l3)});
        const double cp_margin =
            std::min({1 + l3 - std::abs(l1 + l2), 1 - l3 - std::abs(l1 - l2)});
        if (std::abs(margin) < 1e-3 || std::abs(cp_margin) < 1e-3) continue;
        const Superoperator phi = pauli_diagonal_map(l1, l2, l3);
        const auto v = is_k_positive(phi, 1, {.budget = 64, .patience = 0});
        CHECK(v.violated() == (margin < 0));
        CHECK(is_completely_positive(phi).violated() == (cp_margin < 0));
        if (v.violated()) {
            ++violated;
            // product certificate a (x) b gives a state whose image is not a state
            const Vector a = ancilla_factor(*v.certificate, 2);
            const Matrix rho = a.conjugate() * a.conjugate().adjoint();
            CHECK(trace_norm(phi.apply(rho)) > 1.0 + 1e-9);
            CHECK(test::schmidt_rank(*v.certificate, 2) == 1);
        } else {
            ++clean;
        }
    }
    CHECK(violated > 20);
    CHECK(clean > 20);
}

TEST_CASE("positive maps contract the trace norm of Hermitian operators", "[divisibility]") {
    // trace-preserving maps are positive exactly when they never increase ||X||_1
    std::mt19937_64 rng(34);
    for (int rep = 0; rep < 30; ++rep) {
        Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
        r(0, 0) = 1.0;
        for (int i = 1; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r(i, j) = 0.9 * (2 * uniform01(rng) - 1);
        const Superoperator phi = test::map_from_ptm(r);
        const auto v = is_k_positive(phi, 1, {.budget = 64, .patience = 0});
        double worst = 0.0;
        for (int s = 0; s < 400; ++s) {
            const Matrix x = test::random_hermitian(rng, 2);
            worst = std::max(worst, trace_norm(phi.apply(x)) / trace_norm(x));
        }
        if (!v.violated()) CHECK(worst <= 1.0 + 1e-9);
        if (worst > 1.0 + 1e-6) CHECK(v.violated());
    }
}

TEST_CASE("warm starts carry a lower-k certificate upward", "[divisibility]") {
    const Superoperator r = test::reduction_map(3);
    const auto k2 = is_k_positive(r, 2);
    REQUIRE(k2.certificate);
    const auto k3 = is_k_positive(r, 3, {.budget = 1}, {*k2.certificate});
    CHECK(k3.violated());
    CHECK(k3.floor <= k2.floor + 1e-12);
}

TEST_CASE("k-positivity argument checks", "[divisibility]") {
    const Superoperator id = Superoperator::identity(2);
    CHECK_THROWS_AS(is_k_positive(id, 0), InvalidInput);
    CHECK_THROWS_AS(is_k_positive(id, 3), InvalidInput);
    CHECK_THROWS_AS(is_k_positive(id, 1, {.budget = 0}), InvalidInput);
    Matrix rect = Matrix::Zero(9, 4);
    CHECK_THROWS_AS(is_k_positive(Superoperator(2, 3, rect), 1), DimensionMismatch);
}

TEST_CASE("degree and classification", "[divisibility]") {
    CHECK(degree_from_divisibility({true, true}) == 0);
    CHECK(degree_from_divisibility({true, false}) == 1);
    CHECK(degree_from_divisibility({false, false}) == 2);
    CHECK(degree_from_divisibility({true, true, false}) == 1);
    CHECK(degree_from_divisibility({true, false, false}) == 2);
    CHECK(classify(0, 2) == Classification::markovian);
    CHECK(classify(1, 2) == Classification::weakly_non_markovian);
    CHECK(classify(2, 2) == Classification::essentially_non_markovian);
    CHECK(classify(2, 3) == Classification::weakly_non_markovian);
    CHECK(std::string(to_string(Classification::essentially_non_markovian)) == "essentially_non_markovian");
}

TEST_CASE("semigroup scans are clean", "[divisibility]") {
    const MapTrajectory traj = integrate(
        pauli_spec(RateFunction::constant(1.0), RateFunction::constant(0.5), RateFunction::constant(0.25)), {2.0, 100});
    const NMDReport rep = nmd(traj, {.budget = 16});
    CHECK(rep.degree == 0);
    CHECK(rep.classification == Classification::markovian);
    CHECK(rep.violation_times.empty());
    CHECK(rep.singular_steps == 0);
}

TEST_CASE("eternal model is P- but not CP-divisible", "[divisibility]") {
    const MapTrajectory traj = integrate(
        pauli_spec(RateFunction::constant(1.0), RateFunction::constant(1.0), RateFunction::tanh(-1.0, 1.0)), {2.0, 200});
    const NMDReport rep = nmd(traj, {.budget = 16});
    CHECK(rep.degree == 1);
    CHECK(rep.per_k_divisible == std::vector<bool>{true, false});
    const auto& k2 = rep.scans[1];
    for (std::size_t i = 1; i < k2.size(); ++i) CHECK(k2[i].violated());
    CHECK(admit(traj).legitimate);
    CHECK(admit(traj).worst_floor >= -1e-8);
}

TEST_CASE("a negative pairwise sum breaks P-divisibility", "[divisibility]") {
    const RateFunction g1 = RateFunction::constant(1.0), g2 = RateFunction::constant(1.0),
                       g3 = RateFunction::bump(-1.5, 2.0, 3.0, 0.0);
    const MapTrajectory traj = integrate(pauli_spec(g1, g2, g3), {4.0, 400});
    CHECK(admit(traj).legitimate);
    const NMDReport rep = nmd(traj, {.budget = 16});
    CHECK(rep.degree == 2);
    for (const auto& sv : rep.scans[0]) {
        const double mid = 0.5 * (sv.t_start + sv.t_end);
        if (mid > 2.02 && mid < 2.98) CHECK(sv.violated());
        if (mid < 1.98 || mid > 3.02) CHECK_FALSE(sv.violated());
    }
}

TEST_CASE("admission rejects maps that are not completely positive", "[divisibility]") {
    const RateFunction one = RateFunction::constant(1.0);
    const MapTrajectory early =
        integrate(pauli_spec(one, one, RateFunction::bump(-1.5, 1.0, 2.0, 0.0)), {2.5, 250});
    const Admission adm = admit(early);
    CHECK_FALSE(adm.legitimate);
    CHECK(adm.worst_floor < -1e-3);
    CHECK(adm.worst_time > 1.0);
    CHECK(adm.worst_time <= 2.0 + 1e-12);
}

TEST_CASE("closed-form criteria of the Pauli model", "[divisibility]") {
    const auto eternal = pauli_criteria(RateFunction::constant(1.0), RateFunction::constant(1.0),
                                        RateFunction::tanh(-1.0, 1.0), 1.0);
    CHECK_FALSE(eternal.cp);
    CHECK(eternal.p);
    CHECK(eternal.volume);
    const auto strict = pauli_criteria_from_rates(3.0, 1.0, -2.5);
    CHECK_FALSE(strict.cp);
    CHECK_FALSE(strict.p);
    CHECK(strict.volume);
    const auto semigroup = pauli_criteria_from_rates(1.0, 0.5, 0.25);
    CHECK((semigroup.cp && semigroup.p && semigroup.volume));
    const auto bad = pauli_criteria_from_rates(-1.0, -1.0, 1.5);
    CHECK_FALSE(bad.volume);
}

TEST_CASE("closed-form criteria of the pump-decay model", "[divisibility]") {
    const double gp = 0.3, gm = 0.9, t = 2.0;
    const auto c = pump_decay_criteria(RateFunction::constant(gp), RateFunction::constant(gm), t);
    const double bound = std::expm1((gp + gm) * t);
    CHECK_THAT(c.upper_bound, WithinAbs(bound, 1e-10));
    CHECK_THAT(c.integral_plus, WithinAbs(gp / (gp + gm) * bound, 1e-9));
    CHECK_THAT(c.integral_minus, WithinAbs(gm / (gp + gm) * bound, 1e-9));
    CHECK((c.legit_integrals && c.cp_div && c.p_div));

    const auto n = pump_decay_criteria(RateFunction::constant(1.0), RateFunction::constant(-0.2), t);
    CHECK_FALSE(n.cp_div);
    CHECK(n.p_div);
    CHECK_FALSE(n.legit_integrals);
    const auto q = pump_decay_criteria(RateFunction::constant(0.2), RateFunction::constant(-0.5), t);
    CHECK_FALSE(q.p_div);
}
