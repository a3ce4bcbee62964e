#pragma once

// Integration of the map equation dLambda/dt = L_t Lambda on a uniform grid,
// propagator extraction, and closed-form qubit maps used as oracles.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "nmdeg/generators.hpp"
#include "nmdeg/operators.hpp"

namespace nmdeg {

/// Default condition-number ceiling for inverting a dynamical map.
inline constexpr double default_cond_max = 1e8;

struct TimeGrid {
    double t_max = 10.0;
    int steps = 10000;

    double dt() const { return t_max / steps; }
    double time(int i) const { return i == steps ? t_max : i * dt(); }
    int nodes() const { return steps + 1; }

    void validate() const {
        if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidInput("TimeGrid: t_max must be positive");
        if (steps < 2) throw InvalidInput("TimeGrid: steps must be >= 2");
    }
};

struct MapTrajectory {
    TimeGrid grid;
    std::vector<Superoperator> maps;
    std::vector<double> condition_numbers;

    Index dim() const { return maps.empty() ? 0 : maps.front().dim_in(); }
    int nodes() const { return static_cast<int>(maps.size()); }
    double time(int i) const { return grid.time(i); }
};

namespace detail {

inline double condition_number(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

/// Affine correction making the trace row of a vectorized map exact:
/// w^T M = w^T with w = vec(I).
inline void project_trace_preserving(Matrix& m, Index d) {
    Eigen::RowVectorXcd defect = Eigen::RowVectorXcd::Zero(m.cols());
    for (Index i = 0; i < d; ++i) defect += m.row(i + i * d);
    for (Index i = 0; i < d; ++i) defect(i + i * d) -= 1.0;
    // m <- m - (w/d) * defect
    for (Index i = 0; i < d; ++i) m.row(i + i * d) -= defect / static_cast<double>(d);
}

} // namespace detail

/// Classical fixed-step RK4 on the d^2 x d^2 map matrix, Lambda_0 = id.
/// Every stored map is projected back onto exact trace preservation.
inline MapTrajectory integrate(const GeneratorSpec& g, const TimeGrid& grid) {
    grid.validate();
    const CompiledGenerator gen(g);
    const Index d = g.dim;
    const Index n = d * d;
    const double dt = grid.dt();

    MapTrajectory traj;
    traj.grid = grid;
    traj.maps.reserve(static_cast<std::size_t>(grid.nodes()));
    traj.condition_numbers.reserve(static_cast<std::size_t>(grid.nodes()));

    Matrix lam = Matrix::Identity(n, n);
    traj.maps.emplace_back(d, d, lam);
    traj.condition_numbers.push_back(1.0);

    Matrix l_next = gen.at(0.0);
    for (int i = 0; i < grid.steps; ++i) {
        const double t = i * dt;
        const Matrix l0 = l_next;
        const Matrix lh = gen.at(t + 0.5 * dt);
        l_next = gen.at(t + dt);
        const Matrix k1 = l0 * lam;
        const Matrix k2 = lh * (lam + 0.5 * dt * k1);
        const Matrix k3 = lh * (lam + 0.5 * dt * k2);
        const Matrix k4 = l_next * (lam + dt * k3);
        lam += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        detail::project_trace_preserving(lam, d);
        if (!all_finite(lam))
            throw NumericalFailure("integrate: non-finite map at t=" + std::to_string(t + dt));
        traj.maps.emplace_back(d, d, lam);
        traj.condition_numbers.push_back(detail::condition_number(lam));
    }
    return traj;
}

/// V(t, s) = Lambda_t Lambda_s^{-1} between grid nodes i_s <= i_t.
inline Superoperator propagator(const MapTrajectory& traj, int i_s, int i_t,
                                double cond_max = default_cond_max) {
    if (i_s < 0 || i_t >= traj.nodes() || i_s > i_t)
        throw InvalidInput("propagator: indices must satisfy 0 <= i_s <= i_t < nodes");
    const Index d = traj.dim();
    if (i_s == i_t) return Superoperator::identity(d);
    const double cond = traj.condition_numbers[static_cast<std::size_t>(i_s)];
    if (!(cond <= cond_max)) throw SingularMap(cond, traj.time(i_s));
    const Matrix& ls = traj.maps[static_cast<std::size_t>(i_s)].matrix();
    const Matrix& lt = traj.maps[static_cast<std::size_t>(i_t)].matrix();
    // V Ls = Lt  <=>  Ls^T V^T = Lt^T
    Eigen::ColPivHouseholderQR<Matrix> qr(ls.transpose());
    Matrix v = qr.solve(lt.transpose()).transpose();
    if (!all_finite(v)) throw NumericalFailure("propagator: non-finite solve");
    return Superoperator(d, d, v);
}

/// Qubit map with Pauli transfer matrix diag(1, l1, l2, l3).
inline Superoperator pauli_diagonal_map(double l1, double l2, double l3) {
    const std::array<double, 4> lam{1.0, l1, l2, l3};
    Matrix m = Matrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a) {
        const Vector s = vec(pauli(a));
        m += 0.5 * lam[static_cast<std::size_t>(a)] * s * s.adjoint();
    }
    return Superoperator(2, 2, m);
}

/// p_alpha of the random-unitary form sum_a p_a s_a rho s_a.
inline std::array<double, 4> pauli_probabilities(double l1, double l2, double l3) {
    return {0.25 * (1.0 + l3 + l2 + l1), 0.25 * (1.0 - l3 - l2 + l1),
            0.25 * (1.0 - l3 + l2 - l1), 0.25 * (1.0 + l3 - l2 - l1)};
}

inline Superoperator pauli_channel(const std::array<double, 4>& p) {
    Matrix m = Matrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a)
        m += p[static_cast<std::size_t>(a)] * Superoperator::conjugation(pauli(a)).matrix();
    return Superoperator(2, 2, m);
}

/// Pauli-coordinate eigenvalues l_k = exp(-(G_i + G_j)), {i,j,k} = {1,2,3}.
inline std::array<double, 3> pauli_lambdas(double big_gamma1, double big_gamma2, double big_gamma3) {
    return {std::exp(-(big_gamma2 + big_gamma3)), std::exp(-(big_gamma1 + big_gamma3)),
            std::exp(-(big_gamma1 + big_gamma2))};
}

/// Closed-form map of the random-unitary qubit model at time t.
inline Superoperator analytic_pauli_map(const RateFunction& gamma1, const RateFunction& gamma2,
                                        const RateFunction& gamma3, double t) {
    const auto l = pauli_lambdas(gamma_integral(gamma1, t), gamma_integral(gamma2, t),
                                 gamma_integral(gamma3, t));
    return pauli_channel(pauli_probabilities(l[0], l[1], l[2]));
}

/// Closed-form pure-dephasing map: coherences multiplied by exp(-Gamma(t)).
inline Superoperator analytic_dephasing_map(const RateFunction& gamma, double t) {
    const double damp = std::exp(-gamma_integral(gamma, t));
    return pauli_diagonal_map(damp, damp, 1.0);
}

} // namespace nmdeg
