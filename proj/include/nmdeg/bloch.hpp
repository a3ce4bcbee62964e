#pragma once

// Qubit Bloch-vector view of the Pauli and pump-decay models.

#include <array>
#include <cmath>
#include <limits>

#include "nmdeg/evolution.hpp"
#include "nmdeg/operators.hpp"

namespace nmdeg {

struct BlochVector {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;

    double norm() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }
    double operator[](int k) const { return k == 0 ? x1 : (k == 1 ? x2 : x3); }
};

/// x_k = Tr(s_k rho) with s_3 = diag(1, -1); basis index 0 (the ground level)
/// sits at the north pole.
inline BlochVector to_bloch(const Matrix& rho) {
    if (rho.rows() != 2 || rho.cols() != 2) throw DimensionMismatch("to_bloch: qubit operator required");
    return {(pauli(1) * rho).trace().real(), (pauli(2) * rho).trace().real(), (pauli(3) * rho).trace().real()};
}

inline DensityMatrix from_bloch(const BlochVector& x, double tol = 1e-9) {
    if (!(x.norm() <= 1.0 + tol)) throw InvalidInput("from_bloch: Bloch vector outside the unit ball");
    Matrix rho = 0.5 * (pauli(0) + x.x1 * pauli(1) + x.x2 * pauli(2) + x.x3 * pauli(3));
    return DensityMatrix(rho);
}

/// Population inversion p_excited - p_ground, the longitudinal coordinate of
/// the pump-decay Bloch equation. Equals -x3 in the convention above.
inline double population_inversion(const BlochVector& x) { return -x.x3; }

struct RelaxationTimes {
    std::array<double, 3> t{};      ///< signed; +inf where the pairwise sum vanishes
    std::array<double, 3> inverse{};  ///< the pairwise sums themselves
    bool infinite = false;

    bool nonnegative() const { return inverse[0] >= 0.0 && inverse[1] >= 0.0 && inverse[2] >= 0.0; }
};

/// T_1 = 1/(g2 + g3) and cyclic.
inline RelaxationTimes pauli_relaxation_times(double g1, double g2, double g3) {
    RelaxationTimes r;
    r.inverse = {g2 + g3, g1 + g3, g1 + g2};
    for (std::size_t k = 0; k < 3; ++k) {
        if (r.inverse[k] == 0.0) {
            r.t[k] = std::numeric_limits<double>::infinity();
            r.infinite = true;
        } else {
            r.t[k] = 1.0 / r.inverse[k];
        }
    }
    return r;
}

inline RelaxationTimes pauli_relaxation_times(const RateFunction& g1, const RateFunction& g2,
                                              const RateFunction& g3, double t) {
    return pauli_relaxation_times(g1(t), g2(t), g3(t));
}

/// 1/T_1 + 1/T_2 >= 1/T_3 and cyclic.
inline bool cp_triangle(double t1, double t2, double t3) {
    const double a = 1.0 / t1, b = 1.0 / t2, c = 1.0 / t3;
    return a + b >= c && b + c >= a && a + c >= b;
}

inline bool cp_triangle(const RelaxationTimes& r) {
    const auto& v = r.inverse;
    return v[0] + v[1] >= v[2] && v[1] + v[2] >= v[0] && v[0] + v[2] >= v[1];
}

/// V(t)/V(0) = exp(-(G1 + G2 + G3)).
inline double volume_ratio(const RateFunction& g1, const RateFunction& g2, const RateFunction& g3, double t) {
    return std::exp(-(gamma_integral(g1, t) + gamma_integral(g2, t) + gamma_integral(g3, t)));
}

struct PumpDecayBloch {
    double t_perp = 0.0;
    double t_par = 0.0;
    double delta = 0.0;
    bool p_div = true;
};

/// T_perp = 2/(g_- + g_+), T_par = T_perp/2, Delta = g_+ - g_-.
inline PumpDecayBloch pump_decay_bloch(double gamma_plus, double gamma_minus) {
    PumpDecayBloch b;
    const double sum = gamma_plus + gamma_minus;
    b.t_perp = sum == 0.0 ? std::numeric_limits<double>::infinity() : 2.0 / sum;
    b.t_par = 0.5 * b.t_perp;
    b.delta = gamma_plus - gamma_minus;
    b.p_div = sum >= 0.0;
    return b;
}

inline PumpDecayBloch pump_decay_bloch(const RateFunction& gamma_plus, const RateFunction& gamma_minus, double t) {
    return pump_decay_bloch(gamma_plus(t), gamma_minus(t));
}

struct BallCheck {
    bool contained = true;
    double max_norm = 0.0;
    double t_worst = 0.0;
};

/// Largest Bloch-vector norm of Lambda_t(rho) over the grid and the probe states.
inline BallCheck ball_containment(const MapTrajectory& traj, const std::vector<DensityMatrix>& states,
                                  double tol = 1e-9) {
    if (traj.dim() != 2) throw DimensionMismatch("ball_containment: qubit trajectory required");
    BallCheck out;
    for (int i = 0; i < traj.nodes(); ++i)
        for (const auto& rho : states) {
            const double n = to_bloch(traj.maps[static_cast<std::size_t>(i)].apply(rho.matrix())).norm();
            if (n > out.max_norm) {
                out.max_norm = n;
                out.t_worst = traj.time(i);
            }
        }
    out.contained = out.max_norm <= 1.0 + tol;
    return out;
}

/// Pauli eigenstates, the default probe set for ball containment.
inline std::vector<DensityMatrix> pauli_eigenstates() {
    std::vector<DensityMatrix> out;
    for (int k = 1; k <= 3; ++k)
        for (double s : {1.0, -1.0}) out.emplace_back(0.5 * (pauli(0) + s * pauli(k)));
    return out;
}

} // namespace nmdeg
