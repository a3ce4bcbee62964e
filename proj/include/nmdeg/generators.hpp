#pragma once

// Time-local generators in GKSL form with time-dependent (possibly negative)
// rates, plus the three qubit model families.

#include <string>
#include <vector>

#include "nmdeg/operators.hpp"
#include "nmdeg/rates.hpp"

namespace nmdeg {

struct NoiseChannel {
    Matrix op;  ///< noise operator V
    RateFunction rate;
    std::string label;
};

/// L_t(rho) = -i[H, rho] + sum_a gamma_a(t) (V_a rho V_a^+ - {V_a^+ V_a, rho}/2)
struct GeneratorSpec {
    Index dim = 0;
    Matrix hamiltonian;
    std::vector<NoiseChannel> channels;

    void validate() const {
        if (dim <= 0) throw InvalidInput("GeneratorSpec: dim must be positive");
        if (hamiltonian.rows() != dim || hamiltonian.cols() != dim)
            throw DimensionMismatch("GeneratorSpec: hamiltonian must be " + std::to_string(dim) + "x" +
                                    std::to_string(dim));
        HermitianOperator check(hamiltonian);
        for (const auto& ch : channels)
            if (ch.op.rows() != dim || ch.op.cols() != dim)
                throw DimensionMismatch("GeneratorSpec: noise operator '" + ch.label + "' must be " +
                                        std::to_string(dim) + "x" + std::to_string(dim));
    }

    bool extrapolates(double t_max) const {
        for (const auto& ch : channels)
            if (ch.rate.extrapolates(t_max)) return true;
        return false;
    }
};

inline Matrix generator_action(const GeneratorSpec& g, const Matrix& rho, double t) {
    if (t < 0.0) throw InvalidInput("generator_action: t must be >= 0");
    if (rho.rows() != g.dim || rho.cols() != g.dim)
        throw DimensionMismatch("generator_action: operator dimension does not match generator");
    Matrix out = -I_unit * (g.hamiltonian * rho - rho * g.hamiltonian);
    for (const auto& ch : g.channels) {
        const double gamma = ch.rate(t);
        const Matrix vdv = ch.op.adjoint() * ch.op;
        out += gamma * (ch.op * rho * ch.op.adjoint() - 0.5 * (vdv * rho + rho * vdv));
    }
    return out;
}

/// Precomputed vectorized pieces of a generator: L(t) = L_H + sum_a gamma_a(t) D_a.
class CompiledGenerator {
public:
    explicit CompiledGenerator(const GeneratorSpec& g) : dim_(g.dim) {
        g.validate();
        const Index d = g.dim;
        const Matrix id = Matrix::Identity(d, d);
        // vec(A X B) = (B^T (x) A) vec(X)
        hamiltonian_part_ = -I_unit * (kron(id, g.hamiltonian) - kron(g.hamiltonian.transpose(), id));
        for (const auto& ch : g.channels) {
            const Matrix vdv = ch.op.adjoint() * ch.op;
            dissipators_.push_back(kron(ch.op.conjugate(), ch.op) - 0.5 * kron(id, vdv) -
                                   0.5 * kron(vdv.transpose(), id));
            rates_.push_back(ch.rate);
        }
    }

    Index dim() const noexcept { return dim_; }

    Matrix at(double t) const {
        Matrix l = hamiltonian_part_;
        for (std::size_t a = 0; a < rates_.size(); ++a) {
            const double gamma = rates_[a](t);
            if (!std::isfinite(gamma))
                throw NumericalFailure("rate of channel " + std::to_string(a) +
                                       " is not finite at t=" + std::to_string(t));
            l += gamma * dissipators_[a];
        }
        return l;
    }

    static Matrix kron(const Matrix& a, const Matrix& b) {
        Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Index j = 0; j < a.cols(); ++j)
            for (Index i = 0; i < a.rows(); ++i)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

private:
    Index dim_;
    Matrix hamiltonian_part_;
    std::vector<Matrix> dissipators_;
    std::vector<RateFunction> rates_;
};

inline Superoperator generator_superoperator(const GeneratorSpec& g, double t) {
    if (t < 0.0) throw InvalidInput("generator_superoperator: t must be >= 0");
    return Superoperator(g.dim, g.dim, CompiledGenerator(g).at(t));
}

/// Pure dephasing L_t(rho) = gamma(t)/2 (sz rho sz - rho), written with the
/// noise operator sz/sqrt(2) so the channel rate is gamma itself.
inline GeneratorSpec dephasing_spec(RateFunction gamma) {
    GeneratorSpec g;
    g.dim = 2;
    g.hamiltonian = Matrix::Zero(2, 2);
    g.channels.push_back({pauli(3) / std::sqrt(2.0), std::move(gamma), "dephasing_z"});
    return g;
}

/// Random-unitary qubit generator sum_k gamma_k(t)/2 (s_k rho s_k - rho).
inline GeneratorSpec pauli_spec(RateFunction gamma1, RateFunction gamma2, RateFunction gamma3) {
    GeneratorSpec g;
    g.dim = 2;
    g.hamiltonian = Matrix::Zero(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    g.channels.push_back({pauli(1) * r, std::move(gamma1), "pauli_x"});
    g.channels.push_back({pauli(2) * r, std::move(gamma2), "pauli_y"});
    g.channels.push_back({pauli(3) * r, std::move(gamma3), "pauli_z"});
    return g;
}

/// Basis index 0 is the ground level |1>, index 1 the excited level |2>.
inline Matrix sigma_plus() {
    Matrix s = Matrix::Zero(2, 2);
    s(1, 0) = 1.0;  // |2><1|
    return s;
}

inline Matrix sigma_minus() { return sigma_plus().adjoint(); }

/// Pumping |1> -> |2> at gamma_plus and decay |2> -> |1> at gamma_minus.
inline GeneratorSpec pump_decay_spec(RateFunction gamma_plus, RateFunction gamma_minus) {
    GeneratorSpec g;
    g.dim = 2;
    g.hamiltonian = Matrix::Zero(2, 2);
    g.channels.push_back({sigma_plus(), std::move(gamma_plus), "pump"});
    g.channels.push_back({sigma_minus(), std::move(gamma_minus), "decay"});
    return g;
}

} // namespace nmdeg
