#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "nmdeg/nmdeg.hpp"

namespace nmdeg::test {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    NormalStream n(rng);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = complex(n(), n());
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Index d) {
    const Matrix g = random_matrix(rng, d, d);
    return 0.5 * (g + g.adjoint());
}

inline Matrix random_unitary(std::mt19937_64& rng, Index d) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, d, d));
    return qr.householderQ();
}

/// Random CPTP map from `r` Kraus operators (Stinespring isometry).
inline Superoperator random_channel(std::mt19937_64& rng, Index d, Index r) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, d * r, d));
    const Matrix iso = qr.householderQ() * Matrix::Identity(d * r, d);
    std::vector<Matrix> kraus;
    for (Index a = 0; a < r; ++a) kraus.push_back(iso.block(a * d, 0, d, d));
    return Superoperator::from_kraus(kraus);
}

/// Transposition X -> X^T.
inline Superoperator transpose_map(Index d) {
    Matrix m = Matrix::Zero(d * d, d * d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) m(j + i * d, i + j * d) = 1.0;
    return Superoperator(d, d, m);
}

/// Reduction map X -> Tr(X) I - X (positive, not 2-positive).
inline Superoperator reduction_map(Index d) {
    Matrix m = -Matrix::Identity(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index p = 0; p < d; ++p) m(p + p * d, i + i * d) += 1.0;
    return Superoperator(d, d, m);
}

/// Qubit map with Pauli transfer matrix [[1, 0], [t, M]].
inline Superoperator map_from_ptm(const Eigen::Matrix4d& r) {
    Matrix m = Matrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m += 0.5 * r(a, b) * vec(pauli(a)) * vec(pauli(b)).adjoint();
    return Superoperator(2, 2, m);
}

/// Superoperator of exp(t L) for a constant generator.
inline Superoperator expm_map(const GeneratorSpec& g, double t) {
    const Matrix l = CompiledGenerator(g).at(0.0) * t;
    return Superoperator(g.dim, g.dim, l.exp());
}

/// Random time-independent Lindblad generator on d levels.
inline GeneratorSpec random_lindblad(std::mt19937_64& rng, Index d, int channels) {
    GeneratorSpec g;
    g.dim = d;
    g.hamiltonian = random_hermitian(rng, d);
    for (int a = 0; a < channels; ++a)
        g.channels.push_back({random_matrix(rng, d, d) * 0.5, RateFunction::constant(0.2 + uniform01(rng)), "c"});
    return g;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Schmidt rank of a bipartite d x d vector (ancilla index first).
inline int schmidt_rank(const Vector& psi, Index d, double tol = 1e-9) {
    Matrix m(d, d);
    for (Index a = 0; a < d; ++a)
        for (Index i = 0; i < d; ++i) m(a, i) = psi(a * d + i);
    Eigen::JacobiSVD<Matrix> svd(m);
    int r = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol * svd.singularValues()(0)) ++r;
    return r;
}

} // namespace nmdeg::test
