#pragma once

// Finite-dimensional operator algebra: Hermitian operators, density
// matrices, superoperators on column-stacked operators, Choi matrices, the
// trace norm and the ancilla extension id_k (x) Phi.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nmdeg/errors.hpp"

namespace nmdeg {

using complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr complex I_unit{0.0, 1.0};

/// Numerical tolerances shared by all modules. `psd` is relative to the
/// 2-norm of the matrix being tested.
struct Tolerances {
    double herm = 1e-10;
    double trace = 1e-9;
    double psd = 1e-9;
    Index max_extended_dim = 64;
};

inline bool all_finite(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw DimensionMismatch(std::string(what) + ": expected a square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

/// Largest singular value.
inline double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

/// Sum of singular values, computed by SVD.
inline double trace_norm(const Matrix& x) {
    if (!all_finite(x)) throw InvalidInput("trace_norm: non-finite entries");
    if (x.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues().sum();
}

/// Trace norm of a matrix known to be Hermitian (sum of |eigenvalues|).
/// Closed form for 2x2, symmetric eigensolver otherwise. This is the hot path
/// of the flow computations; `trace_norm` is the general reference.
inline double hermitian_trace_norm(const Matrix& x) {
    if (x.rows() == 2) {
        const double a = x(0, 0).real();
        const double d = x(1, 1).real();
        const double half_gap = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(x(0, 1)));
        return std::max(std::abs(a + d), 2.0 * half_gap);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline Matrix pauli(int k) {
    Matrix s = Matrix::Zero(2, 2);
    switch (k) {
    case 0: s(0, 0) = 1.0; s(1, 1) = 1.0; break;
    case 1: s(0, 1) = 1.0; s(1, 0) = 1.0; break;
    case 2: s(0, 1) = -I_unit; s(1, 0) = I_unit; break;
    case 3: s(0, 0) = 1.0; s(1, 1) = -1.0; break;
    default: throw InvalidInput("pauli: index must be 0..3");
    }
    return s;
}

/// Column-stacking vectorization: X(i,j) -> v[i + j*d].
inline Vector vec(const Matrix& x) {
    return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& v, Index rows) {
    if (rows <= 0 || v.size() % rows != 0)
        throw DimensionMismatch("unvec: length " + std::to_string(v.size()) +
                                " is not a multiple of " + std::to_string(rows));
    return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

class HermitianOperator {
public:
    HermitianOperator() = default;

    explicit HermitianOperator(Matrix m, double tol_herm = Tolerances{}.herm) : m_(std::move(m)) {
        require_square(m_, "HermitianOperator");
        if (!all_finite(m_)) throw InvalidInput("HermitianOperator: non-finite entries");
        const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol_herm * scale)
            throw InvalidInput("HermitianOperator: matrix is not Hermitian");
        m_ = 0.5 * (m_ + m_.adjoint());
    }

    Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

class DensityMatrix {
public:
    DensityMatrix() = default;

    explicit DensityMatrix(Matrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
        require_square(m_, "DensityMatrix");
        if (!all_finite(m_)) throw InvalidInput("DensityMatrix: non-finite entries");
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol.herm)
            throw InvalidInput("DensityMatrix: matrix is not Hermitian");
        m_ = 0.5 * (m_ + m_.adjoint());
        if (std::abs(m_.trace() - complex(1.0)) > tol.trace)
            throw InvalidInput("DensityMatrix: trace differs from 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol.psd)
            throw InvalidInput("DensityMatrix: negative eigenvalue");
    }

    /// |psi><psi| / <psi|psi>.
    static DensityMatrix pure(const Vector& psi) {
        const double n = psi.squaredNorm();
        if (!(n > 0.0)) throw InvalidInput("DensityMatrix::pure: zero vector");
        return DensityMatrix(psi * psi.adjoint() / n);
    }

    static DensityMatrix maximally_mixed(Index d) {
        return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
    }

    Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

/// Linear map B(C^dim_in) -> B(C^dim_out) acting on column-stacked operators.
class Superoperator {
public:
    Superoperator() = default;

    Superoperator(Index dim_in, Index dim_out, Matrix m)
        : dim_in_(dim_in), dim_out_(dim_out), m_(std::move(m)) {
        if (dim_in <= 0 || dim_out <= 0) throw InvalidInput("Superoperator: dimensions must be positive");
        if (m_.rows() != dim_out * dim_out || m_.cols() != dim_in * dim_in)
            throw DimensionMismatch("Superoperator: matrix is " + std::to_string(m_.rows()) + "x" +
                                    std::to_string(m_.cols()) + ", expected " +
                                    std::to_string(dim_out * dim_out) + "x" +
                                    std::to_string(dim_in * dim_in));
    }

    static Superoperator identity(Index d) {
        return Superoperator(d, d, Matrix::Identity(d * d, d * d));
    }

    /// X -> U X U^dagger.
    static Superoperator conjugation(const Matrix& u) {
        // vec(U X U^+) = (conj(U) (x) U) vec(X)
        const Index din = u.cols();
        const Index dout = u.rows();
        Matrix m(dout * dout, din * din);
        const Matrix uc = u.conjugate();
        for (Index j = 0; j < din; ++j)
            for (Index b = 0; b < dout; ++b)
                m.block(b * dout, j * din, dout, din) = uc(b, j) * u;
        return Superoperator(din, dout, m);
    }

    /// Sum_i K_i X K_i^dagger.
    static Superoperator from_kraus(const std::vector<Matrix>& kraus) {
        if (kraus.empty()) throw InvalidInput("from_kraus: no operators");
        Superoperator s = conjugation(kraus.front());
        for (std::size_t i = 1; i < kraus.size(); ++i) s.m_ += conjugation(kraus[i]).m_;
        return s;
    }

    Index dim_in() const noexcept { return dim_in_; }
    Index dim_out() const noexcept { return dim_out_; }
    const Matrix& matrix() const noexcept { return m_; }

    Matrix apply(const Matrix& x) const {
        if (x.rows() != dim_in_ || x.cols() != dim_in_)
            throw DimensionMismatch("apply: operator is " + std::to_string(x.rows()) + "x" +
                                    std::to_string(x.cols()) + ", map expects dimension " +
                                    std::to_string(dim_in_));
        Vector out = m_ * vec(x);
        return unvec(out, dim_out_);
    }

    /// (this o other)(X) = this(other(X)).
    Superoperator operator*(const Superoperator& other) const {
        if (other.dim_out_ != dim_in_) throw DimensionMismatch("compose: inner dimensions differ");
        return Superoperator(other.dim_in_, dim_out_, m_ * other.m_);
    }

    /// Largest |Tr Phi(E_ij) - Tr E_ij| over matrix units.
    double trace_defect() const {
        double worst = 0.0;
        for (Index j = 0; j < dim_in_; ++j)
            for (Index i = 0; i < dim_in_; ++i) {
                complex tr = 0.0;
                for (Index p = 0; p < dim_out_; ++p) tr += m_(p + p * dim_out_, i + j * dim_in_);
                const double expected = (i == j) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(tr - expected));
            }
        return worst;
    }

    bool is_trace_preserving(double tol = Tolerances{}.trace) const { return trace_defect() <= tol; }

private:
    Index dim_in_ = 0;
    Index dim_out_ = 0;
    Matrix m_;
};

/// id_k (x) Phi applied blockwise to Y in M_k (x) B(C^d), ancilla index first:
/// row (a*d + i) pairs ancilla level a with system level i.
inline Matrix apply_extended(const Superoperator& phi, Index k, const Matrix& y) {
    const Index din = phi.dim_in();
    const Index dout = phi.dim_out();
    if (k < 1) throw InvalidInput("apply_extended: k must be >= 1");
    if (y.rows() != k * din || y.cols() != k * din)
        throw DimensionMismatch("apply_extended: operator dimension " + std::to_string(y.rows()) +
                                " does not match k*dim = " + std::to_string(k * din));
    Matrix out(k * dout, k * dout);
    Matrix block(din, din);
    for (Index b = 0; b < k; ++b)
        for (Index a = 0; a < k; ++a) {
            block = y.block(a * din, b * din, din, din);
            Vector v = phi.matrix() * vec(block);
            out.block(a * dout, b * dout, dout, dout) = unvec(v, dout);
        }
    return out;
}

/// Superoperator of id_k (x) Phi (ancilla first), acting on (k*dim)-level
/// operators.
inline Superoperator extend(Index k, const Superoperator& phi, const Tolerances& tol = {}) {
    if (k < 1) throw InvalidInput("extend: k must be >= 1");
    if (k == 1) return phi;
    const Index din = phi.dim_in();
    const Index dout = phi.dim_out();
    const Index kin = k * din;
    const Index kout = k * dout;
    if (std::max(kin, kout) > tol.max_extended_dim)
        throw InvalidInput("extend: k*dim = " + std::to_string(std::max(kin, kout)) +
                           " exceeds max_extended_dim = " + std::to_string(tol.max_extended_dim));
    Matrix m = Matrix::Zero(kout * kout, kin * kin);
    for (Index b = 0; b < k; ++b)
        for (Index a = 0; a < k; ++a)
            for (Index j = 0; j < din; ++j)
                for (Index i = 0; i < din; ++i) {
                    const Index col = (a * din + i) + (b * din + j) * kin;
                    const Index src = i + j * din;
                    for (Index q = 0; q < dout; ++q)
                        for (Index p = 0; p < dout; ++p)
                            m((a * dout + p) + (b * dout + q) * kout, col) =
                                phi.matrix()(p + q * dout, src);
                }
    return Superoperator(kin, kout, m);
}

/// (id (x) Phi)(|Omega><Omega|) with the unnormalized maximally entangled
/// vector |Omega> = sum_i |i>|i>.
class ChoiMatrix {
public:
    ChoiMatrix(Index dim, Matrix m) : dim_(dim), m_(std::move(m)) {}

    Index dim() const noexcept { return dim_; }
    const Matrix& matrix() const noexcept { return m_; }

    /// Ascending eigenvalues of the Hermitian part.
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    double floor() const { return eigenvalues()(0); }
    double norm() const { return spectral_norm(m_); }

    Matrix hermitian_part() const { return 0.5 * (m_ + m_.adjoint()); }

    bool is_completely_positive(double tol_psd = Tolerances{}.psd) const {
        return floor() >= -tol_psd * std::max(norm(), 1e-300);
    }

private:
    Index dim_;
    Matrix m_;
};

inline ChoiMatrix choi(const Superoperator& phi) {
    if (phi.dim_in() != phi.dim_out()) throw DimensionMismatch("choi: map must be square");
    const Index d = phi.dim_in();
    Matrix c(d * d, d * d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i)
            for (Index q = 0; q < d; ++q)
                for (Index p = 0; p < d; ++p)
                    c(i * d + p, j * d + q) = phi.matrix()(p + q * d, i + j * d);
    return ChoiMatrix(d, c);
}

/// Hilbert-Schmidt orthonormal Hermitian basis of B(C^d): I/sqrt(d) first,
/// then off-diagonal symmetric/antisymmetric pairs, then traceless diagonals.
/// For d = 2 this is {I, sx, sy, sz}/sqrt(2).
inline std::vector<HermitianOperator> hermitian_basis(Index d) {
    if (d < 1) throw InvalidInput("hermitian_basis: d must be >= 1");
    std::vector<HermitianOperator> basis;
    basis.reserve(static_cast<std::size_t>(d * d));
    const double r2 = 1.0 / std::sqrt(2.0);
    basis.emplace_back(Matrix(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d))));
    for (Index j = 0; j < d; ++j)
        for (Index k = j + 1; k < d; ++k) {
            Matrix s = Matrix::Zero(d, d);
            s(j, k) = r2;
            s(k, j) = r2;
            basis.emplace_back(s);
            Matrix a = Matrix::Zero(d, d);
            a(j, k) = -I_unit * r2;
            a(k, j) = I_unit * r2;
            basis.emplace_back(a);
        }
    for (Index l = 1; l < d; ++l) {
        Matrix g = Matrix::Zero(d, d);
        const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
        for (Index m = 0; m < l; ++m) g(m, m) = norm;
        g(l, l) = -static_cast<double>(l) * norm;
        basis.emplace_back(g);
    }
    return basis;
}

/// R_ab = Tr(s_a Phi(s_b)) / 2 for a qubit map, a,b in {0,1,2,3}.
inline Eigen::Matrix4d pauli_transfer_matrix(const Superoperator& phi) {
    if (phi.dim_in() != 2 || phi.dim_out() != 2)
        throw DimensionMismatch("pauli_transfer_matrix: qubit maps only");
    Eigen::Matrix4d r;
    for (int b = 0; b < 4; ++b) {
        const Matrix out = phi.apply(pauli(b));
        for (int a = 0; a < 4; ++a) r(a, b) = 0.5 * (pauli(a) * out).trace().real();
    }
    return r;
}

} // namespace nmdeg
