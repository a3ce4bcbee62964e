#pragma once

// k-positivity of propagators, k-divisibility scans, the non-Markovianity
// degree, and the closed-form divisibility criteria of the qubit models.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nmdeg/evolution.hpp"
#include "nmdeg/operators.hpp"
#include "nmdeg/optimize.hpp"

namespace nmdeg {

struct KPositivityVerdict {
    enum class Status { positive_within_budget, violated };

    int k = 1;
    Status status = Status::positive_within_budget;
    /// Normalized vector of Schmidt rank <= k with <psi|C|psi> = floor, present
    /// only for violations.
    std::optional<Vector> certificate;
    /// Most negative <psi|C|psi> found (the exact Choi floor when k = dim).
    double floor = 0.0;
    /// Violation threshold actually applied: tol * ||C||_2.
    double threshold = 0.0;
    int restarts_used = 0;

    bool violated() const noexcept { return status == Status::violated; }
};

struct KPositivityOptions {
    int budget = 64;       ///< multistart restarts
    int iterations = 500;  ///< alternating sweeps per restart
    double tol = 1e-9;     ///< relative to the Choi matrix 2-norm
    std::uint64_t seed = 42;
    /// Stop after this many consecutive restarts that fail to lower the floor
    /// by more than 1% (plus the threshold); 0 spends the whole budget.
    int patience = 8;
};

/// <psi|C|psi> / <psi|psi> with C the Hermitian part of the Choi matrix.
inline double choi_expectation(const Superoperator& phi, const Vector& psi) {
    const Matrix c = choi(phi).hermitian_part();
    return (psi.adjoint() * c * psi)(0, 0).real() / psi.squaredNorm();
}

/// Complete positivity from the Choi spectrum; the certificate is the
/// eigenvector of the most negative eigenvalue.
inline KPositivityVerdict is_completely_positive(const Superoperator& phi, double tol = 1e-9) {
    const ChoiMatrix c = choi(phi);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.hermitian_part());
    KPositivityVerdict v;
    v.k = static_cast<int>(c.dim());
    v.floor = es.eigenvalues()(0);
    v.threshold = tol * es.eigenvalues().cwiseAbs().maxCoeff();
    v.restarts_used = 0;
    if (v.floor < -v.threshold) {
        v.status = KPositivityVerdict::Status::violated;
        v.certificate = es.eigenvectors().col(0);
    }
    return v;
}

namespace detail {

/// In-place Gram-Schmidt on the columns of q; a degenerate column is
/// replaced by the first standard vector that is independent of the others.
inline void orthonormalize_columns(Matrix& q) {
    for (Index j = 0; j < q.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (Index i = 0; i < j; ++i) q.col(j) -= (q.col(i).dot(q.col(j))) * q.col(i);
        double n = q.col(j).norm();
        for (Index e = 0; !(n > 1e-12) && e < q.rows(); ++e) {
            q.col(j).setZero();
            q(e, j) = 1.0;
            for (Index i = 0; i < j; ++i) q.col(j) -= (q.col(i).dot(q.col(j))) * q.col(i);
            n = q.col(j).norm();
        }
        q.col(j) /= n;
    }
}

/// Lowest eigenpair of a Hermitian matrix, closed form for 2x2.
inline double lowest_eigenpair(const Matrix& m, Vector& v) {
    if (m.rows() == 2) {
        const double a = m(0, 0).real(), c = m(1, 1).real();
        const complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
        const double h = 0.5 * (a - c);
        const double lambda = 0.5 * (a + c) - std::sqrt(h * h + std::norm(b));
        v.resize(2);
        if (std::abs(b) == 0.0) {
            v(0) = a <= c ? 1.0 : 0.0;
            v(1) = a <= c ? 0.0 : 1.0;
            return lambda;
        }
        // rows of (M - lambda) v = 0; use the better conditioned one
        if (std::abs(lambda - a) >= std::abs(lambda - c)) {
            v(0) = b;
            v(1) = lambda - a;
        } else {
            v(0) = lambda - c;
            v(1) = std::conj(b);
        }
        v.normalize();
        return lambda;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    v = es.eigenvectors().col(0);
    return es.eigenvalues()(0);
}

/// Minimizes <psi|C|psi> over psi = sum_r a_r (x) b_r, alternately solving
/// exactly for all a_r (b fixed) and all b_r (a fixed). Each half-step is a
/// small Hermitian eigenproblem, so the objective never increases.
class SchmidtRankMinimizer {
public:
    SchmidtRankMinimizer(const Matrix& choi_herm, Index d, Index k)
        : c_(choi_herm), d_(d), k_(std::min(k, d)), scale_(choi_herm.cwiseAbs().maxCoeff()) {}

    struct Result {
        double value;
        Vector psi;
    };

    /// Sweeps until converged, until the value drops below -threshold, or
    /// until the geometric extrapolation of the decrease stays well above it.
    Result run(Matrix a, Matrix b, int iterations, double threshold = 0.0) const {
        Result best{std::numeric_limits<double>::infinity(), Vector()};
        double value = best.value;
        double last_drop = 0.0;
        Matrix m(k_ * d_, k_ * d_);
        Vector y;
        for (int it = 0; it < iterations; ++it) {
            const double before = value;
            orthonormalize_columns(a);
            ancilla_fixed(a, m);
            value = lowest_eigenpair(m, y);
            for (Index r = 0; r < k_; ++r)
                for (Index i = 0; i < d_; ++i) b(i, r) = y(r * d_ + i);
            orthonormalize_columns(b);
            system_fixed(b, m);
            value = lowest_eigenpair(m, y);
            for (Index r = 0; r < k_; ++r)
                for (Index x = 0; x < d_; ++x) a(x, r) = y(r * d_ + x);
            if (value < best.value) {
                best.value = value;
                best.psi = assemble(a, b);
            }
            if (value < -threshold) break;
            const double drop = before - value;
            if (drop <= 1e-13 * scale_) break;
            if (it >= 2 && drop < last_drop) {
                const double rho = drop / last_drop;
                if (value - 10.0 * drop * rho / (1.0 - rho) > threshold) break;
            }
            last_drop = drop;
        }
        return best;
    }

    /// Factors psi (Schmidt rank <= k) into a, b with psi = sum_r a_r (x) b_r.
    std::pair<Matrix, Matrix> factor(const Vector& psi) const {
        Matrix m(d_, d_);
        for (Index a = 0; a < d_; ++a)
            for (Index i = 0; i < d_; ++i) m(a, i) = psi(a * d_ + i);
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Matrix a = svd.matrixU().leftCols(k_) * svd.singularValues().head(k_).asDiagonal();
        Matrix b = svd.matrixV().leftCols(k_).conjugate();
        return {a, b};
    }

    Index rank() const noexcept { return k_; }

private:
    // psi = sum_r q_r (x) y_r: M[(r,i),(s,j)] = sum_xy conj(q_xr) q_ys C(xd+i, yd+j)
    void ancilla_fixed(const Matrix& q, Matrix& m) const {
        m.setZero();
        for (Index r = 0; r < k_; ++r)
            for (Index s = 0; s < k_; ++s)
                for (Index x = 0; x < d_; ++x)
                    for (Index y = 0; y < d_; ++y) {
                        const complex w = std::conj(q(x, r)) * q(y, s);
                        if (w == 0.0) continue;
                        m.block(r * d_, s * d_, d_, d_) += w * c_.block(x * d_, y * d_, d_, d_);
                    }
    }

    // psi = sum_r y_r (x) q_r: M[(r,x),(s,y)] = sum_ij conj(q_ir) q_js C(xd+i, yd+j)
    void system_fixed(const Matrix& q, Matrix& m) const {
        m.setZero();
        for (Index r = 0; r < k_; ++r)
            for (Index s = 0; s < k_; ++s)
                for (Index x = 0; x < d_; ++x)
                    for (Index y = 0; y < d_; ++y) {
                        const auto blk = c_.block(x * d_, y * d_, d_, d_);
                        m(r * d_ + x, s * d_ + y) = (q.col(r).adjoint() * blk * q.col(s))(0, 0);
                    }
    }

    Vector assemble(const Matrix& a, const Matrix& b) const {
        Vector psi = Vector::Zero(d_ * d_);
        for (Index r = 0; r < k_; ++r)
            for (Index x = 0; x < d_; ++x) psi.segment(x * d_, d_) += a(x, r) * b.col(r);
        const double n = psi.norm();
        if (n > 0.0) psi /= n;
        return psi;
    }

    const Matrix& c_;
    Index d_;
    Index k_;
    double scale_;
};

} // namespace detail

/// One-sided k-positivity test: searches for a vector of Schmidt rank <= k
/// with negative Choi expectation. A violation carries an exact certificate;
/// otherwise the verdict is "positive within budget". The search stops at the
/// first restart that certifies a violation.
inline KPositivityVerdict is_k_positive(const Superoperator& phi, int k, const KPositivityOptions& opt = {},
                                        const std::vector<Vector>& warm_starts = {}) {
    if (phi.dim_in() != phi.dim_out()) throw DimensionMismatch("is_k_positive: map must be square");
    const Index d = phi.dim_in();
    if (k < 1 || k > d) throw InvalidInput("is_k_positive: k must be in [1, dim]");
    if (opt.budget <= 0) throw InvalidInput("is_k_positive: budget must be positive");

    const Matrix c = choi(phi).hermitian_part();
    Eigen::SelfAdjointEigenSolver<Matrix> spectrum(c, Eigen::EigenvaluesOnly);
    KPositivityVerdict v;
    v.k = k;
    v.threshold = opt.tol * spectrum.eigenvalues().cwiseAbs().maxCoeff();
    v.floor = std::numeric_limits<double>::infinity();

    const detail::SchmidtRankMinimizer minimizer(c, d, k);
    Vector best_psi;
    auto consider = [&](const detail::SchmidtRankMinimizer::Result& r) {
        if (r.value < v.floor) {
            v.floor = r.value;
            best_psi = r.psi;
        }
    };

    for (const Vector& w : warm_starts) {
        if (w.size() != d * d) continue;
        auto [a, b] = minimizer.factor(w);
        consider(minimizer.run(a, b, opt.iterations, v.threshold));
    }
    int stale = 0;
    for (int r = 0; r < opt.budget && !(v.floor < -v.threshold); ++r) {
        if (opt.patience > 0 && stale >= opt.patience) break;
        const double previous = v.floor;
        auto rng = restart_rng(opt.seed, static_cast<std::uint64_t>(r));
        NormalStream normal(rng);
        Matrix a(d, minimizer.rank()), b(d, minimizer.rank());
        for (Index j = 0; j < a.cols(); ++j)
            for (Index i = 0; i < d; ++i) {
                a(i, j) = complex(normal(), normal());
                b(i, j) = complex(normal(), normal());
            }
        consider(minimizer.run(a, b, opt.iterations, v.threshold));
        v.restarts_used = r + 1;
        const bool improved = !std::isfinite(previous) || previous - v.floor > 0.01 * std::abs(previous) + v.threshold;
        stale = improved ? 0 : stale + 1;
    }
    if (v.floor < -v.threshold) {
        v.status = KPositivityVerdict::Status::violated;
        v.certificate = best_psi;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Divisibility scans

struct DivisibilityOptions {
    double tol = 1e-9;
    int budget = 64;
    int iterations = 500;
    std::uint64_t seed = 42;
    double cond_max = default_cond_max;
    int jobs = 1;
    int patience = 8;
};

/// Verdict for the adjacent-node propagator V(t_{i+1}, t_i).
struct StepVerdict {
    int index = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    bool singular = false;  ///< propagator not extracted (condition number > cond_max)
    double condition = 1.0;
    KPositivityVerdict verdict;

    bool violated() const noexcept { return !singular && verdict.violated(); }
};

namespace detail {

inline std::uint64_t step_seed(std::uint64_t seed, int step, int k) {
    std::uint64_t h = seed * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(step) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k) * 0xBF58476D1CE4E5B9ull;
    return h;
}

} // namespace detail

/// k-positivity of every adjacent propagator. For k = dim the exact Choi test
/// is used. `lower` (the scan at a smaller k) supplies warm starts so that a
/// violation certified at k is also certified here.
inline std::vector<StepVerdict> scan_divisibility(const MapTrajectory& traj, int k,
                                                  const DivisibilityOptions& opt = {},
                                                  const std::vector<StepVerdict>* lower = nullptr) {
    const int n = static_cast<int>(traj.dim());
    if (k < 1 || k > n) throw InvalidInput("scan_divisibility: k must be in [1, dim]");
    const int steps = traj.nodes() - 1;
    std::vector<StepVerdict> out(static_cast<std::size_t>(std::max(steps, 0)));
    parallel_for(steps, opt.jobs, [&](int i) {
        StepVerdict& sv = out[static_cast<std::size_t>(i)];
        sv.index = i;
        sv.t_start = traj.time(i);
        sv.t_end = traj.time(i + 1);
        sv.condition = traj.condition_numbers[static_cast<std::size_t>(i)];
        sv.verdict.k = k;
        Superoperator v;
        try {
            v = propagator(traj, i, i + 1, opt.cond_max);
        } catch (const SingularMap&) {
            sv.singular = true;
            return;
        }
        if (k == n) {
            sv.verdict = is_completely_positive(v, opt.tol);
            return;
        }
        std::vector<Vector> warm;
        if (lower != nullptr && static_cast<std::size_t>(i) < lower->size()) {
            const auto& lv = (*lower)[static_cast<std::size_t>(i)].verdict;
            if (lv.certificate) warm.push_back(*lv.certificate);
        }
        KPositivityOptions kopt{opt.budget, opt.iterations, opt.tol, detail::step_seed(opt.seed, i, k), opt.patience};
        sv.verdict = is_k_positive(v, k, kopt, warm);
    });
    return out;
}

enum class Classification { markovian, weakly_non_markovian, essentially_non_markovian };

inline const char* to_string(Classification c) {
    switch (c) {
    case Classification::markovian: return "markovian";
    case Classification::weakly_non_markovian: return "weakly_non_markovian";
    case Classification::essentially_non_markovian: return "essentially_non_markovian";
    }
    return "unknown";
}

struct NMDReport {
    int n = 0;
    std::vector<bool> per_k_divisible;  ///< index k-1
    int degree = 0;
    Classification classification = Classification::markovian;
    std::vector<std::pair<double, int>> violation_times;  ///< (t_start, k)
    std::vector<std::vector<StepVerdict>> scans;          ///< index k-1
    int singular_steps = 0;
};

/// Degree n - max{k : k-divisible} (max over a set containing 0).
inline int degree_from_divisibility(const std::vector<bool>& per_k_divisible) {
    const int n = static_cast<int>(per_k_divisible.size());
    int kmax = 0;
    for (int k = 1; k <= n; ++k)
        if (per_k_divisible[static_cast<std::size_t>(k - 1)]) kmax = k;
    return n - kmax;
}

inline Classification classify(int degree, int n) {
    if (degree == 0) return Classification::markovian;
    if (degree == n) return Classification::essentially_non_markovian;
    return Classification::weakly_non_markovian;
}

inline NMDReport nmd(const MapTrajectory& traj, const DivisibilityOptions& opt = {}) {
    NMDReport rep;
    rep.n = static_cast<int>(traj.dim());
    for (int k = 1; k <= rep.n; ++k) {
        const std::vector<StepVerdict>* lower = rep.scans.empty() ? nullptr : &rep.scans.back();
        rep.scans.push_back(scan_divisibility(traj, k, opt, lower));
        bool clean = true;
        for (const auto& sv : rep.scans.back())
            if (sv.violated()) {
                clean = false;
                rep.violation_times.emplace_back(sv.t_start, k);
            }
        rep.per_k_divisible.push_back(clean);
    }
    // A certified violation at k is a violation at every k' > k.
    for (int k = 2; k <= rep.n; ++k)
        if (!rep.per_k_divisible[static_cast<std::size_t>(k - 2)])
            rep.per_k_divisible[static_cast<std::size_t>(k - 1)] = false;
    for (const auto& sv : rep.scans.front())
        if (sv.singular) ++rep.singular_steps;
    rep.degree = degree_from_divisibility(rep.per_k_divisible);
    rep.classification = classify(rep.degree, rep.n);
    return rep;
}

/// Global complete positivity of Lambda_t at every node.
struct Admission {
    bool legitimate = true;
    double worst_floor = 0.0;  ///< most negative Choi eigenvalue over the grid
    double worst_time = 0.0;
};

inline Admission admit(const MapTrajectory& traj, double tol = 1e-9) {
    Admission adm;
    adm.worst_floor = std::numeric_limits<double>::infinity();
    for (int i = 0; i < traj.nodes(); ++i) {
        const auto v = is_completely_positive(traj.maps[static_cast<std::size_t>(i)], tol);
        if (v.floor < adm.worst_floor) {
            adm.worst_floor = v.floor;
            adm.worst_time = traj.time(i);
        }
        if (v.violated()) adm.legitimate = false;
    }
    return adm;
}

// ---------------------------------------------------------------------------
// Closed-form criteria of the qubit models

struct PauliCriteria {
    bool cp = true;      ///< all gamma_k >= 0
    bool p = true;       ///< all pairwise sums >= 0
    bool volume = true;  ///< gamma_1 + gamma_2 + gamma_3 >= 0
};

inline PauliCriteria pauli_criteria_from_rates(double g1, double g2, double g3) {
    return {g1 >= 0.0 && g2 >= 0.0 && g3 >= 0.0,
            g1 + g2 >= 0.0 && g1 + g3 >= 0.0 && g2 + g3 >= 0.0,
            g1 + g2 + g3 >= 0.0};
}

inline PauliCriteria pauli_criteria(const RateFunction& g1, const RateFunction& g2, const RateFunction& g3,
                                    double t) {
    return pauli_criteria_from_rates(g1(t), g2(t), g3(t));
}

struct PumpDecayCriteria {
    bool legit_integrals = true;  ///< 0 <= int gamma_pm e^Gamma <= e^Gamma(t) - 1
    bool cp_div = true;           ///< gamma_+ >= 0 and gamma_- >= 0
    bool p_div = true;            ///< gamma_+ + gamma_- >= 0
    double integral_plus = 0.0;
    double integral_minus = 0.0;
    double upper_bound = 0.0;  ///< e^Gamma(t) - 1
};

inline PumpDecayCriteria pump_decay_criteria(const RateFunction& gamma_plus, const RateFunction& gamma_minus,
                                             double t) {
    PumpDecayCriteria c;
    const double gp = gamma_plus(t), gm = gamma_minus(t);
    c.cp_div = gp >= 0.0 && gm >= 0.0;
    c.p_div = gp + gm >= 0.0;
    const RateFunction total = RateFunction::sum({gamma_plus, gamma_minus});
    auto weighted = [&](const RateFunction& rate) {
        std::vector<double> breaks = total.breakpoints();
        const auto f = [&](double s) { return rate(s) * std::exp(gamma_integral(total, s)); };
        return detail::integrate_piecewise(f, 0.0, t, breaks);
    };
    c.integral_plus = weighted(gamma_plus);
    c.integral_minus = weighted(gamma_minus);
    c.upper_bound = std::expm1(gamma_integral(total, t));
    const double slack = 1e-9 * (1.0 + std::abs(c.upper_bound));
    for (double v : {c.integral_plus, c.integral_minus})
        if (v < -slack || v > c.upper_bound + slack) c.legit_integrals = false;
    return c;
}

} // namespace nmdeg
