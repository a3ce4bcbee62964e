#pragma once

// Trace-norm flows of extended witnesses, the N+/N- integrals and the
// measures M_k, information flow between state pairs, and entropy monitors.

#include <cstdint>
#include <optional>
#include <vector>

#include "nmdeg/evolution.hpp"
#include "nmdeg/operators.hpp"
#include "nmdeg/optimize.hpp"

namespace nmdeg {

/// Finite-difference derivative of a norm signal at one node.
struct FlowSample {
    double t = 0.0;
    double value = 0.0;  ///< central difference (one-sided at the ends)
    double left = 0.0;
    double right = 0.0;
    bool kink = false;  ///< |left - right| > kink_tol
};

namespace detail {

/// A k*d witness stored as its k^2 vectorized d x d blocks, so that the
/// extended map acts on all blocks with one matrix product.
class BlockedWitness {
public:
    BlockedWitness(const Matrix& x, int k, Index d) : k_(k), d_(d), blocks_(d * d, k * k), out_(k * d, k * d) {
        if (x.rows() != k * d || x.cols() != k * d)
            throw DimensionMismatch("witness must act on k*dim = " + std::to_string(k * d) + " levels");
        for (Index b = 0; b < k; ++b)
            for (Index a = 0; a < k; ++a)
                for (Index j = 0; j < d; ++j)
                    for (Index i = 0; i < d; ++i) blocks_(i + j * d, a + b * k) = x(a * d + i, b * d + j);
    }

    double norm_at(const Superoperator& map) {
        images_.noalias() = map.matrix() * blocks_;
        for (Index b = 0; b < k_; ++b)
            for (Index a = 0; a < k_; ++a)
                for (Index j = 0; j < d_; ++j)
                    for (Index i = 0; i < d_; ++i) out_(a * d_ + i, b * d_ + j) = images_(i + j * d_, a + b * k_);
        return hermitian_trace_norm(out_);
    }

private:
    Index k_;
    Index d_;
    Matrix blocks_;
    Matrix images_;
    Matrix out_;
};

} // namespace detail

/// t -> ||[id_k (x) Lambda_t](X)||_1 on every grid node.
inline std::vector<double> norm_signal(const MapTrajectory& traj, const Matrix& x, int k) {
    detail::BlockedWitness w(x, k, traj.dim());
    std::vector<double> out(static_cast<std::size_t>(traj.nodes()));
    for (int i = 0; i < traj.nodes(); ++i) out[static_cast<std::size_t>(i)] = w.norm_at(traj.maps[static_cast<std::size_t>(i)]);
    return out;
}

inline double default_kink_tol(const TimeGrid& grid) { return 10.0 * grid.dt(); }

/// Derivative samples of a norm signal on the grid.
inline std::vector<FlowSample> flow_from_norms(const std::vector<double>& n, const TimeGrid& grid,
                                               double kink_tol) {
    const int nodes = static_cast<int>(n.size());
    const double dt = grid.dt();
    std::vector<FlowSample> out(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        FlowSample& s = out[static_cast<std::size_t>(i)];
        const std::size_t u = static_cast<std::size_t>(i);
        s.t = grid.time(i);
        if (i == 0) {
            s.right = s.left = s.value = (n[1] - n[0]) / dt;
        } else if (i == nodes - 1) {
            s.right = s.left = s.value = (n[u] - n[u - 1]) / dt;
        } else {
            s.left = (n[u] - n[u - 1]) / dt;
            s.right = (n[u + 1] - n[u]) / dt;
            s.value = 0.5 * (s.left + s.right);
            s.kink = std::abs(s.left - s.right) > kink_tol;
        }
    }
    return out;
}

inline std::vector<FlowSample> flow_series(const MapTrajectory& traj, const Matrix& x, int k) {
    return flow_from_norms(norm_signal(traj, x, k), traj.grid, default_kink_tol(traj.grid));
}

/// lambda_k(X; t_i), the derivative of the extended trace norm at node i.
inline FlowSample flow_lambda(const MapTrajectory& traj, const Matrix& x, int k, int i) {
    if (i < 0 || i >= traj.nodes()) throw InvalidInput("flow_lambda: node index out of range");
    detail::BlockedWitness w(x, k, traj.dim());
    const int lo = std::max(i - 1, 0);
    const int hi = std::min(i + 1, traj.nodes() - 1);
    std::vector<double> n;
    for (int j = lo; j <= hi; ++j) n.push_back(w.norm_at(traj.maps[static_cast<std::size_t>(j)]));
    auto local = flow_from_norms(n, traj.grid, default_kink_tol(traj.grid));
    FlowSample s = local[static_cast<std::size_t>(i - lo)];
    s.t = traj.time(i);
    return s;
}

struct NPlusMinus {
    double n_plus = 0.0;
    double n_minus_abs = 0.0;
    /// Cross-check: sums of norm increases / decreases between nodes.
    double increments = 0.0;
    double decrements = 0.0;
    int kinks = 0;
};

/// Trapezoidal integrals of the positive and negative parts of the flow.
/// At kink nodes the left interval uses the left derivative and the right
/// interval the right derivative.
inline NPlusMinus n_plus_minus_from_norms(const std::vector<double>& n, const TimeGrid& grid) {
    const auto flow = flow_from_norms(n, grid, default_kink_tol(grid));
    const double dt = grid.dt();
    NPlusMinus out;
    auto value_towards_right = [](const FlowSample& s) { return s.kink ? s.right : s.value; };
    auto value_towards_left = [](const FlowSample& s) { return s.kink ? s.left : s.value; };
    for (std::size_t i = 0; i + 1 < flow.size(); ++i) {
        const double a = value_towards_right(flow[i]);
        const double b = value_towards_left(flow[i + 1]);
        out.n_plus += 0.5 * dt * (std::max(a, 0.0) + std::max(b, 0.0));
        out.n_minus_abs += 0.5 * dt * (std::max(-a, 0.0) + std::max(-b, 0.0));
        const double step = n[i + 1] - n[i];
        if (step > 0) out.increments += step;
        else out.decrements -= step;
    }
    for (const auto& s : flow)
        if (s.kink) ++out.kinks;
    return out;
}

inline NPlusMinus n_plus_minus(const MapTrajectory& traj, const Matrix& x, int k) {
    return n_plus_minus_from_norms(norm_signal(traj, x, k), traj.grid);
}

inline double ratio_of(const NPlusMinus& n) {
    return n.n_minus_abs > 0.0 ? n.n_plus / n.n_minus_abs : 0.0;
}

struct WitnessResult {
    HermitianOperator x;  ///< traceless, unit trace norm
    double n_plus = 0.0;
    double n_minus_abs = 0.0;
    double ratio = 0.0;
    int kinks = 0;
    std::vector<FlowSample> flow;
};

struct MeasureOptions {
    int restarts = 64;
    int evaluations = 400;  ///< pattern-search evaluations per restart
    std::uint64_t seed = 42;
    int jobs = 1;
};

struct MeasureEstimate {
    int k = 1;
    double value = 0.0;  ///< lower bound on the supremum over witnesses
    WitnessResult best;
    int restarts_used = 0;
    bool truncated = true;  ///< integrals stop at t_max
};

/// Embeds X on k*d levels as |0..k-1 block| of a (k+extra)*d witness.
inline Matrix embed_witness(const Matrix& x, Index larger_dim) {
    Matrix out = Matrix::Zero(larger_dim, larger_dim);
    out.topLeftCorner(x.rows(), x.cols()) = x;
    return out;
}

/// Multistart pattern search for sup_X N+/|N-| over traceless Hermitian X on
/// k*dim levels (coordinates in the traceless part of the Hermitian basis).
/// Warm starts are polished first; the reported value is a lower bound.
inline MeasureEstimate measure_mk(const MapTrajectory& traj, int k, const MeasureOptions& opt = {},
                                  const std::vector<Matrix>& warm_starts = {}) {
    if (opt.restarts <= 0) throw InvalidInput("measure_mk: restarts must be positive");
    if (k < 1) throw InvalidInput("measure_mk: k must be >= 1");
    const Index kd = k * traj.dim();
    const auto basis = hermitian_basis(kd);
    const std::size_t m = basis.size() - 1;

    auto witness = [&](const std::vector<double>& c) {
        Matrix x = Matrix::Zero(kd, kd);
        for (std::size_t j = 0; j < m; ++j) x += c[j] * basis[j + 1].matrix();
        return x;
    };
    // N+/|N-| where some backflow exists; elsewhere the largest normalized
    // slope (<= 0), so the search can climb toward backflow.
    const double dt = traj.grid.dt();
    auto objective = [&](const std::vector<double>& c) {
        double norm2 = 0.0;
        for (double v : c) norm2 += v * v;
        if (!(norm2 > 1e-24)) return -std::numeric_limits<double>::max();
        const auto n = norm_signal(traj, witness(c), k);
        const NPlusMinus npm = n_plus_minus_from_norms(n, traj.grid);
        if (npm.n_plus > 0.0) return ratio_of(npm);
        double slope = -std::numeric_limits<double>::max();
        for (std::size_t i = 0; i + 1 < n.size(); ++i) slope = std::max(slope, (n[i + 1] - n[i]) / dt);
        return n.front() > 0.0 ? std::min(slope / n.front(), 0.0) : -std::numeric_limits<double>::max();
    };
    auto coordinates = [&](const Matrix& x) {
        std::vector<double> c(m);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            c[j] = (basis[j + 1].matrix() * x).trace().real();
            norm2 += c[j] * c[j];
        }
        const double s = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
        for (double& v : c) v *= s;
        return c;
    };

    std::vector<std::vector<double>> starts;
    for (const Matrix& w : warm_starts) {
        const Matrix x = w.rows() == kd ? w : embed_witness(w, kd);
        if (x.rows() == kd) starts.push_back(coordinates(x));
    }
    const int n_warm = static_cast<int>(starts.size());
    for (int r = 0; r < opt.restarts; ++r) {
        auto rng = restart_rng(opt.seed, static_cast<std::uint64_t>(r) + 0x10000u * static_cast<std::uint64_t>(k));
        NormalStream normal(rng);
        std::vector<double> c(m);
        double norm2 = 0.0;
        for (double& v : c) {
            v = normal();
            norm2 += v * v;
        }
        for (double& v : c) v /= std::sqrt(norm2);
        starts.push_back(std::move(c));
    }

    std::vector<SearchResult> results(starts.size());
    PatternSearchOptions popt;
    popt.max_evaluations = opt.evaluations;
    parallel_for(static_cast<int>(starts.size()), opt.jobs, [&](int i) {
        results[static_cast<std::size_t>(i)] = pattern_search_maximize(objective, starts[static_cast<std::size_t>(i)], popt);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].value > results[best].value) best = i;

    MeasureEstimate est;
    est.k = k;
    est.restarts_used = opt.restarts + n_warm;
    Matrix x = witness(results[best].x);
    const double tn = trace_norm(x);
    if (tn > 0.0) x /= tn;
    const auto norms = norm_signal(traj, x, k);
    const auto npm = n_plus_minus_from_norms(norms, traj.grid);
    est.best.x = HermitianOperator(x);
    est.best.n_plus = npm.n_plus;
    est.best.n_minus_abs = npm.n_minus_abs;
    est.best.ratio = ratio_of(npm);
    est.best.kinks = npm.kinks;
    est.best.flow = flow_from_norms(norms, traj.grid, default_kink_tol(traj.grid));
    est.value = est.best.ratio;
    return est;
}

/// M_k for ascending k; each level is warm-started from the embedded best
/// witness of the previous level, so the estimates are ordered like the
/// measures themselves.
inline std::vector<MeasureEstimate> measures(const MapTrajectory& traj, std::vector<int> ks,
                                             const MeasureOptions& opt = {}) {
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    std::vector<MeasureEstimate> out;
    for (int k : ks) {
        std::vector<Matrix> warm;
        if (!out.empty()) warm.push_back(out.back().best.x.matrix());
        out.push_back(measure_mk(traj, k, opt, warm));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Information flow between pairs of states

inline double blp_sigma(const MapTrajectory& traj, const DensityMatrix& rho1, const DensityMatrix& rho2, int i) {
    const Matrix diff = rho1.matrix() - rho2.matrix();
    if (trace_norm(diff) < 1e-14) throw DegenerateInput("blp_sigma: the two states coincide");
    return flow_lambda(traj, diff, 1, i).value;
}

/// Pure state from real parameters: Bloch angles (theta, phi) for qubits,
/// otherwise 2*d real and imaginary parts.
inline Vector pure_state_from_params(const double* p, Index d) {
    Vector psi(d);
    if (d == 2) {
        psi(0) = std::cos(0.5 * p[0]);
        psi(1) = std::polar(1.0, p[1]) * std::sin(0.5 * p[0]);
        return psi;
    }
    for (Index i = 0; i < d; ++i) psi(i) = complex(p[2 * i], p[2 * i + 1]);
    const double n = psi.norm();
    if (n > 0) psi /= n;
    else psi(0) = 1.0;
    return psi;
}

inline int pure_state_param_count(Index d) { return d == 2 ? 2 : static_cast<int>(2 * d); }

struct BlpSearchResult {
    double sigma = -std::numeric_limits<double>::infinity();
    double t = 0.0;
    int node = 0;
    Matrix rho1;
    Matrix rho2;
};

struct BlpSearchOptions {
    int restarts = 16;
    int evaluations = 200;
    std::uint64_t seed = 42;
    int jobs = 1;
};

/// Maximizes sigma over pure-state pairs and nodes in [i_begin, i_end].
inline BlpSearchResult blp_search(const MapTrajectory& traj, int i_begin, int i_end,
                                  const BlpSearchOptions& opt = {}) {
    if (opt.restarts <= 0) throw InvalidInput("blp_search: restarts must be positive");
    i_begin = std::clamp(i_begin, 0, traj.nodes() - 1);
    i_end = std::clamp(i_end, i_begin, traj.nodes() - 1);
    const Index d = traj.dim();
    const int np = pure_state_param_count(d);
    const int lo = std::max(i_begin - 1, 0);
    const int hi = std::min(i_end + 1, traj.nodes() - 1);
    const double dt = traj.grid.dt();

    auto states = [&](const std::vector<double>& p) {
        const Vector a = pure_state_from_params(p.data(), d);
        const Vector b = pure_state_from_params(p.data() + np, d);
        return std::pair<Matrix, Matrix>{a * a.adjoint(), b * b.adjoint()};
    };
    // best central-difference flow over the window, and its node
    auto window_max = [&](const Matrix& x, int* node) {
        std::vector<double> n;
        for (int j = lo; j <= hi; ++j)
            n.push_back(hermitian_trace_norm(traj.maps[static_cast<std::size_t>(j)].apply(x)));
        double best = -std::numeric_limits<double>::infinity();
        for (int i = i_begin; i <= i_end; ++i) {
            const std::size_t u = static_cast<std::size_t>(i - lo);
            double s;
            if (i == 0) s = (n[u + 1] - n[u]) / dt;
            else if (i == traj.nodes() - 1) s = (n[u] - n[u - 1]) / dt;
            else s = (n[u + 1] - n[u - 1]) / (2.0 * dt);
            if (s > best) {
                best = s;
                if (node) *node = i;
            }
        }
        return best;
    };
    auto objective = [&](const std::vector<double>& p) {
        auto [r1, r2] = states(p);
        return window_max(r1 - r2, nullptr);
    };

    std::vector<SearchResult> results(static_cast<std::size_t>(opt.restarts));
    PatternSearchOptions popt;
    popt.max_evaluations = opt.evaluations;
    parallel_for(opt.restarts, opt.jobs, [&](int r) {
        auto rng = restart_rng(opt.seed, static_cast<std::uint64_t>(r) + 0xB10Bu);
        std::vector<double> p(static_cast<std::size_t>(2 * np));
        for (double& v : p) v = (d == 2 ? 3.141592653589793 : 1.0) * (2.0 * uniform01(rng) - (d == 2 ? 0.0 : 1.0));
        results[static_cast<std::size_t>(r)] = pattern_search_maximize(objective, p, popt);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].value > results[best].value) best = i;

    BlpSearchResult out;
    auto [r1, r2] = states(results[best].x);
    out.rho1 = r1;
    out.rho2 = r2;
    out.sigma = window_max(r1 - r2, &out.node);
    out.t = traj.time(out.node);
    return out;
}

// ---------------------------------------------------------------------------
// Entropy monitors

/// Eigenvalue floor below which a state is treated as rank deficient.
inline constexpr double rank_floor = 1e-12;

inline double von_neumann_entropy(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double p = es.eigenvalues()(i);
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

/// S(rho || sigma) = Tr rho (ln rho - ln sigma); empty when sigma is rank deficient.
inline std::optional<double> relative_entropy(const Matrix& rho, const Matrix& sigma) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.adjoint()));
    if (es.eigenvalues().minCoeff() <= rank_floor) return std::nullopt;
    const Eigen::VectorXd logs = es.eigenvalues().array().log();
    const Matrix log_sigma = es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().adjoint();
    return -von_neumann_entropy(rho) - (rho * log_sigma).trace().real();
}

struct EntropyFlow {
    double value = 0.0;
    bool defined = true;
};

namespace detail {

template <class F>
EntropyFlow finite_difference(const MapTrajectory& traj, int i, F&& at_node) {
    if (i < 0 || i >= traj.nodes()) throw InvalidInput("entropy flow: node index out of range");
    const int lo = std::max(i - 1, 0);
    const int hi = std::min(i + 1, traj.nodes() - 1);
    const std::optional<double> a = at_node(lo);
    const std::optional<double> b = at_node(hi);
    if (!a || !b) return {0.0, false};
    return {(*b - *a) / ((hi - lo) * traj.grid.dt()), true};
}

} // namespace detail

/// d/dt S(Lambda_t rho1 || Lambda_t rho2) at node i. Positive values witness
/// failure of 2-divisibility.
inline EntropyFlow relative_entropy_flow(const MapTrajectory& traj, const DensityMatrix& rho1,
                                         const DensityMatrix& rho2, int i) {
    return detail::finite_difference(traj, i, [&](int j) {
        const auto& map = traj.maps[static_cast<std::size_t>(j)];
        return relative_entropy(map.apply(rho1.matrix()), map.apply(rho2.matrix()));
    });
}

inline bool is_unital_at(const MapTrajectory& traj, int i, double tol = 1e-9) {
    const Index d = traj.dim();
    const Matrix id = Matrix::Identity(d, d);
    return (traj.maps[static_cast<std::size_t>(i)].apply(id) - id).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unital(const MapTrajectory& traj, double tol = 1e-9) {
    for (int i = 0; i < traj.nodes(); ++i)
        if (!is_unital_at(traj, i, tol)) return false;
    return true;
}

/// d/dt S(Lambda_t rho) at node i, for unital trajectories only.
inline EntropyFlow entropy_flow(const MapTrajectory& traj, const DensityMatrix& rho, int i) {
    const int lo = std::max(i - 1, 0);
    const int hi = std::min(i + 1, traj.nodes() - 1);
    for (int j = lo; j <= hi; ++j)
        if (!is_unital_at(traj, j))
            throw NotApplicable("entropy_flow: trajectory is not unital at t=" + std::to_string(traj.time(j)));
    return detail::finite_difference(traj, i, [&](int j) -> std::optional<double> {
        return von_neumann_entropy(traj.maps[static_cast<std::size_t>(j)].apply(rho.matrix()));
    });
}

/// Random density matrix: Bloch-ball uniform for qubits, Ginibre otherwise.
inline DensityMatrix random_state(std::mt19937_64& rng, Index d) {
    NormalStream normal(rng);
    if (d == 2) {
        double x[3];
        double n2 = 0.0;
        for (double& v : x) {
            v = normal();
            n2 += v * v;
        }
        const double r = std::cbrt(uniform01(rng)) / std::sqrt(n2);
        Matrix rho = 0.5 * pauli(0);
        for (int k = 0; k < 3; ++k) rho += 0.5 * r * x[k] * pauli(k + 1);
        return DensityMatrix(rho);
    }
    Matrix g(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = complex(normal(), normal());
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(rho);
}

struct EntropySearchResult {
    double min_flow = std::numeric_limits<double>::infinity();
    double max_flow = -std::numeric_limits<double>::infinity();
    double t_min = 0.0;
    double t_max = 0.0;
    int samples = 0;
    int undefined = 0;
};

/// Extremes of the entropy flow over random states and nodes in [i_begin, i_end].
inline EntropySearchResult entropy_search(const MapTrajectory& traj, int i_begin, int i_end, int samples,
                                          std::uint64_t seed) {
    if (!is_unital(traj)) throw NotApplicable("entropy_search: trajectory is not unital");
    EntropySearchResult out;
    i_begin = std::clamp(i_begin, 0, traj.nodes() - 1);
    i_end = std::clamp(i_end, i_begin, traj.nodes() - 1);
    for (int s = 0; s < samples; ++s) {
        auto rng = restart_rng(seed, static_cast<std::uint64_t>(s) + 0xE27u);
        const DensityMatrix rho = random_state(rng, traj.dim());
        std::vector<double> ent(static_cast<std::size_t>(traj.nodes()), 0.0);
        const int lo = std::max(i_begin - 1, 0);
        const int hi = std::min(i_end + 1, traj.nodes() - 1);
        for (int j = lo; j <= hi; ++j)
            ent[static_cast<std::size_t>(j)] = von_neumann_entropy(traj.maps[static_cast<std::size_t>(j)].apply(rho.matrix()));
        for (int i = i_begin; i <= i_end; ++i) {
            const int a = std::max(i - 1, 0), b = std::min(i + 1, traj.nodes() - 1);
            const double f = (ent[static_cast<std::size_t>(b)] - ent[static_cast<std::size_t>(a)]) / ((b - a) * traj.grid.dt());
            if (f < out.min_flow) {
                out.min_flow = f;
                out.t_min = traj.time(i);
            }
            if (f > out.max_flow) {
                out.max_flow = f;
                out.t_max = traj.time(i);
            }
        }
        ++out.samples;
    }
    return out;
}

struct RelativeEntropySearchResult {
    double max_flow = -std::numeric_limits<double>::infinity();
    double t = 0.0;
    int samples = 0;
    int undefined = 0;  ///< (pair, node) evaluations skipped for rank deficiency
};

/// Largest relative-entropy flow over random state pairs and nodes.
inline RelativeEntropySearchResult relative_entropy_search(const MapTrajectory& traj, int i_begin, int i_end,
                                                           int samples, std::uint64_t seed) {
    RelativeEntropySearchResult out;
    i_begin = std::clamp(i_begin, 0, traj.nodes() - 1);
    i_end = std::clamp(i_end, i_begin, traj.nodes() - 1);
    const int lo = std::max(i_begin - 1, 0);
    const int hi = std::min(i_end + 1, traj.nodes() - 1);
    for (int s = 0; s < samples; ++s) {
        auto rng = restart_rng(seed, static_cast<std::uint64_t>(s) + 0x2E1u);
        const DensityMatrix r1 = random_state(rng, traj.dim());
        const DensityMatrix r2 = random_state(rng, traj.dim());
        std::vector<std::optional<double>> rel(static_cast<std::size_t>(traj.nodes()));
        for (int j = lo; j <= hi; ++j) {
            const auto& map = traj.maps[static_cast<std::size_t>(j)];
            rel[static_cast<std::size_t>(j)] = relative_entropy(map.apply(r1.matrix()), map.apply(r2.matrix()));
        }
        for (int i = i_begin; i <= i_end; ++i) {
            const int a = std::max(i - 1, 0), b = std::min(i + 1, traj.nodes() - 1);
            const auto& ra = rel[static_cast<std::size_t>(a)];
            const auto& rb = rel[static_cast<std::size_t>(b)];
            if (!ra || !rb) {
                ++out.undefined;
                continue;
            }
            const double f = (*rb - *ra) / ((b - a) * traj.grid.dt());
            if (f > out.max_flow) {
                out.max_flow = f;
                out.t = traj.time(i);
            }
        }
        ++out.samples;
    }
    return out;
}

} // namespace nmdeg
