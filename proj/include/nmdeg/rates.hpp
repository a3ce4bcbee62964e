#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nmdeg/errors.hpp"

namespace nmdeg {

/// Absolute tolerance of the rate quadratures.
inline constexpr double quad_tol = 1e-10;

/// Time-dependent decoherence rate gamma(t). Rates may be negative.
///
/// Kinds:
///   constant   value
///   sinusoid   offset + a*sin(w*t + phase)
///   exp_poly   (c0 + c1 t + c2 t^2 + ...) * exp(-decay*t)
///   tanh       a*tanh(w*t)
///   bump       a * (tanh((t-t0)/width) - tanh((t-t1)/width)) / 2, a smoothed
///              indicator of [t0, t1]; width = 0 gives the sharp indicator
///   tabulated  linear interpolation of (t, v) samples, constant outside
///   sum        sum of terms
///   scaled     factor * term
class RateFunction {
public:
    enum class Kind { constant, sinusoid, exp_poly, tanh, bump, tabulated, sum, scaled };

    RateFunction() = default;

    static RateFunction constant(double value) {
        RateFunction r(Kind::constant);
        r.params_ = {value};
        r.check_params();
        return r;
    }

    static RateFunction sinusoid(double a, double w, double phase = 0.0, double offset = 0.0) {
        RateFunction r(Kind::sinusoid);
        r.params_ = {a, w, phase, offset};
        r.check_params();
        return r;
    }

    static RateFunction exp_poly(std::vector<double> coeffs, double decay) {
        if (coeffs.empty()) throw InvalidInput("exp_poly rate: empty coefficient list");
        RateFunction r(Kind::exp_poly);
        r.params_ = std::move(coeffs);
        r.params_.push_back(decay);
        r.check_params();
        return r;
    }

    static RateFunction tanh(double a, double w) {
        RateFunction r(Kind::tanh);
        r.params_ = {a, w};
        r.check_params();
        return r;
    }

    static RateFunction bump(double a, double t0, double t1, double width) {
        if (!(t1 > t0)) throw InvalidInput("bump rate: requires t1 > t0");
        if (!(width >= 0.0)) throw InvalidInput("bump rate: width must be >= 0");
        RateFunction r(Kind::bump);
        r.params_ = {a, t0, t1, width};
        r.check_params();
        return r;
    }

    static RateFunction tabulated(std::vector<double> t, std::vector<double> v) {
        if (t.size() != v.size()) throw InvalidInput("tabulated rate: t and v lengths differ");
        if (t.empty()) throw InvalidInput("tabulated rate: no samples");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1]))
                throw InvalidInput("tabulated rate: sample times must be strictly increasing");
        RateFunction r(Kind::tabulated);
        r.times_ = std::move(t);
        r.values_ = std::move(v);
        for (double x : r.times_)
            if (!std::isfinite(x)) throw InvalidInput("tabulated rate: non-finite time");
        for (double x : r.values_)
            if (!std::isfinite(x)) throw InvalidInput("tabulated rate: non-finite value");
        return r;
    }

    static RateFunction sum(std::vector<RateFunction> terms) {
        if (terms.empty()) throw InvalidInput("sum rate: no terms");
        RateFunction r(Kind::sum);
        r.terms_ = std::move(terms);
        return r;
    }

    RateFunction scaled(double factor) const {
        RateFunction r(Kind::scaled);
        r.params_ = {factor};
        r.check_params();
        r.terms_ = {*this};
        return r;
    }

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    const std::vector<double>& table_times() const noexcept { return times_; }
    const std::vector<double>& table_values() const noexcept { return values_; }
    const std::vector<RateFunction>& terms() const noexcept { return terms_; }

    double operator()(double t) const {
        switch (kind_) {
        case Kind::constant:
            return params_[0];
        case Kind::sinusoid:
            return params_[3] + params_[0] * std::sin(params_[1] * t + params_[2]);
        case Kind::exp_poly: {
            double poly = 0.0;
            for (std::size_t i = params_.size() - 1; i-- > 0;) poly = poly * t + params_[i];
            return poly * std::exp(-params_.back() * t);
        }
        case Kind::tanh:
            return params_[0] * std::tanh(params_[1] * t);
        case Kind::bump: {
            const double a = params_[0], t0 = params_[1], t1 = params_[2], w = params_[3];
            if (w == 0.0) return (t >= t0 && t <= t1) ? a : 0.0;
            return 0.5 * a * (std::tanh((t - t0) / w) - std::tanh((t - t1) / w));
        }
        case Kind::tabulated: {
            if (t <= times_.front()) return values_.front();
            if (t >= times_.back()) return values_.back();
            const auto it = std::upper_bound(times_.begin(), times_.end(), t);
            const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
            const std::size_t lo = hi - 1;
            const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
            return (1.0 - s) * values_[lo] + s * values_[hi];
        }
        case Kind::sum: {
            double total = 0.0;
            for (const auto& term : terms_) total += term(t);
            return total;
        }
        case Kind::scaled:
            return params_[0] * terms_.front()(t);
        }
        return 0.0;
    }

    /// Points where the rate is not smooth (table knots, sharp bump edges).
    std::vector<double> breakpoints() const {
        std::vector<double> out;
        collect_breakpoints(out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// True when evaluating on [0, t_max] reaches beyond a table's samples.
    bool extrapolates(double t_max) const {
        if (kind_ == Kind::tabulated) return times_.front() > 0.0 || times_.back() < t_max;
        return std::any_of(terms_.begin(), terms_.end(),
                           [t_max](const RateFunction& r) { return r.extrapolates(t_max); });
    }

private:
    explicit RateFunction(Kind kind) : kind_(kind) {}

    void check_params() const {
        for (double p : params_)
            if (!std::isfinite(p)) throw InvalidInput("rate parameter is not finite");
    }

    void collect_breakpoints(std::vector<double>& out) const {
        if (kind_ == Kind::tabulated) out.insert(out.end(), times_.begin(), times_.end());
        if (kind_ == Kind::bump && params_[3] == 0.0) {
            out.push_back(params_[1]);
            out.push_back(params_[2]);
        }
        for (const auto& term : terms_) term.collect_breakpoints(out);
    }

    Kind kind_ = Kind::constant;
    std::vector<double> params_{0.0};
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<RateFunction> terms_;
};

inline const char* to_string(RateFunction::Kind kind) {
    switch (kind) {
    case RateFunction::Kind::constant: return "constant";
    case RateFunction::Kind::sinusoid: return "sinusoid";
    case RateFunction::Kind::exp_poly: return "exp_poly";
    case RateFunction::Kind::tanh: return "tanh";
    case RateFunction::Kind::bump: return "bump";
    case RateFunction::Kind::tabulated: return "tabulated";
    case RateFunction::Kind::sum: return "sum";
    case RateFunction::Kind::scaled: return "scaled";
    }
    return "unknown";
}

namespace detail {

/// Adaptive Gauss-Kronrod over [a, b], split at the given breakpoints.
template <class F>
double integrate_piecewise(const F& f, double a, double b, const std::vector<double>& breaks) {
    using boost::math::quadrature::gauss_kronrod;
    if (b == a) return 0.0;
    if (b < a) return -integrate_piecewise(f, b, a, breaks);
    std::vector<double> nodes{a};
    for (double x : breaks)
        if (x > a && x < b) nodes.push_back(x);
    nodes.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double err = 0.0;
        total += gauss_kronrod<double, 31>::integrate(f, nodes[i], nodes[i + 1], 15, 1e-12, &err);
    }
    return total;
}

} // namespace detail

/// Gamma(b) - Gamma(a) = integral of gamma over [a, b].
inline double gamma_integral(const RateFunction& rate, double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("gamma_integral: non-finite bounds");
    const auto f = [&rate](double t) {
        const double v = rate(t);
        if (!std::isfinite(v))
            throw InvalidInput("gamma_integral: rate is not finite at t=" + std::to_string(t));
        return v;
    };
    return detail::integrate_piecewise(f, a, b, rate.breakpoints());
}

/// Gamma(t) = integral of gamma over [0, t].
inline double gamma_integral(const RateFunction& rate, double t) {
    if (t < 0.0) throw InvalidInput("gamma_integral: t must be >= 0");
    return gamma_integral(rate, 0.0, t);
}

/// Gamma at the nodes t_i = i * t_max / steps, accumulated interval by interval.
inline std::vector<double> gamma_on_grid(const RateFunction& rate, double t_max, int steps) {
    std::vector<double> out(static_cast<std::size_t>(steps) + 1, 0.0);
    const double dt = t_max / steps;
    for (int i = 0; i < steps; ++i)
        out[static_cast<std::size_t>(i) + 1] = out[static_cast<std::size_t>(i)] + gamma_integral(rate, i * dt, (i + 1) * dt);
    return out;
}

} // namespace nmdeg
