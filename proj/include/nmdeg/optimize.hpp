#pragma once

// Derivative-free local search and a deterministic multistart driver.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace nmdeg {

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Results must be
/// written to per-index slots; the first exception is rethrown.
template <class Body>
void parallel_for(int n, int jobs, Body&& body) {
    if (n <= 0) return;
    jobs = std::clamp(jobs, 1, n);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Independent, reproducible stream for restart `index` under `seed`.
inline std::mt19937_64 restart_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x6e6d6465u};
    return std::mt19937_64(seq);
}

/// Box-Muller normal deviates: unlike std::normal_distribution the sequence is
/// fixed across standard library implementations.
class NormalStream {
public:
    explicit NormalStream(std::mt19937_64& rng) : rng_(rng) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64& rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct PatternSearchOptions {
    int max_evaluations = 400;
    double initial_step = 0.5;
    double min_step = 1e-7;
};

struct SearchResult {
    std::vector<double> x;
    double value = -std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

/// Compass search maximizing f: polls +/- step along each coordinate, moves
/// on the first improvement, halves the step after an unsuccessful sweep.
inline SearchResult pattern_search_maximize(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x0, const PatternSearchOptions& opt = {}) {
    SearchResult res;
    res.x = std::move(x0);
    res.value = f(res.x);
    res.evaluations = 1;
    double step = opt.initial_step;
    const std::size_t n = res.x.size();
    while (res.evaluations < opt.max_evaluations && step >= opt.min_step) {
        bool improved = false;
        for (std::size_t j = 0; j < n && res.evaluations < opt.max_evaluations; ++j) {
            for (double sign : {1.0, -1.0}) {
                if (res.evaluations >= opt.max_evaluations) break;
                std::vector<double> trial = res.x;
                trial[j] += sign * step;
                const double v = f(trial);
                ++res.evaluations;
                if (v > res.value) {
                    res.value = v;
                    res.x = std::move(trial);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return res;
}

} // namespace nmdeg
