#pragma once

// Runs a scenario: integration, admission, the requested analyses, and the
// report / CSV outputs.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "nmdeg/cli/scenario.hpp"

namespace nmdeg::cli {

inline constexpr const char* tool_version = "nmdeg 0.1.0";

enum ExitCode : int { exit_ok = 0, exit_io = 1, exit_schema = 2, exit_illegitimate = 3, exit_numerical = 4 };

/// Backflow threshold for the state-pair search.
inline constexpr double blp_tol = 1e-6;
/// Threshold for entropy-flow violations.
inline constexpr double entropy_tol = 1e-5;

struct RunOptions {
    int jobs = 1;
    bool reproducible = false;
    bool export_trajectory = false;
};

struct RunOutput {
    int exit_code = exit_ok;
    std::string diagnostic;
    json report;
    std::vector<std::pair<std::string, std::string>> csv;  ///< file name, contents
};

/// %.17g, the CSV and report number format.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Finite numbers as numbers; infinities and NaN as strings.
inline json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline bool all_numbers_finite(const json& j) {
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_structured())
        for (const auto& v : j)
            if (!all_numbers_finite(v)) return false;
    return true;
}

inline json matrix_json(const Matrix& m) {
    json re = json::array(), im = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json r = json::array(), c = json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            r.push_back(num(m(i, j).real()));
            c.push_back(num(m(i, j).imag()));
        }
        re.push_back(r);
        im.push_back(c);
    }
    return {{"re", re}, {"im", im}};
}

namespace detail {

class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) { row_strings(header); }
    explicit Csv(const std::vector<std::string>& header) { row_strings(header); }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ += ',';
            out_ += fmt17(values[i]);
        }
        out_ += '\n';
    }

    std::string str() && { return std::move(out_); }

private:
    template <class C>
    void row_strings(const C& cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ += ',';
            out_ += c;
            first = false;
        }
        out_ += '\n';
    }

    std::string out_;
};

/// Evenly spaced node indices including both ends, at most `count` + 1.
inline std::vector<int> sample_nodes(int nodes, int count) {
    std::vector<int> out;
    const int steps = nodes - 1;
    const int n = std::min(count, steps);
    for (int s = 0; s <= n; ++s) out.push_back(static_cast<int>((static_cast<long long>(s) * steps) / n));
    return out;
}

/// Runs of consecutive violated steps merged into [t_start, t_end] intervals.
inline json violation_intervals(const std::vector<StepVerdict>& scan) {
    json out = json::array();
    std::size_t i = 0;
    while (i < scan.size()) {
        if (!scan[i].violated()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < scan.size() && scan[j + 1].violated()) ++j;
        out.push_back({num(scan[i].t_start), num(scan[j].t_end)});
        i = j + 1;
    }
    return out;
}

/// 3x3 linear part of the Bloch-space affine map of a qubit superoperator.
inline Eigen::Matrix3d bloch_linear_part(const Superoperator& map) {
    const Eigen::Matrix4d r = pauli_transfer_matrix(map);
    return r.bottomRightCorner<3, 3>();
}

struct StepCriteria {
    bool cp = true;
    bool p = true;
};

/// Divisibility of each adjacent step from the rate integrals (the qubit
/// models have commuting generators, except pump-decay where the midpoint
/// rates are used).
inline std::vector<StepCriteria> step_criteria(const Scenario& sc, const TimeGrid& grid) {
    std::vector<StepCriteria> out(static_cast<std::size_t>(grid.steps));
    constexpr double slack = 1e-12;
    if (sc.model == "dephasing") {
        const auto g = gamma_on_grid(sc.rate("gamma"), grid.t_max, grid.steps);
        for (int i = 0; i < grid.steps; ++i) {
            const double inc = g[static_cast<std::size_t>(i + 1)] - g[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] = {inc >= -slack, inc >= -slack};
        }
    } else if (sc.model == "pauli") {
        const auto g1 = gamma_on_grid(sc.rate("gamma1"), grid.t_max, grid.steps);
        const auto g2 = gamma_on_grid(sc.rate("gamma2"), grid.t_max, grid.steps);
        const auto g3 = gamma_on_grid(sc.rate("gamma3"), grid.t_max, grid.steps);
        for (int i = 0; i < grid.steps; ++i) {
            const std::size_t u = static_cast<std::size_t>(i);
            const double a = g1[u + 1] - g1[u], b = g2[u + 1] - g2[u], c = g3[u + 1] - g3[u];
            const auto l = pauli_lambdas(a, b, c);
            const auto p = pauli_probabilities(l[0], l[1], l[2]);
            out[u].cp = *std::min_element(p.begin(), p.end()) >= -slack;
            out[u].p = a + b >= -slack && a + c >= -slack && b + c >= -slack;
        }
    } else if (sc.model == "pump_decay") {
        for (int i = 0; i < grid.steps; ++i) {
            const double t = 0.5 * (grid.time(i) + grid.time(i + 1));
            const double gp = sc.rate("gamma_plus")(t), gm = sc.rate("gamma_minus")(t);
            out[static_cast<std::size_t>(i)] = {gp >= 0.0 && gm >= 0.0, gp + gm >= 0.0};
        }
    }
    return out;
}

inline json criteria_section(const Scenario& sc, const MapTrajectory& traj, const NMDReport* rep,
                             std::vector<std::string>& warnings) {
    json out;
    out["model"] = sc.model;
    const auto steps = step_criteria(sc, traj.grid);
    bool cp = true, p = true;
    for (const auto& s : steps) {
        cp = cp && s.cp;
        p = p && s.p;
    }
    json table = json::array();
    for (int i : sample_nodes(traj.nodes(), 100)) {
        const double t = traj.time(i);
        json row;
        row["t"] = num(t);
        if (sc.model == "dephasing") {
            const double g = sc.rate("gamma")(t);
            row["gamma"] = num(g);
            row["Gamma"] = num(gamma_integral(sc.rate("gamma"), t));
            row["cp"] = g >= 0.0;
        } else if (sc.model == "pauli") {
            const double g1 = sc.rate("gamma1")(t), g2 = sc.rate("gamma2")(t), g3 = sc.rate("gamma3")(t);
            const auto c = pauli_criteria_from_rates(g1, g2, g3);
            row["gamma"] = {num(g1), num(g2), num(g3)};
            row["cp"] = c.cp;
            row["p"] = c.p;
            row["volume"] = c.volume;
        } else {
            const auto c = pump_decay_criteria(sc.rate("gamma_plus"), sc.rate("gamma_minus"), t);
            row["gamma"] = {num(sc.rate("gamma_plus")(t)), num(sc.rate("gamma_minus")(t))};
            row["cp"] = c.cp_div;
            row["p"] = c.p_div;
            row["legit_integrals"] = c.legit_integrals;
        }
        table.push_back(row);
    }
    out["samples"] = table;
    const int predicted = cp ? 0 : (p ? 1 : 2);
    json summary;
    summary["cp_divisible"] = cp;
    summary["p_divisible"] = p;
    summary["predicted_degree"] = predicted;
    if (sc.model == "pump_decay") {
        bool legit = true;
        for (const auto& row : table) legit = legit && row["legit_integrals"].get<bool>();
        summary["legit_integrals"] = legit;
    }
    if (rep != nullptr) {
        summary["agrees_with_scan"] = predicted == rep->degree;
        if (predicted != rep->degree)
            warnings.push_back("closed-form criteria predict degree " + std::to_string(predicted) +
                               " but the divisibility scan gives " + std::to_string(rep->degree));
    }
    out["summary"] = summary;
    return out;
}

inline json divisibility_section(const NMDReport& rep) {
    json per_k = json::array();
    for (int k = 1; k <= rep.n; ++k) {
        const auto& scan = rep.scans[static_cast<std::size_t>(k - 1)];
        int violated = 0, singular = 0, restarts = 0;
        double min_floor = std::numeric_limits<double>::infinity();
        std::optional<double> first;
        for (const auto& sv : scan) {
            if (sv.singular) {
                ++singular;
                continue;
            }
            restarts += sv.verdict.restarts_used;
            min_floor = std::min(min_floor, sv.verdict.floor);
            if (sv.violated()) {
                ++violated;
                if (!first) first = sv.t_start;
            }
        }
        json e;
        e["k"] = k;
        e["divisible"] = static_cast<bool>(rep.per_k_divisible[static_cast<std::size_t>(k - 1)]);
        e["method"] = k == rep.n ? "choi_spectrum" : "schmidt_rank_search";
        e["steps_checked"] = static_cast<int>(scan.size()) - singular;
        e["violated_steps"] = violated;
        e["singular_steps"] = singular;
        e["min_floor"] = num(min_floor);
        e["restarts_used"] = restarts;
        e["first_violation"] = first ? num(*first) : json(nullptr);
        e["violation_intervals"] = violation_intervals(scan);
        per_k.push_back(e);
    }
    return {{"per_k", per_k}};
}

inline json nmd_section(const NMDReport& rep) {
    json out;
    out["n"] = rep.n;
    out["degree"] = rep.degree;
    out["classification"] = to_string(rep.classification);
    json div = json::array();
    for (bool b : rep.per_k_divisible) div.push_back(b);
    out["k_divisible"] = div;
    json first = json::array();
    for (int k = 1; k <= rep.n; ++k) {
        json t = nullptr;
        for (const auto& [time, kk] : rep.violation_times)
            if (kk == k) {
                t = num(time);
                break;
            }
        first.push_back({{"k", k}, {"t", t}});
    }
    out["first_violation_times"] = first;
    out["violation_count"] = static_cast<int>(rep.violation_times.size());
    return out;
}

inline json state_json(const Matrix& rho) {
    if (rho.rows() == 2) {
        const BlochVector x = to_bloch(rho);
        return {{"bloch", {num(x.x1), num(x.x2), num(x.x3)}}};
    }
    return {{"matrix", matrix_json(rho)}};
}

inline int node_at(const TimeGrid& grid, double t) {
    const double s = std::clamp(t / grid.dt(), 0.0, static_cast<double>(grid.steps));
    return static_cast<int>(std::lround(s));
}

} // namespace detail

inline RunOutput run(const Scenario& sc, const RunOptions& ropt = {}) {
    RunOutput out;
    json& rep = out.report;
    std::vector<std::string> warnings;
    rep["schema"] = schema_version;
    rep["tool"] = tool_version;
    rep["name"] = sc.name;
    rep["model"] = sc.model;
    rep["seed"] = sc.seed;
    if (!ropt.reproducible) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        rep["generated_at"] = buf;
    }
    rep["status"] = "ok";
    rep["grid"] = {{"t_max", num(sc.grid.t_max)}, {"steps", sc.grid.steps}, {"dt", num(sc.grid.dt())}};
    rep["rates"] = sc.rate_specs;
    if (sc.generator.extrapolates(sc.grid.t_max))
        warnings.push_back("a tabulated rate is extrapolated (held constant) beyond its samples");

    const MapTrajectory traj = integrate(sc.generator, sc.grid);
    const Index d = traj.dim();

    const Admission adm = admit(traj, sc.tolerances.psd);
    double max_cond = 0.0;
    for (double c : traj.condition_numbers) max_cond = std::max(max_cond, c);
    rep["admission"] = {{"legitimate", adm.legitimate},
                        {"worst_choi_floor", num(adm.worst_floor)},
                        {"worst_time", num(adm.worst_time)},
                        {"max_condition_number", num(max_cond)}};
    if (!adm.legitimate) {
        rep["status"] = "illegitimate";
        out.exit_code = exit_illegitimate;
        out.diagnostic = "admission failed: Lambda_t is not completely positive at t=" + fmt17(adm.worst_time) +
                         " (Choi floor " + fmt17(adm.worst_floor) + ")";
        rep["diagnostic"] = out.diagnostic;
        rep["warnings"] = warnings;
        return out;
    }

    std::optional<NMDReport> nmd_rep;
    if (sc.analyses.divisibility || sc.analyses.nmd) {
        DivisibilityOptions dopt = sc.divisibility;
        dopt.jobs = ropt.jobs;
        nmd_rep = nmd(traj, dopt);
        if (nmd_rep->singular_steps > 0)
            warnings.push_back(std::to_string(nmd_rep->singular_steps) +
                               " steps skipped: dynamical map too ill-conditioned to invert");
        if (sc.analyses.divisibility) rep["divisibility"] = detail::divisibility_section(*nmd_rep);
        if (sc.analyses.nmd) rep["nmd"] = detail::nmd_section(*nmd_rep);
    }

    if (sc.model != "custom")
        rep["criteria"] = detail::criteria_section(sc, traj, nmd_rep ? &*nmd_rep : nullptr, warnings);

    if (sc.analyses.measures) {
        MeasureOptions mopt = sc.analyses.measures->options;
        mopt.jobs = ropt.jobs;
        const auto ests = measures(traj, sc.analyses.measures->ks, mopt);
        json arr = json::array();
        for (const auto& e : ests) {
            json m;
            m["k"] = e.k;
            m["value"] = num(e.value);
            m["n_plus"] = num(e.best.n_plus);
            m["n_minus_abs"] = num(e.best.n_minus_abs);
            m["restarts_used"] = e.restarts_used;
            m["kinks"] = e.best.kinks;
            m["truncated"] = e.truncated;
            m["lower_bound"] = true;
            m["witness"] = matrix_json(e.best.x.matrix());
            arr.push_back(m);
            if (sc.exports.flows) {
                detail::Csv csv({"t", "lambda"});
                for (const auto& s : e.best.flow) csv.row({s.t, s.value});
                out.csv.emplace_back("flow_k" + std::to_string(e.k) + ".csv", std::move(csv).str());
            }
        }
        json section;
        section["estimates"] = arr;
        if (sc.model == "dephasing") {
            const double big_gamma = gamma_integral(sc.rate("gamma"), sc.grid.t_max);
            section["gamma_integral_at_tmax"] = num(big_gamma);
            section["full_recoherence"] = std::abs(big_gamma) <= 1e-6;
            section["tail_gap"] = num(-2.0 * std::expm1(-big_gamma));
        }
        rep["measures"] = section;
    }

    if (sc.analyses.blp) {
        const auto& cfg = *sc.analyses.blp;
        int i0 = 0, i1 = traj.nodes() - 1;
        if (cfg.window) {
            i0 = detail::node_at(sc.grid, cfg.window->first);
            i1 = detail::node_at(sc.grid, cfg.window->second);
        }
        BlpSearchOptions bopt = cfg.options;
        bopt.jobs = ropt.jobs;
        const auto res = blp_search(traj, i0, i1, bopt);
        json b;
        b["window"] = {num(traj.time(i0)), num(traj.time(i1))};
        b["max_sigma"] = num(res.sigma);
        b["t"] = num(res.t);
        b["backflow"] = res.sigma > blp_tol;
        b["rho1"] = detail::state_json(res.rho1);
        b["rho2"] = detail::state_json(res.rho2);
        if (nmd_rep) {
            const bool essential = nmd_rep->classification == Classification::essentially_non_markovian;
            b["implication"] = {{"statement", "information backflow implies essentially non-Markovian"},
                                {"holds", !(res.sigma > blp_tol) || essential}};
            if (res.sigma > blp_tol && !essential)
                warnings.push_back("backflow found although the map is not essentially non-Markovian");
        }
        rep["blp"] = b;
    }

    if (sc.analyses.entropy) {
        const int samples = sc.analyses.entropy->samples;
        json e;
        if (is_unital(traj)) {
            const auto vn = entropy_search(traj, 0, traj.nodes() - 1, samples, sc.seed);
            e["von_neumann"] = {{"applicable", true},
                                {"min_flow", num(vn.min_flow)},
                                {"t_min", num(vn.t_min)},
                                {"samples", vn.samples},
                                {"decrease_detected", vn.min_flow < -entropy_tol}};
        } else {
            e["von_neumann"] = {{"applicable", false}, {"reason", "map is not unital"}};
        }
        const auto rel = relative_entropy_search(traj, 0, traj.nodes() - 1, samples, sc.seed);
        e["relative"] = {{"max_flow", rel.samples > 0 && std::isfinite(rel.max_flow) ? num(rel.max_flow) : json(nullptr)},
                         {"t", num(rel.t)},
                         {"samples", rel.samples},
                         {"undefined_evaluations", rel.undefined},
                         {"increase_detected", rel.max_flow > entropy_tol}};
        rep["entropy"] = e;
    }

    if ((sc.analyses.bloch || sc.analyses.volume) && d == 2) {
        const BlochVector x0{sc.bloch_initial[0], sc.bloch_initial[1], sc.bloch_initial[2]};
        const Matrix rho0 = from_bloch(x0).matrix();
        detail::Csv csv({"t", "x1", "x2", "x3", "T1", "T2", "T3", "V"});
        bool times_nonnegative = true, triangle = true, decreasing = true, rate_condition = true;
        double previous_volume = 1.0;
        BlochVector x_final;
        for (int i = 0; i < traj.nodes(); ++i) {
            const double t = traj.time(i);
            const auto& map = traj.maps[static_cast<std::size_t>(i)];
            const BlochVector x = to_bloch(map.apply(rho0));
            x_final = x;
            std::array<double, 3> big_t{};
            if (sc.model == "pump_decay") {
                const auto pd = pump_decay_bloch(sc.rate("gamma_plus"), sc.rate("gamma_minus"), t);
                big_t = {pd.t_perp, pd.t_perp, pd.t_par};
                times_nonnegative = times_nonnegative && pd.p_div;
            } else {
                const double g1 = sc.model == "pauli" ? sc.rate("gamma1")(t) : 0.0;
                const double g2 = sc.model == "pauli" ? sc.rate("gamma2")(t) : 0.0;
                const double g3 = sc.model == "pauli" ? sc.rate("gamma3")(t) : sc.rate("gamma")(t);
                const auto rt = pauli_relaxation_times(g1, g2, g3);
                big_t = rt.t;
                times_nonnegative = times_nonnegative && rt.nonnegative();
                triangle = triangle && cp_triangle(rt);
                rate_condition = rate_condition && g1 + g2 + g3 >= 0.0;
            }
            const double volume = std::abs(detail::bloch_linear_part(map).determinant());
            if (volume > previous_volume * (1.0 + 1e-12) + 1e-15) decreasing = false;
            previous_volume = volume;
            csv.row({t, x.x1, x.x2, x.x3, big_t[0], big_t[1], big_t[2], volume});
        }
        if (sc.analyses.bloch) {
            const auto ball = ball_containment(traj, pauli_eigenstates(), sc.tolerances.psd);
            json b;
            b["initial"] = {num(x0.x1), num(x0.x2), num(x0.x3)};
            b["final"] = {num(x_final.x1), num(x_final.x2), num(x_final.x3)};
            b["ball_contained"] = ball.contained;
            b["max_norm"] = num(ball.max_norm);
            b["relaxation_times_nonnegative"] = times_nonnegative;
            if (sc.model != "pump_decay") b["cp_triangle"] = triangle;
            if (sc.model == "pump_decay") {
                const auto pd = pump_decay_bloch(sc.rate("gamma_plus"), sc.rate("gamma_minus"), sc.grid.t_max);
                b["at_tmax"] = {{"T_perp", num(pd.t_perp)}, {"T_par", num(pd.t_par)}, {"Delta", num(pd.delta)}};
                b["inversion_final"] = num(population_inversion(x_final));
            }
            rep["bloch"] = b;
            if (sc.exports.bloch) out.csv.emplace_back("bloch.csv", std::move(csv).str());
        }
        if (sc.analyses.volume) {
            json v;
            v["ratio_at_tmax"] = num(previous_volume);
            v["decreasing"] = decreasing;
            if (sc.model != "pump_decay") {
                v["rate_condition"] = rate_condition;
                const RateFunction zero = RateFunction::constant(0.0);
                const bool pauli = sc.model == "pauli";
                v["closed_form_at_tmax"] = num(volume_ratio(pauli ? sc.rate("gamma1") : zero,
                                                            pauli ? sc.rate("gamma2") : zero,
                                                            pauli ? sc.rate("gamma3") : sc.rate("gamma"), sc.grid.t_max));
            }
            rep["volume"] = v;
        }
    }

    if (sc.exports.trajectory || ropt.export_trajectory) {
        std::vector<std::string> header{"t"};
        if (d == 2) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) header.push_back("R" + std::to_string(a) + std::to_string(b));
        } else {
            for (Index c = 0; c < d * d; ++c)
                for (Index r = 0; r < d * d; ++r) {
                    header.push_back("re_" + std::to_string(r) + "_" + std::to_string(c));
                    header.push_back("im_" + std::to_string(r) + "_" + std::to_string(c));
                }
        }
        detail::Csv csv(header);
        for (int i = 0; i < traj.nodes(); ++i) {
            std::vector<double> row{traj.time(i)};
            const auto& map = traj.maps[static_cast<std::size_t>(i)];
            if (d == 2) {
                const Eigen::Matrix4d r = pauli_transfer_matrix(map);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) row.push_back(r(a, b));
            } else {
                const Matrix& m = map.matrix();
                for (Index c = 0; c < m.cols(); ++c)
                    for (Index r = 0; r < m.rows(); ++r) {
                        row.push_back(m(r, c).real());
                        row.push_back(m(r, c).imag());
                    }
            }
            csv.row(row);
        }
        out.csv.emplace_back("trajectory.csv", std::move(csv).str());
    }

    rep["warnings"] = warnings;
    if (!all_numbers_finite(rep)) throw NumericalFailure("report contains a non-finite number");
    return out;
}

/// Writes `contents` to `path` via a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << contents;
        if (!f.flush()) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_outputs(const RunOutput& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, contents] : result.csv) write_atomic(dir / name, contents);
    write_atomic(dir / "report.json", result.report.dump(2) + "\n");
}

} // namespace nmdeg::cli
