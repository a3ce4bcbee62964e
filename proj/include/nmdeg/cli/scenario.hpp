#pragma once

// JSON scenario files: parsing, validation and the resolved-defaults echo.

#include "json.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nmdeg/nmdeg.hpp"

namespace nmdeg::cli {

using json = nlohmann::ordered_json;

/// Malformed scenario file; the message names the offending field.
class SchemaError : public Error {
public:
    using Error::Error;
};

inline constexpr int schema_version = 1;

struct ModelInfo {
    const char* name;
    std::vector<const char*> rates;
    const char* description;
};

inline const std::vector<ModelInfo>& model_catalog() {
    static const std::vector<ModelInfo> models{
        {"dephasing", {"gamma"}, "pure dephasing qubit, coherences decay as exp(-Gamma(t))"},
        {"pauli", {"gamma1", "gamma2", "gamma3"}, "random-unitary qubit, one Pauli channel per rate"},
        {"pump_decay", {"gamma_plus", "gamma_minus"}, "two-level pumping (ground to excited) and decay"},
        {"custom", {}, "user generator: dim, hamiltonian, channels with their own rates"},
    };
    return models;
}

struct MeasuresConfig {
    std::vector<int> ks{1};
    MeasureOptions options;
};

struct BlpConfig {
    BlpSearchOptions options;
    std::optional<std::pair<double, double>> window;
};

struct EntropyConfig {
    int samples = 100;
};

struct Analyses {
    bool divisibility = true;
    bool nmd = true;
    std::optional<MeasuresConfig> measures;
    std::optional<BlpConfig> blp;
    std::optional<EntropyConfig> entropy;
    bool bloch = false;
    bool volume = false;
};

struct ExportConfig {
    bool trajectory = false;
    bool flows = true;
    bool bloch = true;
};

struct Scenario {
    std::string name;
    std::string model;
    std::vector<std::pair<std::string, RateFunction>> rates;  ///< in model order
    json rate_specs = json::object();
    GeneratorSpec generator;
    TimeGrid grid;
    Analyses analyses;
    DivisibilityOptions divisibility;
    Tolerances tolerances;
    std::array<double, 3> bloch_initial{0.5773502691896258, 0.5773502691896258, 0.5773502691896258};
    ExportConfig exports;
    std::uint64_t seed = 42;

    const RateFunction& rate(const std::string& key) const {
        for (const auto& [k, r] : rates)
            if (k == key) return r;
        throw SchemaError("missing field: rates." + key);
    }
};

namespace detail {

inline void check_fields(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw SchemaError("unknown field: " + (where.empty() ? "" : where + ".") + it.key());
    }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw SchemaError("missing field: " + (where.empty() ? "" : where + ".") + key);
    return obj.at(key);
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(where + ": must be finite");
    return x;
}

inline double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

inline int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw SchemaError(where + ": expected an integer");
    return v.get<int>();
}

inline int integer_or(const json& obj, const char* key, int fallback, const std::string& where) {
    return obj.contains(key) ? integer(obj.at(key), where + "." + key) : fallback;
}

inline std::uint64_t seed_value(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw SchemaError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline bool boolean(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw SchemaError(where + ": expected true or false");
    return v.get<bool>();
}

inline std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw SchemaError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline complex complex_entry(const json& v, const std::string& where) {
    if (v.is_number()) return number(v, where);
    if (v.is_array() && v.size() == 2)
        return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
    throw SchemaError(where + ": expected a number or [re, im]");
}

inline Matrix complex_matrix(const json& v, Index d, const std::string& where) {
    if (!v.is_array() || static_cast<Index>(v.size()) != d)
        throw SchemaError(where + ": expected " + std::to_string(d) + " rows");
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        const std::string rw = where + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<Index>(row.size()) != d)
            throw SchemaError(rw + ": expected " + std::to_string(d) + " entries");
        for (Index j = 0; j < d; ++j)
            m(i, j) = complex_entry(row[static_cast<std::size_t>(j)], rw + "[" + std::to_string(j) + "]");
    }
    return m;
}

} // namespace detail

/// Rate from a JSON value: a bare number is a constant, otherwise an object
/// with a "kind" field.
inline RateFunction parse_rate(const json& v, const std::string& where) {
    using namespace detail;
    if (v.is_number()) return RateFunction::constant(number(v, where));
    if (!v.is_object()) throw SchemaError(where + ": expected a number or a rate object");
    const json& kind_v = require(v, "kind", where);
    if (!kind_v.is_string()) throw SchemaError(where + ".kind: expected a string");
    const std::string kind = kind_v.get<std::string>();
    try {
        if (kind == "constant") {
            check_fields(v, where, {"kind", "value"});
            return RateFunction::constant(number(require(v, "value", where), where + ".value"));
        }
        if (kind == "sinusoid") {
            check_fields(v, where, {"kind", "a", "w", "phase", "offset"});
            return RateFunction::sinusoid(number(require(v, "a", where), where + ".a"),
                                          number(require(v, "w", where), where + ".w"),
                                          number_or(v, "phase", 0.0, where), number_or(v, "offset", 0.0, where));
        }
        if (kind == "exp_poly") {
            check_fields(v, where, {"kind", "coeffs", "decay"});
            return RateFunction::exp_poly(numbers(require(v, "coeffs", where), where + ".coeffs"),
                                          number_or(v, "decay", 0.0, where));
        }
        if (kind == "tanh") {
            check_fields(v, where, {"kind", "a", "w"});
            return RateFunction::tanh(number(require(v, "a", where), where + ".a"), number_or(v, "w", 1.0, where));
        }
        if (kind == "bump") {
            check_fields(v, where, {"kind", "a", "t0", "t1", "width"});
            return RateFunction::bump(number(require(v, "a", where), where + ".a"),
                                      number(require(v, "t0", where), where + ".t0"),
                                      number(require(v, "t1", where), where + ".t1"),
                                      number_or(v, "width", 0.0, where));
        }
        if (kind == "tabulated") {
            check_fields(v, where, {"kind", "t", "v"});
            return RateFunction::tabulated(numbers(require(v, "t", where), where + ".t"),
                                           numbers(require(v, "v", where), where + ".v"));
        }
        if (kind == "sum") {
            check_fields(v, where, {"kind", "terms"});
            const json& terms = require(v, "terms", where);
            if (!terms.is_array() || terms.empty()) throw SchemaError(where + ".terms: expected a non-empty array");
            std::vector<RateFunction> parts;
            for (std::size_t i = 0; i < terms.size(); ++i)
                parts.push_back(parse_rate(terms[i], where + ".terms[" + std::to_string(i) + "]"));
            return RateFunction::sum(std::move(parts));
        }
        if (kind == "scaled") {
            check_fields(v, where, {"kind", "factor", "rate"});
            return parse_rate(require(v, "rate", where), where + ".rate")
                .scaled(number(require(v, "factor", where), where + ".factor"));
        }
    } catch (const InvalidInput& e) {
        throw SchemaError(where + ": " + e.what());
    }
    throw SchemaError(where + ".kind: unknown rate kind '" + kind + "'");
}

namespace detail {

inline GeneratorSpec parse_custom(const json& g, Scenario& sc) {
    check_fields(g, "generator", {"dim", "hamiltonian", "channels"});
    const int dim = integer(require(g, "dim", "generator"), "generator.dim");
    if (dim < 1 || dim > 8) throw SchemaError("generator.dim: must be in [1, 8]");
    GeneratorSpec spec;
    spec.dim = dim;
    spec.hamiltonian = g.contains("hamiltonian") ? complex_matrix(g.at("hamiltonian"), dim, "generator.hamiltonian")
                                                 : Matrix::Zero(dim, dim);
    if ((spec.hamiltonian - spec.hamiltonian.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw SchemaError("generator.hamiltonian: not Hermitian");
    const json& channels = require(g, "channels", "generator");
    if (!channels.is_array()) throw SchemaError("generator.channels: expected an array");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const std::string where = "generator.channels[" + std::to_string(i) + "]";
        const json& ch = channels[i];
        if (!ch.is_object()) throw SchemaError(where + ": expected an object");
        check_fields(ch, where, {"label", "op", "rate"});
        std::string label = "channel" + std::to_string(i);
        if (ch.contains("label")) {
            if (!ch.at("label").is_string()) throw SchemaError(where + ".label: expected a string");
            label = ch.at("label").get<std::string>();
        }
        Matrix op = complex_matrix(require(ch, "op", where), dim, where + ".op");
        RateFunction rate = parse_rate(require(ch, "rate", where), where + ".rate");
        sc.rates.emplace_back(label, rate);
        sc.rate_specs[label] = ch.at("rate");
        spec.channels.push_back({std::move(op), std::move(rate), label});
    }
    return spec;
}

inline void parse_analyses(const json& a, Scenario& sc) {
    if (!a.is_object()) throw SchemaError("analyses: expected an object");
    check_fields(a, "analyses", {"divisibility", "nmd", "measures", "blp", "entropy", "bloch", "volume"});
    Analyses& an = sc.analyses;
    an = Analyses{};
    an.divisibility = false;
    an.nmd = false;
    if (a.contains("divisibility")) {
        const json& v = a.at("divisibility");
        if (v.is_boolean()) {
            an.divisibility = v.get<bool>();
        } else if (v.is_object()) {
            check_fields(v, "analyses.divisibility", {"budget", "iterations", "patience"});
            an.divisibility = true;
            sc.divisibility.budget = integer_or(v, "budget", sc.divisibility.budget, "analyses.divisibility");
            sc.divisibility.iterations = integer_or(v, "iterations", sc.divisibility.iterations, "analyses.divisibility");
            sc.divisibility.patience = integer_or(v, "patience", sc.divisibility.patience, "analyses.divisibility");
            if (sc.divisibility.budget < 1) throw SchemaError("analyses.divisibility.budget: must be >= 1");
            if (sc.divisibility.iterations < 1) throw SchemaError("analyses.divisibility.iterations: must be >= 1");
            if (sc.divisibility.patience < 0) throw SchemaError("analyses.divisibility.patience: must be >= 0");
        } else {
            throw SchemaError("analyses.divisibility: expected true/false or an object");
        }
    }
    if (a.contains("nmd")) an.nmd = boolean(a.at("nmd"), "analyses.nmd");
    if (a.contains("measures")) {
        const json& v = a.at("measures");
        if (!v.is_object()) throw SchemaError("analyses.measures: expected an object");
        check_fields(v, "analyses.measures", {"k", "restarts", "evaluations", "seed"});
        MeasuresConfig mc;
        if (v.contains("k")) {
            const json& k = v.at("k");
            mc.ks.clear();
            if (k.is_array()) {
                for (std::size_t i = 0; i < k.size(); ++i)
                    mc.ks.push_back(integer(k[i], "analyses.measures.k[" + std::to_string(i) + "]"));
            } else {
                mc.ks.push_back(integer(k, "analyses.measures.k"));
            }
            if (mc.ks.empty()) throw SchemaError("analyses.measures.k: expected at least one value");
        }
        for (int k : mc.ks)
            if (k < 1 || k > sc.generator.dim)
                throw SchemaError("analyses.measures.k: value " + std::to_string(k) + " outside [1, " +
                                  std::to_string(sc.generator.dim) + "]");
        mc.options.restarts = integer_or(v, "restarts", mc.options.restarts, "analyses.measures");
        mc.options.evaluations = integer_or(v, "evaluations", mc.options.evaluations, "analyses.measures");
        if (mc.options.restarts < 1) throw SchemaError("analyses.measures.restarts: must be >= 1");
        if (mc.options.evaluations < 1) throw SchemaError("analyses.measures.evaluations: must be >= 1");
        mc.options.seed = v.contains("seed") ? seed_value(v.at("seed"), "analyses.measures.seed") : sc.seed;
        an.measures = mc;
    }
    if (a.contains("blp")) {
        const json& v = a.at("blp");
        if (v.is_boolean()) {
            if (v.get<bool>()) an.blp = BlpConfig{};
        } else if (v.is_object()) {
            check_fields(v, "analyses.blp", {"restarts", "evaluations", "window"});
            BlpConfig bc;
            bc.options.restarts = integer_or(v, "restarts", bc.options.restarts, "analyses.blp");
            bc.options.evaluations = integer_or(v, "evaluations", bc.options.evaluations, "analyses.blp");
            if (bc.options.restarts < 1) throw SchemaError("analyses.blp.restarts: must be >= 1");
            if (bc.options.evaluations < 1) throw SchemaError("analyses.blp.evaluations: must be >= 1");
            if (v.contains("window")) {
                const auto w = numbers(v.at("window"), "analyses.blp.window");
                if (w.size() != 2 || !(w[1] > w[0])) throw SchemaError("analyses.blp.window: expected [t0, t1] with t1 > t0");
                bc.window = std::pair{w[0], w[1]};
            }
            an.blp = bc;
        } else {
            throw SchemaError("analyses.blp: expected true/false or an object");
        }
    }
    if (a.contains("entropy")) {
        const json& v = a.at("entropy");
        if (v.is_boolean()) {
            if (v.get<bool>()) an.entropy = EntropyConfig{};
        } else if (v.is_object()) {
            check_fields(v, "analyses.entropy", {"samples"});
            EntropyConfig ec;
            ec.samples = integer_or(v, "samples", ec.samples, "analyses.entropy");
            if (ec.samples < 1) throw SchemaError("analyses.entropy.samples: must be >= 1");
            an.entropy = ec;
        } else {
            throw SchemaError("analyses.entropy: expected true/false or an object");
        }
    }
    if (a.contains("bloch")) {
        const json& v = a.at("bloch");
        if (v.is_boolean()) {
            an.bloch = v.get<bool>();
        } else if (v.is_object()) {
            check_fields(v, "analyses.bloch", {"initial"});
            an.bloch = true;
            if (v.contains("initial")) {
                const auto x = numbers(v.at("initial"), "analyses.bloch.initial");
                if (x.size() != 3) throw SchemaError("analyses.bloch.initial: expected three components");
                if (std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) > 1.0 + 1e-12)
                    throw SchemaError("analyses.bloch.initial: outside the Bloch ball");
                sc.bloch_initial = {x[0], x[1], x[2]};
            }
        } else {
            throw SchemaError("analyses.bloch: expected true/false or an object");
        }
    }
    if (a.contains("volume")) an.volume = boolean(a.at("volume"), "analyses.volume");
    if ((an.bloch || an.volume) && sc.model == "custom")
        throw SchemaError("analyses.bloch/volume: require a named qubit model");
}

} // namespace detail

/// Builds a scenario from parsed JSON. `seed_override` (NMDEG_SEED) replaces
/// every seed in the file.
inline Scenario parse_scenario(const json& doc, std::optional<std::uint64_t> seed_override = std::nullopt) {
    using namespace detail;
    const json root = doc.is_null() ? json::object() : doc;
    if (!root.is_object()) throw SchemaError("scenario: expected a JSON object at the top level");
    const json& model_v = require(root, "model", "");
    check_fields(root, "", {"schema", "name", "model", "rates", "generator", "grid", "analyses", "tolerances",
                            "export", "seed"});
    if (root.contains("schema") && integer(root.at("schema"), "schema") != schema_version)
        throw SchemaError("schema: unsupported version (expected 1)");

    Scenario sc;
    if (!model_v.is_string()) throw SchemaError("model: expected a string");
    sc.model = model_v.get<std::string>();
    sc.name = sc.model;
    if (root.contains("name")) {
        if (!root.at("name").is_string()) throw SchemaError("name: expected a string");
        sc.name = root.at("name").get<std::string>();
    }
    if (root.contains("seed")) sc.seed = seed_value(root.at("seed"), "seed");
    if (seed_override) sc.seed = *seed_override;

    const ModelInfo* info = nullptr;
    for (const auto& m : model_catalog())
        if (sc.model == m.name) info = &m;
    if (info == nullptr) throw SchemaError("model: unknown model '" + sc.model + "'");

    if (sc.model == "custom") {
        if (root.contains("rates")) throw SchemaError("unknown field: rates (custom models put rates on channels)");
        sc.generator = parse_custom(require(root, "generator", ""), sc);
    } else {
        if (root.contains("generator")) throw SchemaError("unknown field: generator (only for model 'custom')");
        const json& rates = require(root, "rates", "");
        if (!rates.is_object()) throw SchemaError("rates: expected an object");
        for (auto it = rates.begin(); it != rates.end(); ++it) {
            bool known = false;
            for (const char* r : info->rates) known = known || it.key() == r;
            if (!known) throw SchemaError("unknown field: rates." + it.key());
        }
        for (const char* r : info->rates) {
            sc.rates.emplace_back(r, parse_rate(require(rates, r, "rates"), std::string("rates.") + r));
            sc.rate_specs[r] = rates.at(r);
        }
        if (sc.model == "dephasing") sc.generator = dephasing_spec(sc.rate("gamma"));
        else if (sc.model == "pauli")
            sc.generator = pauli_spec(sc.rate("gamma1"), sc.rate("gamma2"), sc.rate("gamma3"));
        else sc.generator = pump_decay_spec(sc.rate("gamma_plus"), sc.rate("gamma_minus"));
    }

    if (root.contains("grid")) {
        const json& g = root.at("grid");
        if (!g.is_object()) throw SchemaError("grid: expected an object");
        check_fields(g, "grid", {"t_max", "steps"});
        sc.grid.t_max = number_or(g, "t_max", sc.grid.t_max, "grid");
        sc.grid.steps = integer_or(g, "steps", sc.grid.steps, "grid");
    }
    if (!(sc.grid.t_max > 0.0)) throw SchemaError("grid.t_max: must be positive");
    if (sc.grid.steps < 2) throw SchemaError("grid.steps: must be >= 2");
    if (sc.grid.steps > 10000000) throw SchemaError("grid.steps: too large");

    sc.divisibility.seed = sc.seed;
    if (root.contains("tolerances")) {
        const json& t = root.at("tolerances");
        if (!t.is_object()) throw SchemaError("tolerances: expected an object");
        check_fields(t, "tolerances", {"herm", "trace", "psd", "cond_max"});
        sc.tolerances.herm = number_or(t, "herm", sc.tolerances.herm, "tolerances");
        sc.tolerances.trace = number_or(t, "trace", sc.tolerances.trace, "tolerances");
        sc.tolerances.psd = number_or(t, "psd", sc.tolerances.psd, "tolerances");
        sc.divisibility.cond_max = number_or(t, "cond_max", sc.divisibility.cond_max, "tolerances");
        for (double x : {sc.tolerances.herm, sc.tolerances.trace, sc.tolerances.psd, sc.divisibility.cond_max})
            if (!(x > 0.0)) throw SchemaError("tolerances: values must be positive");
    }
    sc.divisibility.tol = sc.tolerances.psd;

    if (root.contains("analyses")) parse_analyses(root.at("analyses"), sc);
    if (sc.analyses.measures && !root.at("analyses").at("measures").contains("seed"))
        sc.analyses.measures->options.seed = sc.seed;
    if (sc.analyses.blp) sc.analyses.blp->options.seed = sc.seed;

    if (root.contains("export")) {
        const json& e = root.at("export");
        if (!e.is_object()) throw SchemaError("export: expected an object");
        check_fields(e, "export", {"trajectory", "flows", "bloch"});
        if (e.contains("trajectory")) sc.exports.trajectory = boolean(e.at("trajectory"), "export.trajectory");
        if (e.contains("flows")) sc.exports.flows = boolean(e.at("flows"), "export.flows");
        if (e.contains("bloch")) sc.exports.bloch = boolean(e.at("bloch"), "export.bloch");
    }
    if (seed_override && sc.analyses.measures) sc.analyses.measures->options.seed = *seed_override;
    return sc;
}

/// Byte offset -> (line, column), both 1-based.
inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    bool blank = true;
    for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (blank) return json::object();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw SchemaError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                          e.what() + ")");
    }
}

inline std::optional<std::uint64_t> seed_from_env() {
    const char* s = std::getenv("NMDEG_SEED");
    if (s == nullptr || *s == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == nullptr || *end != '\0') throw SchemaError("NMDEG_SEED: expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

inline Scenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(parse_json_text(ss.str(), path), seed_override);
}

/// The scenario with every default filled in.
inline json resolved(const Scenario& sc) {
    json out;
    out["schema"] = schema_version;
    out["name"] = sc.name;
    out["model"] = sc.model;
    out["seed"] = sc.seed;
    if (sc.model != "custom") out["rates"] = sc.rate_specs;
    else {
        json g;
        g["dim"] = sc.generator.dim;
        json labels = json::array();
        for (const auto& ch : sc.generator.channels) labels.push_back(ch.label);
        g["channels"] = labels;
        g["rates"] = sc.rate_specs;
        out["generator"] = g;
    }
    out["grid"] = {{"t_max", sc.grid.t_max}, {"steps", sc.grid.steps}, {"dt", sc.grid.dt()}};
    json a;
    a["divisibility"] = sc.analyses.divisibility
                            ? json{{"budget", sc.divisibility.budget},
                                   {"iterations", sc.divisibility.iterations},
                                   {"patience", sc.divisibility.patience}}
                            : json(false);
    a["nmd"] = sc.analyses.nmd;
    if (sc.analyses.measures)
        a["measures"] = {{"k", sc.analyses.measures->ks},
                         {"restarts", sc.analyses.measures->options.restarts},
                         {"evaluations", sc.analyses.measures->options.evaluations},
                         {"seed", sc.analyses.measures->options.seed}};
    else a["measures"] = false;
    if (sc.analyses.blp) {
        json b{{"restarts", sc.analyses.blp->options.restarts}, {"evaluations", sc.analyses.blp->options.evaluations}};
        if (sc.analyses.blp->window) b["window"] = {sc.analyses.blp->window->first, sc.analyses.blp->window->second};
        a["blp"] = b;
    } else {
        a["blp"] = false;
    }
    a["entropy"] = sc.analyses.entropy ? json{{"samples", sc.analyses.entropy->samples}} : json(false);
    a["bloch"] = sc.analyses.bloch;
    a["volume"] = sc.analyses.volume;
    out["analyses"] = a;
    out["tolerances"] = {{"herm", sc.tolerances.herm},
                         {"trace", sc.tolerances.trace},
                         {"psd", sc.tolerances.psd},
                         {"cond_max", sc.divisibility.cond_max}};
    out["export"] = {{"trajectory", sc.exports.trajectory}, {"flows", sc.exports.flows}, {"bloch", sc.exports.bloch}};
    return out;
}

} // namespace nmdeg::cli
