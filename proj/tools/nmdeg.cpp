// nmdeg: run, validate and list non-Markovianity scenarios.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nmdeg/cli/runner.hpp"

namespace {

using namespace nmdeg;
using namespace nmdeg::cli;

int report_error(const std::exception& e, int code) {
    std::cerr << "nmdeg: " << e.what() << '\n';
    return code;
}

/// Maps library errors onto the documented exit codes.
template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const SchemaError& e) {
        return report_error(e, exit_schema);
    } catch (const SingularMap& e) {
        return report_error(e, exit_numerical);
    } catch (const NumericalFailure& e) {
        return report_error(e, exit_numerical);
    } catch (const InvalidInput& e) {
        return report_error(e, exit_schema);
    } catch (const DimensionMismatch& e) {
        return report_error(e, exit_schema);
    } catch (const NotApplicable& e) {
        return report_error(e, exit_schema);
    } catch (const Error& e) {
        return report_error(e, exit_numerical);
    } catch (const std::exception& e) {
        return report_error(e, exit_io);
    }
}

int cmd_run(const std::string& file, const std::string& out_dir, const RunOptions& opt) {
    return guarded([&] {
        const Scenario sc = load_scenario(file, seed_from_env());
        RunOutput result = run(sc, opt);
        write_outputs(result, out_dir);
        if (result.exit_code != exit_ok) {
            std::cerr << "nmdeg: " << result.diagnostic << '\n';
            return result.exit_code;
        }
        const json& rep = result.report;
        std::cout << sc.name << ": ";
        if (rep.contains("nmd"))
            std::cout << "degree " << rep["nmd"]["degree"].get<int>() << " ("
                      << rep["nmd"]["classification"].get<std::string>() << ")";
        else
            std::cout << "done";
        std::cout << ", report written to " << (std::filesystem::path(out_dir) / "report.json").string() << '\n';
        for (const auto& w : rep["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
        return static_cast<int>(exit_ok);
    });
}

int cmd_validate(const std::string& file) {
    return guarded([&] {
        const Scenario sc = load_scenario(file, seed_from_env());
        for (const auto& m : model_catalog())
            if (sc.model == m.name) std::cout << "model " << m.name << ": " << m.description << '\n';
        std::cout << resolved(sc).dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

int cmd_list_models() {
    for (const auto& m : model_catalog()) {
        std::cout << m.name << "\n  " << m.description << "\n  rates:";
        if (m.rates.empty()) std::cout << " (per channel)";
        for (const char* r : m.rates) std::cout << ' ' << r;
        std::cout << '\n';
    }
    std::cout << "rate kinds: constant sinusoid exp_poly tanh bump tabulated sum scaled\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-Markovianity degree and measures of time-local master equations"};
    app.require_subcommand(1);

    std::string run_file, out_dir = "out";
    RunOptions ropt;
    auto* run_cmd = app.add_subcommand("run", "run a scenario and write report.json and CSV files");
    run_cmd->add_option("file", run_file, "scenario JSON file")->required();
    run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    run_cmd->add_option("--jobs", ropt.jobs, "worker threads")->check(CLI::Range(1, 256))->capture_default_str();
    run_cmd->add_flag("--reproducible", ropt.reproducible, "omit the timestamp from the report");
    run_cmd->add_flag("--export-trajectory", ropt.export_trajectory, "also write trajectory.csv");

    std::string validate_file;
    auto* validate_cmd = app.add_subcommand("validate", "check a scenario and print it with defaults resolved");
    validate_cmd->add_option("file", validate_file, "scenario JSON file")->required();

    auto* list_cmd = app.add_subcommand("list-models", "list the built-in models and rate kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(exit_schema);
    }

    if (*run_cmd) return cmd_run(run_file, out_dir, ropt);
    if (*validate_cmd) return cmd_validate(validate_file);
    if (*list_cmd) return cmd_list_models();
    return exit_schema;
}
