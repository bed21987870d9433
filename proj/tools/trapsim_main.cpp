// trapsim command line front end. Talks to the simulator exclusively through
// the C API in trapsim/trapsim.h; exit codes: 0 ok, 2 config/data error,
// 3 numeric failure, 4 fit non-convergence, 1 anything else.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trapsim/trapsim.h"

namespace {

using nlohmann::json;

int exit_code(ts_status status) {
    switch (status) {
        case TS_OK: return 0;
        case TS_ERR_CONFIG: return 2;
        case TS_ERR_INVALID_ARGUMENT: return 2;
        case TS_ERR_NUMERIC: return 3;
        case TS_ERR_NO_CONVERGENCE: return 4;
        case TS_ERR_FAILURE: return 1;
    }
    return 1;
}

int fail(ts_status status) {
    std::fprintf(stderr, "trapsim: %s\n", ts_last_error());
    return exit_code(status);
}

struct ExperimentHandle {
    ts_experiment* ptr = nullptr;
    ~ExperimentHandle() { ts_experiment_destroy(ptr); }
};

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config JSON");
    cmd->add_option("--out", flags.out_dir, "output directory (default: config output_dir)");
    cmd->add_option("--seed", flags.seed, "override the config seed")
        ->each([&flags](const std::string&) { flags.has_seed = true; });
    cmd->add_option("--threads", flags.threads, "worker threads (results are identical)")
        ->check(CLI::PositiveNumber);
}

ts_status open_experiment(const CommonFlags& flags, const json& overrides,
                          ExperimentHandle& handle) {
    ts_status st = flags.config_path.empty()
                       ? ts_experiment_create_default(&handle.ptr)
                       : ts_experiment_from_file(flags.config_path.c_str(), &handle.ptr);
    if (st != TS_OK) return st;
    if (!overrides.empty()) {
        st = ts_experiment_override(handle.ptr, overrides.dump().c_str());
        if (st != TS_OK) return st;
    }
    if (flags.has_seed) {
        st = ts_experiment_set_seed(handle.ptr, flags.seed);
        if (st != TS_OK) return st;
    }
    return ts_experiment_set_threads(handle.ptr, flags.threads);
}

// name=value pairs for --init/--fix.
json parse_assignments(const std::vector<std::string>& pairs, const char* what) {
    json obj = json::object();
    for (const auto& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError(std::string(what) + " expects name=value, got '" + p + "'");
        }
        try {
            obj[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError(std::string(what) + ": bad number in '" + p + "'");
        }
    }
    return obj;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trapsim — qubit coherence in optical dipole traps and trap registers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("trapsim ") + ts_version());

    // simulate ------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "run one experiment kind");
    std::string sim_kind;
    simulate->add_option("kind", sim_kind, "rabi | ramsey | echo | lineshape")->required();
    CommonFlags sim_flags;
    add_common(simulate, sim_flags);
    double sim_tmax = 0.0, sim_t1 = 0.0, sim_omega = 0.0, sim_freq_hz = 0.0;
    double sim_t1max = 0.0, sim_span_hz = 0.0, sim_pulse_s = 0.0;
    long sim_points = 0, sim_atoms = 0, sim_t1_points = 0;
    bool sim_analytic = false, sim_ideal = false, sim_vis = false, sim_noise_off = false;
    simulate->add_option("--t-max", sim_tmax, "trace length (s)");
    simulate->add_option("--points", sim_points, "samples per trace");
    simulate->add_option("--t1", sim_t1, "echo pulse position (s)");
    simulate->add_option("--t1-max", sim_t1max, "visibility scan end (s)");
    simulate->add_option("--t1-points", sim_t1_points, "visibility scan points");
    simulate->add_option("--omega", sim_omega, "Rabi frequency (rad/s)");
    simulate->add_option("--freq-hz", sim_freq_hz,
                         "drive/Raman detuning in Hz (converted to rad/s)");
    simulate->add_option("--span-hz", sim_span_hz, "lineshape scan half-span (Hz)");
    simulate->add_option("--pulse-s", sim_pulse_s, "lineshape pulse length (s)");
    simulate->add_option("--atoms", sim_atoms, "ensemble size");
    simulate->add_flag("--analytic", sim_analytic, "closed-form signal instead of Monte Carlo");
    simulate->add_flag("--ideal-pulses", sim_ideal, "instantaneous pi/2 and pi pulses");
    simulate->add_flag("--visibility-scan", sim_vis, "echo visibility against t1");
    simulate->add_flag("--noise-off", sim_noise_off, "disable detection noise");

    // array-ramsey ---------------------------------------------------------
    auto* array_cmd = app.add_subcommand("array-ramsey",
                                         "site-resolved Ramsey pipeline on the register");
    CommonFlags array_flags;
    add_common(array_cmd, array_flags);
    double arr_tmax = 0.0;
    long arr_points = 0;
    array_cmd->add_option("--t-max", arr_tmax, "trace length (s)");
    array_cmd->add_option("--points", arr_points, "samples per trace");

    // render ----------------------------------------------------------------
    auto* render = app.add_subcommand("render", "one fluorescence frame of the register");
    CommonFlags render_flags;
    add_common(render, render_flags);

    // fit --------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit a trace CSV");
    std::string fit_model, fit_input, fit_out = ".";
    std::vector<std::string> fit_init, fit_fixed;
    long fit_bootstrap = 0;
    std::uint64_t fit_seed = 1;
    fit_cmd->add_option("model", fit_model, "rabi_bloch | ramsey_eq4 | lineshape | exp_decay")
        ->required();
    fit_cmd->add_option("--input", fit_input, "trace CSV")->required();
    fit_cmd->add_option("--out", fit_out, "output directory for fits.json");
    fit_cmd->add_option("--init", fit_init, "initial value override, name=value")
        ->take_all();
    fit_cmd->add_option("--fix", fit_fixed, "pin a parameter, name=value")->take_all();
    fit_cmd->add_option("--bootstrap", fit_bootstrap, "residual bootstrap replicas");
    fit_cmd->add_option("--seed", fit_seed, "bootstrap seed");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) {
        json ov = json::object();
        json seq = json::object();
        if (sim_tmax > 0.0) seq["t_max_s"] = sim_tmax;
        if (sim_points > 0) seq["points"] = sim_points;
        if (sim_t1 > 0.0) seq["t1_s"] = sim_t1;
        if (sim_t1max > 0.0) seq["t1_max_s"] = sim_t1max;
        if (sim_t1_points > 0) seq["t1_points"] = sim_t1_points;
        if (sim_omega > 0.0) seq["omega_rabi_rad_s"] = sim_omega;
        if (sim_freq_hz != 0.0) seq["delta_rl_rad_s"] = 2.0 * 3.14159265358979323846 * sim_freq_hz;
        if (sim_span_hz > 0.0) seq["lineshape"] = {{"span_hz", sim_span_hz}};
        if (sim_pulse_s > 0.0) seq["lineshape"]["pulse_s"] = sim_pulse_s;
        if (sim_analytic) seq["analytic"] = true;
        if (sim_ideal) seq["ideal_pulses"] = true;
        if (sim_vis) seq["visibility_scan"] = true;
        if (!seq.empty()) ov["sequence"] = seq;
        if (sim_atoms > 0) ov["ensemble"] = {{"n_atoms", sim_atoms}};
        if (sim_noise_off) ov["detection"] = {{"noise", false}};

        ExperimentHandle exp;
        ts_status st = open_experiment(sim_flags, ov, exp);
        if (st != TS_OK) return fail(st);
        st = ts_run_simulate(exp.ptr, sim_kind.c_str(),
                             sim_flags.out_dir.empty() ? nullptr : sim_flags.out_dir.c_str());
        if (st != TS_OK) return fail(st);
        return 0;
    }

    if (array_cmd->parsed()) {
        json ov = json::object();
        json seq = json::object();
        if (arr_tmax > 0.0) seq["t_max_s"] = arr_tmax;
        if (arr_points > 0) seq["points"] = arr_points;
        if (!seq.empty()) ov["sequence"] = seq;

        ExperimentHandle exp;
        ts_status st = open_experiment(array_flags, ov, exp);
        if (st != TS_OK) return fail(st);
        st = ts_run_array_ramsey(exp.ptr, array_flags.out_dir.empty()
                                              ? nullptr
                                              : array_flags.out_dir.c_str());
        if (st != TS_OK) return fail(st);
        return 0;
    }

    if (render->parsed()) {
        ExperimentHandle exp;
        ts_status st = open_experiment(render_flags, json::object(), exp);
        if (st != TS_OK) return fail(st);
        st = ts_run_render(exp.ptr, render_flags.out_dir.empty()
                                        ? nullptr
                                        : render_flags.out_dir.c_str());
        if (st != TS_OK) return fail(st);
        return 0;
    }

    if (fit_cmd->parsed()) {
        json options = json::object();
        const json init = parse_assignments(fit_init, "--init");
        const json fixed = parse_assignments(fit_fixed, "--fix");
        if (!init.empty()) options["init"] = init;
        if (!fixed.empty()) options["fixed"] = fixed;
        if (fit_bootstrap > 0) {
            options["bootstrap"] = fit_bootstrap;
            options["seed"] = fit_seed;
        }
        int converged = 0;
        const ts_status st = ts_fit_csv(fit_model.c_str(), fit_input.c_str(),
                                        options.dump().c_str(), fit_out.c_str(), &converged);
        if (st != TS_OK) return fail(st);
        return 0;
    }

    return 1;
}
