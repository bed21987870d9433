#include "trapsim/trapsim.h"

#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "config.hpp"
#include "dephasing.hpp"
#include "errors.hpp"
#include "runner.hpp"
#include "trap.hpp"

using namespace trapsim;

struct ts_experiment {
    config::ExperimentConfig cfg;
    int threads = 1;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

ts_status classify(const std::exception& e) {
    set_error(e.what());
    if (dynamic_cast<const ConfigError*>(&e)) return TS_ERR_CONFIG;
    if (dynamic_cast<const InvalidArgument*>(&e)) return TS_ERR_INVALID_ARGUMENT;
    if (dynamic_cast<const NumericError*>(&e)) return TS_ERR_NUMERIC;
    if (dynamic_cast<const IoError*>(&e)) return TS_ERR_FAILURE;
    return TS_ERR_FAILURE;
}

template <typename Fn>
ts_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return classify(e);
    } catch (...) {
        set_error("unknown failure");
        return TS_ERR_FAILURE;
    }
}

char* dup_string(const std::string& s) {
    char* out = new (std::nothrow) char[s.size() + 1];
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

template <typename Fn>
double guarded_value(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        set_error(e.what());
        return nan_value();
    }
}

runner::RunOptions run_options(const ts_experiment* exp, const char* out_dir) {
    runner::RunOptions opts;
    opts.out_dir = out_dir ? out_dir : exp->cfg.output_dir;
    opts.threads = exp->threads;
    return opts;
}

trap::TrapParams scalar_trap(double depth_k, double delta_eff_rad_s) {
    trap::TrapParams t;
    t.depth_k = depth_k;
    t.delta_eff = delta_eff_rad_s;
    return t;
}

runner::FitCommand parse_fit_options(const char* model, const char* options_json) {
    runner::FitCommand cmd;
    cmd.model = model ? model : "";
    if (options_json && options_json[0] != '\0') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(options_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("fit options: ") + e.what());
        }
        if (!doc.is_object()) throw ConfigError("fit options must be a JSON object");
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (it.key() == "init" || it.key() == "fixed") {
                if (!it->is_object()) {
                    throw ConfigError("fit options." + it.key() + " must be an object");
                }
                auto& target = it.key() == "init" ? cmd.init : cmd.fixed;
                for (auto p = it->begin(); p != it->end(); ++p) {
                    if (!p->is_number()) {
                        throw ConfigError("fit options." + it.key() + "." + p.key() +
                                          " must be a number");
                    }
                    target[p.key()] = p->get<double>();
                }
            } else if (it.key() == "bootstrap") {
                cmd.bootstrap = it->get<int>();
            } else if (it.key() == "seed") {
                cmd.seed = it->get<std::uint64_t>();
            } else {
                throw ConfigError("fit options: unknown key '" + it.key() + "'");
            }
        }
    }
    return cmd;
}

} // namespace

extern "C" {

const char* ts_version(void) { return runner::kToolVersion; }

const char* ts_last_error(void) { return g_last_error.c_str(); }

ts_status ts_experiment_create_default(ts_experiment** out) {
    return guarded([&]() {
        if (!out) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        auto* exp = new ts_experiment;
        exp->cfg.validate();
        *out = exp;
        return TS_OK;
    });
}

ts_status ts_experiment_create(const char* config_json, ts_experiment** out) {
    return guarded([&]() {
        if (!out || !config_json) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        auto* exp = new ts_experiment;
        try {
            exp->cfg = config::load_config_text(config_json, "<config>");
        } catch (...) {
            delete exp;
            throw;
        }
        *out = exp;
        return TS_OK;
    });
}

ts_status ts_experiment_from_file(const char* path, ts_experiment** out) {
    return guarded([&]() {
        if (!out || !path) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        auto* exp = new ts_experiment;
        try {
            exp->cfg = config::load_config_file(path);
        } catch (...) {
            delete exp;
            throw;
        }
        *out = exp;
        return TS_OK;
    });
}

void ts_experiment_destroy(ts_experiment* experiment) { delete experiment; }

ts_status ts_experiment_override(ts_experiment* experiment, const char* overrides_json) {
    return guarded([&]() {
        if (!experiment || !overrides_json) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(overrides_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("overrides: ") + e.what());
        }
        experiment->cfg = config::apply_overrides(experiment->cfg, doc);
        return TS_OK;
    });
}

ts_status ts_experiment_set_seed(ts_experiment* experiment, uint64_t seed) {
    if (!experiment) {
        set_error("null experiment");
        return TS_ERR_INVALID_ARGUMENT;
    }
    experiment->cfg.seed = seed;
    return TS_OK;
}

ts_status ts_experiment_set_threads(ts_experiment* experiment, int threads) {
    if (!experiment || threads < 1) {
        set_error("threads must be >= 1");
        return TS_ERR_INVALID_ARGUMENT;
    }
    experiment->threads = threads;
    return TS_OK;
}

ts_status ts_experiment_dump(const ts_experiment* experiment, char** json_out) {
    return guarded([&]() {
        if (!experiment || !json_out) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        *json_out = dup_string(config::to_json(experiment->cfg).dump(2));
        return *json_out ? TS_OK : TS_ERR_FAILURE;
    });
}

ts_status ts_run_simulate(ts_experiment* experiment, const char* kind,
                          const char* out_dir) {
    return guarded([&]() {
        if (!experiment || !kind) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        runner::cmd_simulate(experiment->cfg, runner::sim_kind_from_name(kind),
                             run_options(experiment, out_dir));
        return TS_OK;
    });
}

ts_status ts_run_array_ramsey(ts_experiment* experiment, const char* out_dir) {
    return guarded([&]() {
        if (!experiment) {
            set_error("null experiment");
            return TS_ERR_INVALID_ARGUMENT;
        }
        runner::cmd_array_ramsey(experiment->cfg, run_options(experiment, out_dir));
        return TS_OK;
    });
}

ts_status ts_run_render(ts_experiment* experiment, const char* out_dir) {
    return guarded([&]() {
        if (!experiment) {
            set_error("null experiment");
            return TS_ERR_INVALID_ARGUMENT;
        }
        runner::cmd_render(experiment->cfg, run_options(experiment, out_dir));
        return TS_OK;
    });
}

ts_status ts_fit_csv(const char* model, const char* csv_path, const char* options_json,
                     const char* out_dir, int* converged) {
    return guarded([&]() {
        if (!model || !csv_path) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        runner::FitCommand cmd = parse_fit_options(model, options_json);
        cmd.input_csv = csv_path;
        runner::RunOptions opts;
        opts.out_dir = out_dir ? out_dir : ".";
        const auto outcome = runner::cmd_fit(cmd, opts);
        if (converged) *converged = outcome.result.converged ? 1 : 0;
        if (!outcome.result.converged) {
            set_error("fit did not converge (result written)");
            return TS_ERR_NO_CONVERGENCE;
        }
        return TS_OK;
    });
}

ts_status ts_fit_arrays(const char* model, const double* x, const double* y, size_t n,
                        const char* options_json, char** result_json) {
    return guarded([&]() {
        if (!model || !x || !y || !result_json) {
            set_error("null argument");
            return TS_ERR_INVALID_ARGUMENT;
        }
        runner::FitCommand cmd = parse_fit_options(model, options_json);
        fit::ModelSpec spec;
        spec.kind = fit::model_kind_from_name(cmd.model);
        for (const auto& [k, v] : cmd.fixed) spec.fixed[k] = v;
        const std::vector<double> xs(x, x + n);
        const std::vector<double> ys(y, y + n);
        auto init = fit::initial_guess(spec, xs, ys);
        for (const auto& [k, v] : cmd.init) init[k] = v;
        const auto result = fit::fit_curve(spec, xs, ys, init);

        nlohmann::json params = nlohmann::json::object();
        for (std::size_t i = 0; i < result.names.size(); ++i) {
            params[result.names[i]] = {{"value", result.values[i]},
                                       {"sigma", result.sigmas[i]}};
        }
        nlohmann::json doc = {{"model", fit::model_kind_name(spec.kind)},
                              {"params", params},
                              {"rss", result.rss},
                              {"iterations", result.iterations},
                              {"converged", result.converged}};
        *result_json = dup_string(doc.dump(2));
        if (!*result_json) return TS_ERR_FAILURE;
        return result.converged ? TS_OK : TS_ERR_NO_CONVERGENCE;
    });
}

void ts_string_free(char* s) { delete[] s; }

double ts_rabi_transfer(double t_s, double omega_rad_s, double delta_rad_s) {
    return guarded_value([&]() { return bloch::rabi_transfer(t_s, omega_rad_s, delta_rad_s); });
}

double ts_envelope_alpha(double t_s, double t2_star_s) {
    return guarded_value([&]() { return dephasing::envelope_alpha(t_s, t2_star_s); });
}

double ts_phase_kappa(double t_s, double t2_star_s) {
    return guarded_value([&]() { return dephasing::phase_kappa(t_s, t2_star_s); });
}

double ts_ramsey_signal(double t_s, double amplitude, double offset, double delta_rad_s,
                        double phi_rad, double t2_star_s) {
    return guarded_value([&]() {
        dephasing::RamseyParams p;
        p.amplitude = amplitude;
        p.offset = offset;
        p.delta = delta_rad_s;
        p.phi = phi_rad;
        p.t2_star = t2_star_s;
        return dephasing::ramsey_analytic(t_s, p);
    });
}

double ts_echo_visibility(double t1_s, double t_echo_s) {
    return guarded_value([&]() { return dephasing::echo_visibility(t1_s, t_echo_s); });
}

ts_status ts_effective_detuning(double wavelength_m, double* delta_eff_rad_s) {
    return guarded([&]() {
        if (!delta_eff_rad_s) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        *delta_eff_rad_s = trap::effective_detuning(wavelength_m, PhysicsConstants{});
        return TS_OK;
    });
}

ts_status ts_scattering_rate(double depth_k, double delta_eff_rad_s, double* rate_per_s) {
    return guarded([&]() {
        if (!rate_per_s) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        *rate_per_s = trap::scattering_rate(scalar_trap(depth_k, delta_eff_rad_s),
                                            PhysicsConstants{});
        return TS_OK;
    });
}

ts_status ts_differential_light_shift(double depth_k, double delta_eff_rad_s,
                                      double* shift_rad_s) {
    return guarded([&]() {
        if (!shift_rad_s) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        *shift_rad_s = trap::differential_light_shift(scalar_trap(depth_k, delta_eff_rad_s),
                                                      PhysicsConstants{});
        return TS_OK;
    });
}

ts_status ts_quadratic_zeeman_shift(double bias_field_t, double* shift_rad_s) {
    return guarded([&]() {
        if (!shift_rad_s) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        trap::FieldParams f;
        f.bias_field_t = bias_field_t;
        *shift_rad_s = trap::quadratic_zeeman_shift(f, trap::ShiftModel{});
        return TS_OK;
    });
}

ts_status ts_total_resonance_shift(double depth_k, double delta_eff_rad_s,
                                   double bias_field_t, double* shift_rad_s) {
    return guarded([&]() {
        if (!shift_rad_s) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        trap::FieldParams f;
        f.bias_field_t = bias_field_t;
        *shift_rad_s = trap::total_resonance_shift(scalar_trap(depth_k, delta_eff_rad_s), f,
                                                   trap::ShiftModel{});
        return TS_OK;
    });
}

ts_status ts_temperature_from_t2star(double t2_star_s, double delta_eff_rad_s,
                                     double* temperature_k) {
    return guarded([&]() {
        if (!temperature_k) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        *temperature_k = dephasing::temperature_from_t2star(
            t2_star_s, scalar_trap(1e-3, delta_eff_rad_s), PhysicsConstants{});
        return TS_OK;
    });
}

ts_status ts_t2star_from_temperature(double temperature_k, double delta_eff_rad_s,
                                     double* t2_star_s) {
    return guarded([&]() {
        if (!t2_star_s) {
            set_error("null output pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        *t2_star_s = dephasing::t2star_from_temperature(
            temperature_k, scalar_trap(1e-3, delta_eff_rad_s), PhysicsConstants{});
        return TS_OK;
    });
}

ts_status ts_bloch_evolve(const double uvw_in[3], double duration_s, double omega_rad_s,
                          double delta_rad_s, double phase_rad, double t1_s, double t2_s,
                          double w_eq, double max_step_s, double uvw_out[3]) {
    return guarded([&]() {
        if (!uvw_in || !uvw_out) {
            set_error("null state pointer");
            return TS_ERR_INVALID_ARGUMENT;
        }
        bloch::RelaxationParams relax;
        relax.t1 = t1_s > 0.0 ? t1_s : bloch::kInf;
        relax.t2 = t2_s > 0.0 ? t2_s : bloch::kInf;
        relax.w_eq = w_eq;
        bloch::PulseSegment seg{duration_s, {omega_rad_s, delta_rad_s, phase_rad}, false, 0.0};
        const bloch::BlochState out = bloch::evolve_segment(
            {uvw_in[0], uvw_in[1], uvw_in[2]}, seg, relax,
            max_step_s > 0.0 ? max_step_s : 1e-5);
        uvw_out[0] = out.u;
        uvw_out[1] = out.v;
        uvw_out[2] = out.w;
        return TS_OK;
    });
}

} // extern "C"
