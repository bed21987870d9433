/*
 * trapsim — simulator and analysis toolkit for coherent manipulation of
 * atomic qubit ensembles in optical dipole traps and 2-D trap registers.
 *
 * C API. All functions are thread-safe as long as each ts_experiment handle
 * is used by one thread at a time. Functions returning ts_status set a
 * thread-local message retrievable with ts_last_error(); the numeric
 * convenience functions return NaN on invalid input instead.
 *
 * Units: SI throughout. Frequencies are angular (rad/s) unless the name
 * says _hz; trap depths are U0/k_B in kelvin.
 */

#ifndef TRAPSIM_TRAPSIM_H
#define TRAPSIM_TRAPSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TRAPSIM_API __declspec(dllexport)
#else
#define TRAPSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ts_status {
    TS_OK = 0,
    TS_ERR_FAILURE = 1,          /* I/O or other environment failure */
    TS_ERR_CONFIG = 2,           /* config/schema/data-format violation */
    TS_ERR_NUMERIC = 3,          /* numeric failure during evaluation */
    TS_ERR_NO_CONVERGENCE = 4,   /* fit did not converge (result still written) */
    TS_ERR_INVALID_ARGUMENT = 5  /* bad argument to a library call */
} ts_status;

/* Opaque experiment handle: a validated configuration plus run options. */
typedef struct ts_experiment ts_experiment;

TRAPSIM_API const char* ts_version(void);

/* Message describing the most recent failure on this thread. */
TRAPSIM_API const char* ts_last_error(void);

/* ---- experiment lifecycle ------------------------------------------- */

TRAPSIM_API ts_status ts_experiment_create_default(ts_experiment** out);
TRAPSIM_API ts_status ts_experiment_create(const char* config_json, ts_experiment** out);
TRAPSIM_API ts_status ts_experiment_from_file(const char* path, ts_experiment** out);
TRAPSIM_API void ts_experiment_destroy(ts_experiment* experiment);

/* Deep-merge a JSON fragment (same schema as the config file) onto the
 * experiment; the merged document is re-validated fail-closed. */
TRAPSIM_API ts_status ts_experiment_override(ts_experiment* experiment,
                                             const char* overrides_json);
TRAPSIM_API ts_status ts_experiment_set_seed(ts_experiment* experiment, uint64_t seed);
TRAPSIM_API ts_status ts_experiment_set_threads(ts_experiment* experiment, int threads);

/* Effective configuration as canonical JSON; free with ts_string_free. */
TRAPSIM_API ts_status ts_experiment_dump(const ts_experiment* experiment, char** json_out);

/* ---- batch commands -------------------------------------------------- */

/* kind: "rabi" | "ramsey" | "echo" | "lineshape". Writes <kind>.csv (or
 * echo_visibility.csv) plus manifest.json into out_dir (NULL: the config's
 * output_dir). */
TRAPSIM_API ts_status ts_run_simulate(ts_experiment* experiment, const char* kind,
                                      const char* out_dir);

/* Site-resolved Ramsey pipeline: per-site traces, frame stack, reference
 * readout, per-site fits, manifest. */
TRAPSIM_API ts_status ts_run_array_ramsey(ts_experiment* experiment, const char* out_dir);

/* One fluorescence frame of the loaded register (frame.pgm + frame.json). */
TRAPSIM_API ts_status ts_run_render(ts_experiment* experiment, const char* out_dir);

/* ---- fitting ---------------------------------------------------------- */

/* model: "rabi_bloch" | "ramsey_eq4" | "lineshape" | "exp_decay".
 * options_json (may be NULL): {"init": {name: value}, "fixed": {name: value},
 * "bootstrap": N, "seed": N}. Writes fits.json into out_dir. *converged is
 * set when the fit ran; non-convergence returns TS_ERR_NO_CONVERGENCE with
 * the result file still written. */
TRAPSIM_API ts_status ts_fit_csv(const char* model, const char* csv_path,
                                 const char* options_json, const char* out_dir,
                                 int* converged);

/* In-memory variant: x/y arrays of length n; the JSON result is returned in
 * *result_json (free with ts_string_free). */
TRAPSIM_API ts_status ts_fit_arrays(const char* model, const double* x, const double* y,
                                    size_t n, const char* options_json,
                                    char** result_json);

TRAPSIM_API void ts_string_free(char* s);

/* ---- direct numeric surface ------------------------------------------ */

/* Rectangular-pulse transfer (omega^2/W^2) sin^2(W t / 2), W^2 = omega^2 +
 * delta^2. */
TRAPSIM_API double ts_rabi_transfer(double t_s, double omega_rad_s, double delta_rad_s);

/* Ramsey dephasing envelope [1 + 0.95 (t/T2*)^2]^(-3/2). */
TRAPSIM_API double ts_envelope_alpha(double t_s, double t2_star_s);

/* Ramsey phase lag -3 arctan(0.97 t/T2*). */
TRAPSIM_API double ts_phase_kappa(double t_s, double t2_star_s);

/* A * alpha * cos(delta t + kappa + phi) + C. */
TRAPSIM_API double ts_ramsey_signal(double t_s, double amplitude, double offset,
                                    double delta_rad_s, double phi_rad,
                                    double t2_star_s);

/* exp(-t1 / t_echo). */
TRAPSIM_API double ts_echo_visibility(double t1_s, double t_echo_s);

/* Effective trap detuning (rad/s, negative) from the 2/3 D2 + 1/3 D1
 * weighting at the default line frequencies. */
TRAPSIM_API ts_status ts_effective_detuning(double wavelength_m,
                                            double* delta_eff_rad_s);

/* Trapping-light scattering rate (1/s) at depth U0/k_B = depth_k. */
TRAPSIM_API ts_status ts_scattering_rate(double depth_k, double delta_eff_rad_s,
                                         double* rate_per_s);

/* Trap-bottom differential light shift (rad/s). */
TRAPSIM_API ts_status ts_differential_light_shift(double depth_k, double delta_eff_rad_s,
                                                  double* shift_rad_s);

/* Quadratic Zeeman shift (rad/s) at the default clock coefficient. */
TRAPSIM_API ts_status ts_quadratic_zeeman_shift(double bias_field_t, double* shift_rad_s);

/* Light shift plus Zeeman shift (rad/s). */
TRAPSIM_API ts_status ts_total_resonance_shift(double depth_k, double delta_eff_rad_s,
                                               double bias_field_t, double* shift_rad_s);

/* Ensemble temperature implied by a dephasing time (and back). */
TRAPSIM_API ts_status ts_temperature_from_t2star(double t2_star_s, double delta_eff_rad_s,
                                                 double* temperature_k);
TRAPSIM_API ts_status ts_t2star_from_temperature(double temperature_k,
                                                 double delta_eff_rad_s,
                                                 double* t2_star_s);

/* Propagate the damped Bloch equations for one rectangular segment.
 * Relaxation times <= 0 mean "disabled". */
TRAPSIM_API ts_status ts_bloch_evolve(const double uvw_in[3], double duration_s,
                                      double omega_rad_s, double delta_rad_s,
                                      double phase_rad, double t1_s, double t2_s,
                                      double w_eq, double max_step_s,
                                      double uvw_out[3]);

#ifdef __cplusplus
}
#endif

#endif /* TRAPSIM_TRAPSIM_H */
