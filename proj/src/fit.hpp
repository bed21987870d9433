#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "constants.hpp"

namespace trapsim::fit {

enum class ModelKind { rabi_bloch, ramsey_eq4, lineshape, exp_decay };

ModelKind model_kind_from_name(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct Bounds {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

// Model selector plus the split between fixed and free parameters.
// Parameter sets per kind:
//   rabi_bloch : omega_rad_s, t2_s, t1_s, amplitude   (+ fixed w_eq, delta_rad_s)
//   ramsey_eq4 : amplitude, offset, delta_rad_s, phi_rad, t2_star_s
//   lineshape  : omega_rad_s, pulse_s, delta0_rad_s, amplitude, offset
//   exp_decay  : v0, tau_s
struct ModelSpec {
    ModelKind kind = ModelKind::exp_decay;
    std::map<std::string, double> fixed;
    std::map<std::string, Bounds> bounds; // overrides of the per-parameter defaults

    std::vector<std::string> free_names() const;
    std::vector<std::string> all_names() const;
    Bounds bounds_for(const std::string& name) const;
};

struct FitOptions {
    int max_iterations = 500;
    double residual_tolerance = 1e-10; // relative residual change
    double gradient_tolerance = 1e-12; // infinity norm of J^T r
    double lambda0 = 1e-3;
    double lambda_max = 1e12;
};

struct FitResult {
    std::vector<std::string> names; // free parameters, fit order
    std::vector<double> values;
    std::vector<double> sigmas; // 1-sigma from the residual-scaled curvature
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
    bool residual_monotone = true; // over accepted steps

    double value(const std::string& name) const;
    double sigma(const std::string& name) const;
};

// Evaluate the model at x for the given free-parameter values (fixed ones
// come from the spec). Pure; throws on out-of-bounds parameters.
std::vector<double> predict(const ModelSpec& spec,
                            const std::map<std::string, double>& params,
                            const std::vector<double>& x);

// Damped least squares (Levenberg-Marquardt): central-difference Jacobian,
// multiplicative damping x10 on rejection / /10 on acceptance, stop on
// relative residual change or gradient norm. Singular normal equations at
// maximum damping yield converged = false, never a throw.
FitResult fit_curve(const ModelSpec& spec, const std::vector<double>& x,
                    const std::vector<double>& y,
                    const std::map<std::string, double>& init,
                    const FitOptions& opts = {});

// Data-driven starting point: dominant periodogram peak for frequencies,
// min/max for amplitudes, envelope half-decay for time constants.
std::map<std::string, double> initial_guess(const ModelSpec& spec,
                                            const std::vector<double>& x,
                                            const std::vector<double>& y);

// Seeded residual bootstrap: refit on resampled residuals; returns the
// standard deviation of each free parameter across replicas.
std::map<std::string, double> bootstrap_sigmas(const ModelSpec& spec,
                                               const std::vector<double>& x,
                                               const std::vector<double>& y,
                                               const FitResult& fit, int replicas,
                                               std::uint64_t seed,
                                               const FitOptions& opts = {});

} // namespace trapsim::fit
