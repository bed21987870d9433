#include "fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "bloch.hpp"
#include "dephasing.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace trapsim::fit {

namespace {

struct ParamDef {
    const char* name;
    Bounds bounds;
};

const std::vector<ParamDef>& param_table(ModelKind kind) {
    // Time constants carry finite default upper bounds: on windows much
    // shorter than the constant the data cannot tell 1e3 s from infinity,
    // and an unbounded walk in that direction starves the other parameters.
    static const std::vector<ParamDef> rabi = {
        {"omega_rad_s", {0.0, 1e9}},
        {"t2_s", {1e-9, 1e3}},
        {"t1_s", {1e-9, 1e3}},
        {"amplitude", {0.0, 2.0}},
        {"w_eq", {-1.0, 1.0}},
        {"delta_rad_s", {}},
    };
    static const std::vector<ParamDef> ramsey = {
        {"amplitude", {0.0, 2.0}},
        {"offset", {-1.0, 2.0}},
        {"delta_rad_s", {}},
        {"phi_rad", {}},
        {"t2_star_s", {1e-9, 1e9}},
    };
    static const std::vector<ParamDef> lineshape = {
        {"omega_rad_s", {0.0, 1e9}},
        {"pulse_s", {1e-12, 10.0}},
        {"delta0_rad_s", {}},
        {"amplitude", {0.0, 2.0}},
        {"offset", {-1.0, 2.0}},
    };
    static const std::vector<ParamDef> decay = {
        {"v0", {0.0, std::numeric_limits<double>::infinity()}},
        {"tau_s", {1e-12, 1e4}},
    };
    switch (kind) {
        case ModelKind::rabi_bloch: return rabi;
        case ModelKind::ramsey_eq4: return ramsey;
        case ModelKind::lineshape: return lineshape;
        case ModelKind::exp_decay: return decay;
    }
    throw InvalidArgument("unknown model kind");
}

// Parameters a model only consumes when the caller pins them.
bool fixed_only(ModelKind kind, const std::string& name) {
    return kind == ModelKind::rabi_bloch && (name == "w_eq" || name == "delta_rad_s");
}

double lookup(const std::map<std::string, double>& m, const std::string& k,
              double fallback) {
    auto it = m.find(k);
    return it == m.end() ? fallback : it->second;
}

} // namespace

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "rabi_bloch" || name == "rabi") return ModelKind::rabi_bloch;
    if (name == "ramsey_eq4" || name == "ramsey") return ModelKind::ramsey_eq4;
    if (name == "lineshape") return ModelKind::lineshape;
    if (name == "exp_decay") return ModelKind::exp_decay;
    throw InvalidArgument("unknown fit model '" + name + "'");
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::rabi_bloch: return "rabi_bloch";
        case ModelKind::ramsey_eq4: return "ramsey_eq4";
        case ModelKind::lineshape: return "lineshape";
        case ModelKind::exp_decay: return "exp_decay";
    }
    return "?";
}

std::vector<std::string> ModelSpec::all_names() const {
    std::vector<std::string> names;
    for (const auto& def : param_table(kind)) names.emplace_back(def.name);
    return names;
}

std::vector<std::string> ModelSpec::free_names() const {
    std::vector<std::string> names;
    for (const auto& def : param_table(kind)) {
        if (fixed.count(def.name) == 0 && !fixed_only(kind, def.name)) {
            names.emplace_back(def.name);
        }
    }
    return names;
}

Bounds ModelSpec::bounds_for(const std::string& name) const {
    auto it = bounds.find(name);
    if (it != bounds.end()) return it->second;
    for (const auto& def : param_table(kind)) {
        if (name == def.name) return def.bounds;
    }
    throw InvalidArgument("unknown parameter '" + name + "' for model " +
                          model_kind_name(kind));
}

double FitResult::value(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[i];
    }
    throw InvalidArgument("FitResult: no parameter '" + name + "'");
}

double FitResult::sigma(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return sigmas[i];
    }
    throw InvalidArgument("FitResult: no parameter '" + name + "'");
}

std::vector<double> predict(const ModelSpec& spec,
                            const std::map<std::string, double>& params,
                            const std::vector<double>& x) {
    std::map<std::string, double> p = spec.fixed;
    for (const auto& [k, v] : params) {
        if (spec.fixed.count(k)) {
            throw InvalidArgument("predict: parameter '" + k + "' is fixed");
        }
        p[k] = v;
    }
    for (const auto& name : spec.free_names()) {
        if (p.count(name) == 0) {
            throw InvalidArgument("predict: missing parameter '" + name + "'");
        }
        const Bounds b = spec.bounds_for(name);
        const double v = p.at(name);
        if (!is_finite(v) || v < b.lo || v > b.hi) {
            throw InvalidArgument("predict: parameter '" + name + "' out of bounds");
        }
    }

    std::vector<double> y;
    y.reserve(x.size());
    switch (spec.kind) {
        case ModelKind::ramsey_eq4: {
            dephasing::RamseyParams rp;
            rp.amplitude = p.at("amplitude");
            rp.offset = p.at("offset");
            rp.delta = p.at("delta_rad_s");
            rp.phi = p.at("phi_rad");
            rp.t2_star = p.at("t2_star_s");
            for (double t : x) y.push_back(dephasing::ramsey_analytic(t, rp));
            break;
        }
        case ModelKind::lineshape: {
            const double omega = p.at("omega_rad_s");
            const double pulse = p.at("pulse_s");
            const double d0 = p.at("delta0_rad_s");
            const double amp = p.at("amplitude");
            const double off = p.at("offset");
            for (double d : x) {
                y.push_back(amp * bloch::rabi_transfer(pulse, omega, d - d0) + off);
            }
            break;
        }
        case ModelKind::exp_decay: {
            const double v0 = p.at("v0");
            const double tau = p.at("tau_s");
            for (double t : x) y.push_back(v0 * std::exp(-t / tau));
            break;
        }
        case ModelKind::rabi_bloch: {
            for (std::size_t i = 1; i < x.size(); ++i) {
                if (!(x[i] > x[i - 1])) {
                    throw InvalidArgument("rabi_bloch: times must be strictly increasing");
                }
            }
            if (!x.empty() && x.front() < 0.0) {
                throw InvalidArgument("rabi_bloch: times must be >= 0");
            }
            bloch::RelaxationParams relax;
            relax.t1 = p.at("t1_s");
            relax.t2 = p.at("t2_s");
            relax.w_eq = lookup(p, "w_eq", 0.0);
            const double amp = p.at("amplitude");
            std::vector<bloch::PulseSegment> seq = {bloch::PulseSegment{
                x.empty() ? 0.0 : x.back(),
                {p.at("omega_rad_s"), lookup(p, "delta_rad_s", 0.0), 0.0},
                false,
                0.0}};
            auto trace = bloch::run_sequence({0.0, 0.0, 1.0}, seq, relax, x);
            for (double v : trace.p0) y.push_back(amp * v);
            break;
        }
    }
    for (double v : y) {
        if (!is_finite(v)) throw NumericError("predict: non-finite model output");
    }
    return y;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Workspace {
    const ModelSpec& spec;
    const std::vector<double>& x;
    std::vector<std::string> names;

    std::map<std::string, double> to_map(const VectorXd& p) const {
        std::map<std::string, double> m;
        for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = p(static_cast<long>(i));
        return m;
    }

    VectorXd eval(const VectorXd& p) const {
        const auto y = predict(spec, to_map(p), x);
        return Eigen::Map<const VectorXd>(y.data(), static_cast<long>(y.size()));
    }

    VectorXd clip(const VectorXd& p) const {
        VectorXd q = p;
        for (std::size_t i = 0; i < names.size(); ++i) {
            const Bounds b = spec.bounds_for(names[i]);
            q(static_cast<long>(i)) = std::clamp(q(static_cast<long>(i)), b.lo, b.hi);
        }
        return q;
    }

    // Central differences with per-parameter relative step 1e-6, clipped
    // into bounds so evaluation stays legal at the box edge.
    MatrixXd jacobian(const VectorXd& p, const VectorXd& f0) const {
        MatrixXd jac(f0.size(), p.size());
        for (long j = 0; j < p.size(); ++j) {
            const Bounds b = spec.bounds_for(names[static_cast<std::size_t>(j)]);
            const double h = 1e-6 * std::max(std::abs(p(j)), 1e-3);
            VectorXd pp = p, pm = p;
            pp(j) = std::min(p(j) + h, b.hi);
            pm(j) = std::max(p(j) - h, b.lo);
            const double span = pp(j) - pm(j);
            if (span <= 0.0) {
                jac.col(j).setZero();
                continue;
            }
            const VectorXd fp = pp(j) == p(j) ? f0 : eval(pp);
            const VectorXd fm = pm(j) == p(j) ? f0 : eval(pm);
            jac.col(j) = (fp - fm) / span;
        }
        return jac;
    }
};

} // namespace

FitResult fit_curve(const ModelSpec& spec, const std::vector<double>& x,
                    const std::vector<double>& y,
                    const std::map<std::string, double>& init,
                    const FitOptions& opts) {
    const auto names = ModelSpec(spec).free_names();
    const std::size_t k = names.size();
    if (x.size() != y.size()) throw InvalidArgument("fit_curve: |x| != |y|");
    if (x.size() < k + 1) {
        throw InvalidArgument("fit_curve: need at least one point more than parameters");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!is_finite(x[i]) || !is_finite(y[i])) {
            throw InvalidArgument("fit_curve: non-finite data");
        }
    }

    Workspace ws{spec, x, names};
    VectorXd p(static_cast<long>(k));
    for (std::size_t i = 0; i < k; ++i) {
        auto it = init.find(names[i]);
        if (it == init.end()) {
            throw InvalidArgument("fit_curve: missing initial value for '" + names[i] + "'");
        }
        p(static_cast<long>(i)) = it->second;
    }
    p = ws.clip(p);
    const VectorXd p_init = p;

    // Per-iteration, per-parameter step cap relative to the parameter
    // scale. Keeps damped steps inside the local basin: frequency-like
    // parameters of sampled oscillations have spurious distant minima that
    // a single ill-conditioned step could otherwise reach. Clipped steps
    // that fail to descend are rejected by the damping loop as usual.
    auto cap_step = [&](const VectorXd& at, VectorXd& step) {
        for (long j = 0; j < step.size(); ++j) {
            const double scale = std::max(std::abs(at(j)), std::abs(p_init(j)));
            const double cap = 0.3 * (scale > 0.0 ? scale : 1.0);
            step(j) = std::clamp(step(j), -cap, cap);
        }
    };

    const VectorXd yv = Eigen::Map<const VectorXd>(y.data(), static_cast<long>(y.size()));

    FitResult result;
    result.names = names;

    VectorXd f = ws.eval(p);
    VectorXd r = yv - f;
    double rss = r.squaredNorm();
    double lambda = opts.lambda0;
    bool converged = false;
    int iter = 0;
    bool exhausted = false;

    for (; iter < opts.max_iterations; ++iter) {
        if (rss == 0.0) {
            converged = true;
            break;
        }
        const MatrixXd jac = ws.jacobian(p, f);
        const VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
            converged = true;
            break;
        }
        const MatrixXd jtj = jac.transpose() * jac;
        // a zero-sensitivity free parameter keeps the normal equations
        // singular regardless of damping
        bool structurally_singular = false;
        for (long d = 0; d < jtj.rows(); ++d) {
            if (!(jtj(d, d) > 0.0)) structurally_singular = true;
        }
        if (structurally_singular) {
            exhausted = true;
            break;
        }

        bool accepted = false;
        while (!accepted) {
            MatrixXd damped = jtj;
            for (long d = 0; d < damped.rows(); ++d) {
                const double scale = jtj(d, d) > 0.0 ? jtj(d, d) : 1.0;
                damped(d, d) += lambda * scale;
            }
            Eigen::LDLT<MatrixXd> solver(damped);
            bool usable = solver.info() == Eigen::Success;
            VectorXd step;
            if (usable) {
                step = solver.solve(grad);
                usable = step.allFinite();
            }
            if (usable) cap_step(p, step);
            if (usable) {
                const VectorXd p_try = ws.clip(p + step);
                VectorXd f_try;
                double rss_try = std::numeric_limits<double>::infinity();
                try {
                    f_try = ws.eval(p_try);
                    rss_try = (yv - f_try).squaredNorm();
                } catch (const NumericError&) {
                    usable = false;
                }
                if (usable && rss_try <= rss) {
                    if (rss_try > rss) result.residual_monotone = false;
                    const double drop = rss - rss_try;
                    p = p_try;
                    f = f_try;
                    r = yv - f;
                    rss = rss_try;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    accepted = true;
                    if (drop <= opts.residual_tolerance * std::max(rss, 1e-300)) {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > opts.lambda_max) {
                exhausted = true;
                break;
            }
        }
        if (converged || exhausted) {
            if (!exhausted) ++iter;
            break;
        }
    }

    result.iterations = iter;
    result.converged = converged;
    result.rss = rss;
    result.values.resize(k);
    for (std::size_t i = 0; i < k; ++i) result.values[i] = p(static_cast<long>(i));

    // Report phases in (-pi, pi].
    for (std::size_t i = 0; i < k; ++i) {
        if (names[i] == "phi_rad") {
            double phi = std::remainder(result.values[i], kTwoPi);
            if (phi <= -kPi) phi += kTwoPi;
            result.values[i] = phi;
            p(static_cast<long>(i)) = phi;
        }
    }

    // 1-sigma uncertainties from the residual-scaled curvature, inverted in
    // the unit-diagonal scaling of J^T J (the raw matrix spans many decades
    // across differently scaled parameters).
    result.sigmas.assign(k, std::numeric_limits<double>::infinity());
    const MatrixXd jac = ws.jacobian(p, f);
    const MatrixXd jtj = jac.transpose() * jac;
    VectorXd s(static_cast<long>(k));
    bool scaled_ok = true;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = jtj(static_cast<long>(i), static_cast<long>(i));
        if (!(d > 0.0)) scaled_ok = false;
        s(static_cast<long>(i)) = d > 0.0 ? std::sqrt(d) : 1.0;
    }
    if (scaled_ok) {
        MatrixXd scaled(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                scaled(static_cast<long>(i), static_cast<long>(j)) =
                    jtj(static_cast<long>(i), static_cast<long>(j)) /
                    (s(static_cast<long>(i)) * s(static_cast<long>(j)));
            }
        }
        Eigen::FullPivLU<MatrixXd> lu(scaled);
        if (lu.isInvertible()) {
            const MatrixXd inv = lu.inverse();
            const double dof = static_cast<double>(x.size()) - static_cast<double>(k);
            const double scale = dof > 0.0 ? rss / dof : 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double v = inv(static_cast<long>(i), static_cast<long>(i)) * scale /
                                 (s(static_cast<long>(i)) * s(static_cast<long>(i)));
                result.sigmas[i] = v >= 0.0 ? std::sqrt(v) : 0.0;
            }
        }
    }
    return result;
}

namespace {

// Dominant-frequency scan of a demeaned trace on a dense angular-frequency
// grid with parabolic peak refinement. Returns (omega, phase at omega).
std::pair<double, double> dominant_frequency(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double span = x.back() - x.front();
    if (!(span > 0.0)) throw InvalidArgument("dominant_frequency: zero time span");
    double dt_min = span;
    for (std::size_t i = 1; i < n; ++i) dt_min = std::min(dt_min, x[i] - x[i - 1]);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);

    const double w_lo = kPi / span;          // half a cycle across the window
    const double w_hi = kPi / dt_min;        // Nyquist
    const int grid = 4096;
    double best_w = w_lo, best_p = 0.0;
    std::vector<double> power(grid);
    for (int g = 0; g < grid; ++g) {
        const double w = w_lo + (w_hi - w_lo) * g / (grid - 1);
        std::complex<double> z(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            z += (y[i] - mean) * std::exp(std::complex<double>(0.0, -w * x[i]));
        }
        power[g] = std::norm(z);
        if (power[g] > best_p) {
            best_p = power[g];
            best_w = w;
        }
    }
    int gi = static_cast<int>((best_w - w_lo) / (w_hi - w_lo) * (grid - 1) + 0.5);
    gi = std::clamp(gi, 1, grid - 2);
    const double y0 = power[gi - 1], y1 = power[gi], y2 = power[gi + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    double shift = 0.0;
    if (denom < 0.0) shift = 0.5 * (y0 - y2) / denom;
    const double w_ref =
        w_lo + (w_hi - w_lo) * (gi + std::clamp(shift, -0.5, 0.5)) / (grid - 1);

    std::complex<double> z(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        z += (y[i] - mean) * std::exp(std::complex<double>(0.0, -w_ref * x[i]));
    }
    return {w_ref, std::arg(z)};
}

// Time at which the rectified oscillation envelope first drops below half
// its initial value; NaN if it never does within the window.
double envelope_half_time(const std::vector<double>& x, const std::vector<double>& y,
                          double center, double full) {
    std::vector<std::pair<double, double>> peaks;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double a = std::abs(y[i - 1] - center);
        const double b = std::abs(y[i] - center);
        const double c = std::abs(y[i + 1] - center);
        if (b >= a && b >= c) peaks.emplace_back(x[i], b);
    }
    if (peaks.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const double target = 0.5 * full;
    double running = peaks.front().second;
    for (const auto& [t, v] : peaks) {
        running = std::max(running * 0.7, v);
        if (running < target) return t - x.front();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::map<std::string, double> initial_guess(const ModelSpec& spec,
                                            const std::vector<double>& x,
                                            const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 4) {
        throw InvalidArgument("initial_guess: need matching x/y with >= 4 points");
    }
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    const double ymin = *ymin_it, ymax = *ymax_it;
    if (!(ymax - ymin > 1e-12 * std::max({1.0, std::abs(ymax), std::abs(ymin)}))) {
        throw InvalidArgument("initial_guess: degenerate data (constant trace)");
    }
    const double span = x.back() - x.front();
    if (!(span > 0.0)) throw InvalidArgument("initial_guess: degenerate x axis");

    std::map<std::string, double> g;
    switch (spec.kind) {
        case ModelKind::ramsey_eq4: {
            const double c = 0.5 * (ymax + ymin);
            const double a = 0.5 * (ymax - ymin);
            const auto [w, phase] = dominant_frequency(x, y);
            g["amplitude"] = a;
            g["offset"] = c;
            g["phi_rad"] = phase;
            const double t_half = envelope_half_time(x, y, c, a);
            // alpha(t) = 1/2 at t = 0.7863 T2*. Starting below the true
            // dephasing time is what hurts (the model goes flat), so the
            // estimate is floored at a sixth of the window.
            double t2s = std::isnan(t_half) ? span : t_half / 0.7863;
            t2s = std::clamp(t2s, span / 6.0, 5.0 * span);
            auto fixed_t2s = spec.fixed.find("t2_star_s");
            if (fixed_t2s != spec.fixed.end()) t2s = fixed_t2s->second;
            g["t2_star_s"] = t2s;
            // The phase lag drifts by -3*0.97/T2* / (1 + x^2) per unit
            // time, which biases the spectral peak low by about two thirds
            // of that rate at the envelope-weighted early times.
            g["delta_rad_s"] = w + 2.0 * 0.97 / t2s;
            break;
        }
        case ModelKind::rabi_bloch: {
            const auto [w, phase] = dominant_frequency(x, y);
            (void)phase;
            g["omega_rad_s"] = w;
            g["amplitude"] = std::clamp(ymax - ymin, 0.05, 2.0);
            g["t2_s"] = span;
            g["t1_s"] = 10.0 * span;
            break;
        }
        case ModelKind::lineshape: {
            const std::size_t peak =
                static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
            g["delta0_rad_s"] = x[peak];
            g["offset"] = ymin;
            g["amplitude"] = ymax - ymin;
            const double om_fixed = lookup(spec.fixed, "omega_rad_s", 0.0);
            const double pulse_fixed = lookup(spec.fixed, "pulse_s", 0.0);
            if (pulse_fixed > 0.0) {
                g["omega_rad_s"] = kPi / pulse_fixed;
            } else if (om_fixed > 0.0) {
                g["pulse_s"] = kPi / om_fixed;
            } else {
                g["omega_rad_s"] = 0.25 * span;
                g["pulse_s"] = kPi / g["omega_rad_s"];
            }
            break;
        }
        case ModelKind::exp_decay: {
            const double v0 = std::max(y.front(), ymax * 0.5);
            const double floor = std::min(0.0, ymin);
            double tau = 0.5 * span;
            const double target = floor + 0.5 * (v0 - floor);
            for (std::size_t i = 0; i < y.size(); ++i) {
                if (y[i] <= target) {
                    tau = std::max(x[i] - x.front(), 0.05 * span) / std::log(2.0);
                    break;
                }
            }
            g["v0"] = v0;
            g["tau_s"] = tau;
            break;
        }
    }
    // Keep only the free parameters.
    std::map<std::string, double> out;
    for (const auto& name : spec.free_names()) {
        auto it = g.find(name);
        if (it != g.end()) out[name] = it->second;
    }
    return out;
}

std::map<std::string, double> bootstrap_sigmas(const ModelSpec& spec,
                                               const std::vector<double>& x,
                                               const std::vector<double>& y,
                                               const FitResult& fit, int replicas,
                                               std::uint64_t seed,
                                               const FitOptions& opts) {
    if (replicas < 2) throw InvalidArgument("bootstrap_sigmas: need >= 2 replicas");
    std::map<std::string, double> center;
    for (std::size_t i = 0; i < fit.names.size(); ++i) center[fit.names[i]] = fit.values[i];
    const auto model = predict(spec, center, x);
    std::vector<double> residuals(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) residuals[i] = y[i] - model[i];

    std::map<std::string, std::vector<double>> draws;
    for (int b = 0; b < replicas; ++b) {
        SplitMix64 rng(stream_key(seed, static_cast<std::uint64_t>(b), 0xB007));
        std::vector<double> yb(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::size_t j =
                static_cast<std::size_t>(rng.next() % static_cast<std::uint64_t>(x.size()));
            yb[i] = model[i] + residuals[j];
        }
        try {
            const auto refit = fit_curve(spec, x, yb, center, opts);
            for (std::size_t i = 0; i < refit.names.size(); ++i) {
                draws[refit.names[i]].push_back(refit.values[i]);
            }
        } catch (const NumericError&) {
            // skip pathological replicas
        }
    }

    std::map<std::string, double> sigmas;
    for (const auto& [name, vals] : draws) {
        if (vals.size() < 2) continue;
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(vals.size() - 1);
        sigmas[name] = std::sqrt(var);
    }
    return sigmas;
}

} // namespace trapsim::fit
