#include "bloch.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace trapsim::bloch {

namespace {

// Steps per period of the fastest process. 512 keeps the RK4 phase error of
// a pi rotation below 1e-9 and the norm drift below 1e-10 per 1e4 steps,
// which the contracts here require (200 is not enough: the pi-pulse phase
// error would be ~2.5e-8).
constexpr double kStepsPerCycle = 512.0;

void check_state(const BlochState& s) {
    if (!is_finite(s.u) || !is_finite(s.v) || !is_finite(s.w)) {
        throw InvalidArgument("BlochState: non-finite component");
    }
}

void check_drive(const DriveParams& d) {
    if (!is_finite(d.rabi_frequency) || !is_finite(d.detuning) || !is_finite(d.phase)) {
        throw InvalidArgument("DriveParams: non-finite entry");
    }
    if (d.rabi_frequency < 0.0) {
        throw InvalidArgument("DriveParams: rabi_frequency must be >= 0");
    }
}

void check_relax(const RelaxationParams& r) {
    if (std::isnan(r.t1) || std::isnan(r.t2) || std::isnan(r.t2_prime) || !is_finite(r.w_eq)) {
        throw InvalidArgument("RelaxationParams: non-finite entry");
    }
    if (!(r.t1 > 0.0) || !(r.t2 > 0.0) || !(r.t2_prime > 0.0)) {
        throw InvalidArgument("RelaxationParams: relaxation times must be positive");
    }
    if (r.w_eq < -1.0 || r.w_eq > 1.0) {
        throw InvalidArgument("RelaxationParams: w_eq must lie in [-1, +1]");
    }
}

inline double inv_or_zero(double t) { return std::isinf(t) ? 0.0 : 1.0 / t; }

struct BlochDeriv {
    double ox, oy, delta, inv_t1, inv_t2, w_eq;

    inline void operator()(const double s[3], double d[3]) const {
        d[0] = -delta * s[1] + oy * s[2] - inv_t2 * s[0];
        d[1] = delta * s[0] - ox * s[2] - inv_t2 * s[1];
        d[2] = ox * s[1] - oy * s[0] - inv_t1 * (s[2] - w_eq);
    }
};

BlochState rk4_driven(const BlochState& state, const DriveParams& drive,
                      const RelaxationParams& relax, double duration,
                      double max_step) {
    const double generalized = std::hypot(drive.rabi_frequency, drive.detuning);
    double step = max_step;
    if (generalized > 0.0) step = std::min(step, kTwoPi / generalized / kStepsPerCycle);
    if (!std::isinf(relax.t1)) step = std::min(step, relax.t1 / kStepsPerCycle);
    if (!std::isinf(relax.t2)) step = std::min(step, relax.t2 / kStepsPerCycle);

    const long n = std::max<long>(1, static_cast<long>(std::ceil(duration / step)));
    const double h = duration / static_cast<double>(n);

    const BlochDeriv f{drive.rabi_frequency * std::cos(drive.phase),
                       drive.rabi_frequency * std::sin(drive.phase),
                       drive.detuning,
                       inv_or_zero(relax.t1),
                       inv_or_zero(relax.t2),
                       relax.w_eq};

    double y[3] = {state.u, state.v, state.w};
    double k1[3], k2[3], k3[3], k4[3], tmp[3];
    for (long i = 0; i < n; ++i) {
        f(y, k1);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        f(tmp, k2);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        f(tmp, k3);
        for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h * k3[j];
        f(tmp, k4);
        for (int j = 0; j < 3; ++j) {
            y[j] += h / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
        }
    }
    return {y[0], y[1], y[2]};
}

// Free precession decouples: (u + iv) rotates at the detuning and decays
// with t2, w relaxes toward w_eq with t1. Solved exactly.
BlochState free_precession(const BlochState& state, double detuning,
                           const RelaxationParams& relax, double duration) {
    const double c = std::cos(detuning * duration);
    const double s = std::sin(detuning * duration);
    const double e2 = std::isinf(relax.t2) ? 1.0 : std::exp(-duration / relax.t2);
    const double e1 = std::isinf(relax.t1) ? 1.0 : std::exp(-duration / relax.t1);
    return {e2 * (state.u * c - state.v * s),
            e2 * (state.u * s + state.v * c),
            relax.w_eq + (state.w - relax.w_eq) * e1};
}

} // namespace

RelaxationParams RelaxationParams::from_components(double t1, double t2_prime,
                                                   double t2_star, double w_eq) {
    RelaxationParams r;
    r.t1 = t1;
    r.t2_prime = t2_prime;
    r.w_eq = w_eq;
    const double inv = inv_or_zero(t2_prime) + inv_or_zero(t2_star);
    r.t2 = inv > 0.0 ? 1.0 / inv : kInf;
    check_relax(r);
    return r;
}

PulseSegment PulseSegment::pulse(double omega, double angle, double detuning,
                                 double phase) {
    if (!(omega > 0.0)) {
        throw InvalidArgument("PulseSegment::pulse: omega must be > 0");
    }
    return {angle / omega, {omega, detuning, phase}, false, 0.0};
}

PulseSegment PulseSegment::gap(double duration, double detuning) {
    return {duration, {0.0, detuning, 0.0}, false, 0.0};
}

PulseSegment PulseSegment::ideal_pulse(double angle, double phase) {
    return {0.0, {0.0, 0.0, phase}, true, angle};
}

BlochState ideal_rotation(const BlochState& state, double angle, double phase) {
    check_state(state);
    if (!is_finite(angle) || !is_finite(phase)) {
        throw InvalidArgument("ideal_rotation: non-finite angle or phase");
    }
    const double kx = std::cos(phase);
    const double ky = std::sin(phase);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double dot = kx * state.u + ky * state.v;
    // k x r with k = (kx, ky, 0)
    const double cx = ky * state.w;
    const double cy = -kx * state.w;
    const double cz = kx * state.v - ky * state.u;
    return {state.u * c + cx * s + kx * dot * (1.0 - c),
            state.v * c + cy * s + ky * dot * (1.0 - c),
            state.w * c + cz * s};
}

BlochState evolve_segment(const BlochState& state, const PulseSegment& segment,
                          const RelaxationParams& relax, double max_step) {
    check_state(state);
    check_drive(segment.drive);
    check_relax(relax);
    if (!is_finite(segment.duration) || segment.duration < 0.0) {
        throw InvalidArgument("PulseSegment: duration must be finite and >= 0");
    }
    if (!(max_step > 0.0)) {
        throw InvalidArgument("evolve_segment: max_step must be > 0");
    }
    if (segment.ideal) {
        if (segment.duration != 0.0) {
            throw InvalidArgument("PulseSegment: ideal segments carry zero duration");
        }
        return ideal_rotation(state, segment.ideal_angle, segment.drive.phase);
    }
    if (segment.duration == 0.0) return state;
    if (segment.drive.rabi_frequency == 0.0) {
        return free_precession(state, segment.drive.detuning, relax, segment.duration);
    }
    return rk4_driven(state, segment.drive, relax, segment.duration, max_step);
}

PopulationTrace run_sequence(const BlochState& initial,
                             const std::vector<PulseSegment>& sequence,
                             const RelaxationParams& relax,
                             const std::vector<double>& sample_times,
                             double max_step) {
    check_state(initial);
    check_relax(relax);
    double total = 0.0;
    for (const auto& seg : sequence) {
        if (!is_finite(seg.duration) || seg.duration < 0.0) {
            throw InvalidArgument("run_sequence: segment duration must be finite and >= 0");
        }
        total += seg.duration;
    }
    const double slack = 1e-12 * std::max(total, 1e-12);
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double t = sample_times[i];
        if (!is_finite(t) || t < -slack || t > total + slack) {
            throw InvalidArgument("run_sequence: sample time outside [0, total duration]");
        }
        if (i > 0 && !(t > sample_times[i - 1])) {
            throw InvalidArgument("run_sequence: sample times must be strictly increasing");
        }
    }

    PopulationTrace trace;
    trace.times = sample_times;
    trace.p0.resize(sample_times.size());

    BlochState state = initial;
    double cursor = 0.0;
    std::size_t next = 0;

    auto record_until = [&](double t_now) {
        while (next < sample_times.size() && sample_times[next] <= t_now + slack) {
            trace.p0[next] = state.p0();
            ++next;
        }
    };

    for (const auto& seg : sequence) {
        if (seg.ideal || seg.duration == 0.0) {
            state = evolve_segment(state, seg, relax, max_step);
            continue;
        }
        record_until(cursor);
        const double seg_end = cursor + seg.duration;
        double local = cursor;
        while (next < sample_times.size() && sample_times[next] < seg_end - slack) {
            PulseSegment part = seg;
            part.duration = sample_times[next] - local;
            state = evolve_segment(state, part, relax, max_step);
            local = sample_times[next];
            trace.p0[next] = state.p0();
            ++next;
        }
        PulseSegment part = seg;
        part.duration = seg_end - local;
        state = evolve_segment(state, part, relax, max_step);
        cursor = seg_end;
    }
    record_until(total);
    return trace;
}

double rabi_transfer(double t, double omega, double delta) {
    if (!is_finite(t) || !is_finite(omega) || !is_finite(delta)) {
        throw InvalidArgument("rabi_transfer: non-finite input");
    }
    if (t < 0.0) throw InvalidArgument("rabi_transfer: t must be >= 0");
    if (omega < 0.0) throw InvalidArgument("rabi_transfer: omega must be >= 0");
    const double w2 = omega * omega + delta * delta;
    if (w2 == 0.0) return 0.0;
    const double s = std::sin(0.5 * std::sqrt(w2) * t);
    return omega * omega / w2 * s * s;
}

PopulationTrace lineshape_scan(double t_pulse, double omega,
                               const std::vector<double>& detunings) {
    if (detunings.empty()) {
        throw InvalidArgument("lineshape_scan: detuning list must not be empty");
    }
    PopulationTrace trace;
    trace.times = detunings;
    trace.p0.reserve(detunings.size());
    for (double d : detunings) {
        trace.p0.push_back(rabi_transfer(t_pulse, omega, d));
    }
    return trace;
}

} // namespace trapsim::bloch
