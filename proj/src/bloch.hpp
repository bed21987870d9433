#pragma once

#include <limits>
#include <vector>

#include "constants.hpp"

namespace trapsim::bloch {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Coherence/inversion vector of a two-level ensemble member.
// Convention: w = P1 - P0, so the prepared upper state has w = +1 and the
// measured lower-state population is p0 = (1 - w) / 2.
struct BlochState {
    double u = 0.0;
    double v = 0.0;
    double w = 1.0;

    double norm2() const { return u * u + v * v + w * w; }
    double p0() const { return 0.5 * (1.0 - w); }
    double p1() const { return 0.5 * (1.0 + w); }
};

struct DriveParams {
    double rabi_frequency = 0.0; // rad/s, >= 0; 0 encodes free precession
    double detuning = 0.0;       // rad/s, atom minus drive
    double phase = 0.0;          // rad, rotation-axis azimuth in the uv plane
};

// Relaxation channels of the damped Bloch equations.
// t2 is the composite transverse time; when built from components it obeys
// 1/t2 = 1/t2_prime + 1/t2_star.
struct RelaxationParams {
    double t1 = kInf;       // s
    double t2 = kInf;       // s
    double t2_prime = kInf; // s, homogeneous part, carried for bookkeeping
    double w_eq = 0.0;      // equilibrium inversion in [-1, +1]

    static RelaxationParams none() { return {}; }

    static RelaxationParams from_components(double t1, double t2_prime,
                                            double t2_star, double w_eq = 0.0);
};

// One piecewise-constant slice of a drive program. An ideal segment applies
// an instantaneous rotation by ideal_angle about the drive axis and must
// carry zero duration.
struct PulseSegment {
    double duration = 0.0; // s
    DriveParams drive;
    bool ideal = false;
    double ideal_angle = 0.0; // rad, used only when ideal

    static PulseSegment pulse(double omega, double angle, double detuning = 0.0,
                              double phase = 0.0);
    static PulseSegment gap(double duration, double detuning);
    static PulseSegment ideal_pulse(double angle, double phase = 0.0);
};

// Sampled population trace: p0 against time (or against another abscissa
// such as detuning for lineshape scans).
struct PopulationTrace {
    std::vector<double> times;
    std::vector<double> p0;
};

// Instantaneous rotation by `angle` about the uv-plane axis at azimuth
// `phase` (Rodrigues form).
BlochState ideal_rotation(const BlochState& state, double angle, double phase);

// Propagate the damped Bloch equations across one segment. Driven segments
// integrate with fixed-step classical RK4; free precession (rabi_frequency
// == 0) uses the exact propagator of the decoupled equations.
BlochState evolve_segment(const BlochState& state, const PulseSegment& segment,
                          const RelaxationParams& relax,
                          double max_step = 1e-5);

// Run a segment chain, sampling p0 at the requested times. sample_times must
// be sorted and lie within [0, total duration]. A sample at time t reflects
// the state after every segment that completes by t, including
// zero-duration ideal pulses placed at t.
PopulationTrace run_sequence(const BlochState& initial,
                             const std::vector<PulseSegment>& sequence,
                             const RelaxationParams& relax,
                             const std::vector<double>& sample_times,
                             double max_step = 1e-5);

// Closed-form population transfer of a rectangular pulse on a system
// prepared in the upper state: (omega^2 / W^2) sin^2(W t / 2) with
// W = sqrt(omega^2 + delta^2).
double rabi_transfer(double t, double omega, double delta);

// rabi_transfer evaluated across a detuning axis for a fixed pulse length.
PopulationTrace lineshape_scan(double t_pulse, double omega,
                               const std::vector<double>& detunings);

} // namespace trapsim::bloch
