#pragma once

#include <cstdint>
#include <vector>

#include "bloch.hpp"
#include "trap.hpp"

namespace trapsim::dephasing {

using bloch::PopulationTrace;
using bloch::RelaxationParams;
using trap::TrapParams;

// Thermal atom sample held in one trap. prepared_fraction is the fraction
// pumped into the upper clock state; the remainder never couples to the
// drive and never reaches the measured lower state.
struct ThermalEnsemble {
    long n_atoms = 10000;
    double temperature_k = 15.6e-6;
    TrapParams trap;
    double prepared_fraction = 0.51;

    void validate() const;
};

// Parameters of the analytic Ramsey signal
//   p0(t) = A * alpha(t, T2*) * cos(delta t + kappa(t, T2*) + phi) + C.
struct RamseyParams {
    double amplitude = 0.5;
    double offset = 0.5;
    double delta = 0.0;    // rad/s
    double phi = 0.0;      // rad
    double t2_star = 1e-3; // s, > 0
};

// pi/2 pulse definition for the Monte Carlo sequences. Ideal pulses are
// instantaneous rotations; finite pulses drive at the per-atom detuning.
struct PulseSpec {
    double omega = kTwoPi * 995.0; // rad/s
    bool ideal = false;
    double phase = 0.0;      // axis of the pi/2 pulses
    double echo_phase = 0.0; // axis of the echo pi pulse
};

// Per-block partial means of a Monte Carlo trace. Atoms are grouped into
// fixed blocks of kMcBlockAtoms regardless of thread count; the published
// trace is the size-weighted block average taken in block order.
struct McBlocks {
    std::vector<double> times;
    std::vector<long> block_atoms;
    std::vector<std::vector<double>> block_means; // raw per-atom p0 means
};

inline constexpr long kMcBlockAtoms = 1024;

// Dephasing envelope [1 + 0.95 (t/T2*)^2]^(-3/2).
double envelope_alpha(double t, double t2_star);

// Phase lag -3 arctan(0.97 t/T2*).
double phase_kappa(double t, double t2_star);

double ramsey_analytic(double t, const RamseyParams& params);

// Ensemble temperature implied by a dephasing time:
// T = 1.94 * hbar * |delta_eff| / (k_B * omega_hfs * T2*).
double temperature_from_t2star(double t2_star, const TrapParams& trap,
                               const PhysicsConstants& constants);
double t2star_from_temperature(double temperature_k, const TrapParams& trap,
                               const PhysicsConstants& constants);

// Total mechanical energies drawn from the 3-D harmonic Boltzmann density
// p(E) ~ E^2 exp(-E / k_B T) (three exponential draws per atom), truncated
// at the trap depth. Per-atom streams keyed by (seed, atom index).
std::vector<double> sample_atom_energies(const ThermalEnsemble& ensemble,
                                         std::uint64_t seed);

// Detuning of one atom: base plus the time-averaged differential light
// shift of its orbit. The harmonic virial theorem puts the mean potential
// energy at E/2, so colder atoms sit deeper and are shifted by more.
double atom_detuning(double energy_j, const TrapParams& trap, double base,
                     const PhysicsConstants& constants, int sign_ls = +1);

// Detuning of the coldest atom (E = 0): base plus the full trap-bottom
// differential light shift. This is the precession frequency the analytic
// signal reports as delta.
double trap_bottom_detuning(const TrapParams& trap, double base,
                            const PhysicsConstants& constants, int sign_ls = +1);

// Thermal average of atom_detuning over the ensemble (<E> = 3 k_B T).
double mean_detuning(const ThermalEnsemble& ensemble, double base,
                     const PhysicsConstants& constants, int sign_ls = +1);

// Monte Carlo Ramsey scan: for every requested free-precession time the
// full pi/2 - gap - pi/2 sequence is run per atom with its own detuning,
// and the mean lower-state population (scaled by prepared_fraction) is
// recorded. extra_shift collects detuning contributions that are not the
// light shift (e.g. the quadratic Zeeman shift).
McBlocks mc_ramsey_blocks(const ThermalEnsemble& ensemble, double delta_rl,
                          const PulseSpec& pulse,
                          const std::vector<double>& times,
                          const RelaxationParams& relax, std::uint64_t seed,
                          const PhysicsConstants& constants,
                          double extra_shift = 0.0, int sign_ls = +1,
                          int threads = 1);

PopulationTrace mc_ramsey(const ThermalEnsemble& ensemble, double delta_rl,
                          const PulseSpec& pulse,
                          const std::vector<double>& times,
                          const RelaxationParams& relax, std::uint64_t seed,
                          const PhysicsConstants& constants,
                          double extra_shift = 0.0, int sign_ls = +1,
                          int threads = 1);

// Spin-echo scan: pi/2 at 0 and a refocusing pi pulse at t1. Sample times
// before t1 close the sequence with the second pi/2 directly (plain
// Ramsey); times past t1 include the pi pulse, so the modulation revives
// at 2 t1.
McBlocks mc_echo_blocks(const ThermalEnsemble& ensemble, double t1,
                        double delta_rl, const PulseSpec& pulse,
                        const std::vector<double>& times,
                        const RelaxationParams& relax, std::uint64_t seed,
                        const PhysicsConstants& constants,
                        double extra_shift = 0.0, int sign_ls = +1,
                        int threads = 1);

PopulationTrace mc_echo(const ThermalEnsemble& ensemble, double t1,
                        double delta_rl, const PulseSpec& pulse,
                        const std::vector<double>& times,
                        const RelaxationParams& relax, std::uint64_t seed,
                        const PhysicsConstants& constants,
                        double extra_shift = 0.0, int sign_ls = +1,
                        int threads = 1);

// Closed-form echo visibility decay V(t1) = exp(-t1 / t_echo), the echo
// modulation at 2 t1 over the Ramsey modulation at 0.
double echo_visibility(double t1, double t_echo);

// Fringe modulation amplitude of a trace near t_center, estimated by
// quadrature demodulation at the known fringe frequency over a window of
// n_periods full periods. Exact for a pure cosine sampled uniformly.
double fringe_amplitude(const PopulationTrace& trace, double delta,
                        double t_center, double n_periods);

PopulationTrace collapse_blocks(const McBlocks& blocks, double scale);

} // namespace trapsim::dephasing
