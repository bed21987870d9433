#include "dephasing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace trapsim::dephasing {

using bloch::BlochState;
using bloch::PulseSegment;

void ThermalEnsemble::validate() const {
    trap.validate();
    if (n_atoms < 1) throw InvalidArgument("ThermalEnsemble: n_atoms must be >= 1");
    if (!is_finite(temperature_k) || !(temperature_k > 0.0)) {
        throw InvalidArgument("ThermalEnsemble: temperature must be > 0");
    }
    if (!(temperature_k < trap.depth_k)) {
        throw InvalidArgument("ThermalEnsemble: k_B T must stay below the trap depth");
    }
    if (!(prepared_fraction >= 0.0 && prepared_fraction <= 1.0)) {
        throw InvalidArgument("ThermalEnsemble: prepared_fraction must lie in [0, 1]");
    }
}

double envelope_alpha(double t, double t2_star) {
    if (!(t2_star > 0.0)) throw InvalidArgument("envelope_alpha: t2_star must be > 0");
    const double x = t / t2_star;
    return std::pow(1.0 + 0.95 * x * x, -1.5);
}

double phase_kappa(double t, double t2_star) {
    if (!(t2_star > 0.0)) throw InvalidArgument("phase_kappa: t2_star must be > 0");
    return -3.0 * std::atan(0.97 * t / t2_star);
}

double ramsey_analytic(double t, const RamseyParams& params) {
    return params.amplitude * envelope_alpha(t, params.t2_star) *
               std::cos(params.delta * t + phase_kappa(t, params.t2_star) + params.phi) +
           params.offset;
}

double temperature_from_t2star(double t2_star, const TrapParams& trap,
                               const PhysicsConstants& constants) {
    if (!(t2_star > 0.0)) {
        throw InvalidArgument("temperature_from_t2star: t2_star must be > 0");
    }
    trap.validate();
    constants.validate();
    return 1.94 * constants.hbar * std::abs(trap.delta_eff) /
           (constants.k_b * constants.omega_hfs * t2_star);
}

double t2star_from_temperature(double temperature_k, const TrapParams& trap,
                               const PhysicsConstants& constants) {
    if (!(temperature_k > 0.0)) {
        throw InvalidArgument("t2star_from_temperature: temperature must be > 0");
    }
    trap.validate();
    constants.validate();
    return 1.94 * constants.hbar * std::abs(trap.delta_eff) /
           (constants.k_b * constants.omega_hfs * temperature_k);
}

namespace {

double draw_energy(SplitMix64& rng, double kt, double u0) {
    // Gamma(shape 3): three exponential draws. Rejection keeps bound atoms
    // only; the tail above the depth is ~1e-6 at the temperatures in scope.
    for (;;) {
        const double e = kt * (rng.exponential() + rng.exponential() + rng.exponential());
        if (e < u0) return e;
    }
}

} // namespace

std::vector<double> sample_atom_energies(const ThermalEnsemble& ensemble,
                                         std::uint64_t seed) {
    ensemble.validate();
    const double kt = kBoltzmann * ensemble.temperature_k;
    const double u0 = kBoltzmann * ensemble.trap.depth_k;
    std::vector<double> energies(static_cast<std::size_t>(ensemble.n_atoms));
    for (long i = 0; i < ensemble.n_atoms; ++i) {
        SplitMix64 rng(stream_key(seed, static_cast<std::uint64_t>(i), 0x0A70));
        energies[static_cast<std::size_t>(i)] = draw_energy(rng, kt, u0);
    }
    return energies;
}

double atom_detuning(double energy_j, const TrapParams& trap, double base,
                     const PhysicsConstants& constants, int sign_ls) {
    trap.validate();
    constants.validate();
    if (!is_finite(energy_j) || energy_j < 0.0) {
        throw InvalidArgument("atom_detuning: energy must be finite and >= 0");
    }
    const double u0 = constants.k_b * trap.depth_k;
    if (energy_j > 0.0 && energy_j >= u0) {
        throw InvalidArgument("atom_detuning: energy at or above the trap depth");
    }
    return base + sign_ls * constants.omega_hfs / std::abs(trap.delta_eff) *
                      (u0 - 0.5 * energy_j) / constants.hbar;
}

double trap_bottom_detuning(const TrapParams& trap, double base,
                            const PhysicsConstants& constants, int sign_ls) {
    return atom_detuning(0.0, trap, base, constants, sign_ls);
}

double mean_detuning(const ThermalEnsemble& ensemble, double base,
                     const PhysicsConstants& constants, int sign_ls) {
    ensemble.validate();
    const double u0 = constants.k_b * ensemble.trap.depth_k;
    const double mean_e = 3.0 * constants.k_b * ensemble.temperature_k;
    return base + sign_ls * constants.omega_hfs / std::abs(ensemble.trap.delta_eff) *
                      (u0 - 0.5 * mean_e) / constants.hbar;
}

namespace {

struct AtomSequence {
    const PulseSpec& pulse;
    const RelaxationParams& relax;
    bool echo = false;
    double t1 = 0.0;

    double run(double delta, double gap) const {
        BlochState s{0.0, 0.0, 1.0};
        s = half_pi(s, delta, pulse.phase);
        if (!echo || gap < t1) {
            s = bloch::evolve_segment(s, PulseSegment::gap(gap, delta), relax);
        } else {
            s = bloch::evolve_segment(s, PulseSegment::gap(t1, delta), relax);
            s = pi_pulse(s, delta, pulse.echo_phase);
            s = bloch::evolve_segment(s, PulseSegment::gap(gap - t1, delta), relax);
        }
        s = half_pi(s, delta, pulse.phase);
        return s.p0();
    }

private:
    BlochState half_pi(const BlochState& s, double delta, double phase) const {
        if (pulse.ideal) return bloch::ideal_rotation(s, 0.5 * kPi, phase);
        return bloch::evolve_segment(
            s, PulseSegment::pulse(pulse.omega, 0.5 * kPi, delta, phase), relax);
    }

    BlochState pi_pulse(const BlochState& s, double delta, double phase) const {
        if (pulse.ideal) return bloch::ideal_rotation(s, kPi, phase);
        return bloch::evolve_segment(
            s, PulseSegment::pulse(pulse.omega, kPi, delta, phase), relax);
    }
};

McBlocks mc_run(const ThermalEnsemble& ensemble, double delta_rl,
                const AtomSequence& sequence, const std::vector<double>& times,
                std::uint64_t seed, const PhysicsConstants& constants,
                double extra_shift, int sign_ls, int threads) {
    ensemble.validate();
    constants.validate();
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InvalidArgument("mc trace: times must be strictly increasing");
        }
    }
    if (!times.empty() && times.front() < 0.0) {
        throw InvalidArgument("mc trace: times must be >= 0");
    }

    const double base = extra_shift - delta_rl;
    const double kt = kBoltzmann * ensemble.temperature_k;
    const double u0 = kBoltzmann * ensemble.trap.depth_k;

    const long n = ensemble.n_atoms;
    const std::size_t n_blocks =
        static_cast<std::size_t>((n + kMcBlockAtoms - 1) / kMcBlockAtoms);

    McBlocks out;
    out.times = times;
    out.block_atoms.resize(n_blocks);
    out.block_means.assign(n_blocks, std::vector<double>(times.size(), 0.0));

    parallel_for(n_blocks, threads, [&](std::size_t b) {
        const long first = static_cast<long>(b) * kMcBlockAtoms;
        const long last = std::min(n, first + kMcBlockAtoms);
        std::vector<double>& acc = out.block_means[b];
        for (long atom = first; atom < last; ++atom) {
            SplitMix64 rng(stream_key(seed, static_cast<std::uint64_t>(atom), 0x0A70));
            const double energy = draw_energy(rng, kt, u0);
            const double delta =
                atom_detuning(energy, ensemble.trap, base, constants, sign_ls);
            for (std::size_t k = 0; k < times.size(); ++k) {
                acc[k] += sequence.run(delta, times[k]);
            }
        }
        out.block_atoms[b] = last - first;
        const double inv = 1.0 / static_cast<double>(last - first);
        for (double& x : acc) x *= inv;
    });
    return out;
}

} // namespace

PopulationTrace collapse_blocks(const McBlocks& blocks, double scale) {
    PopulationTrace trace;
    trace.times = blocks.times;
    trace.p0.assign(blocks.times.size(), 0.0);
    long total = 0;
    for (long a : blocks.block_atoms) total += a;
    for (std::size_t b = 0; b < blocks.block_means.size(); ++b) {
        const double wgt = static_cast<double>(blocks.block_atoms[b]) /
                           static_cast<double>(total);
        for (std::size_t k = 0; k < trace.p0.size(); ++k) {
            trace.p0[k] += wgt * blocks.block_means[b][k];
        }
    }
    for (double& x : trace.p0) x *= scale;
    return trace;
}

McBlocks mc_ramsey_blocks(const ThermalEnsemble& ensemble, double delta_rl,
                          const PulseSpec& pulse, const std::vector<double>& times,
                          const RelaxationParams& relax, std::uint64_t seed,
                          const PhysicsConstants& constants, double extra_shift,
                          int sign_ls, int threads) {
    AtomSequence seq{pulse, relax, false, 0.0};
    return mc_run(ensemble, delta_rl, seq, times, seed, constants, extra_shift,
                  sign_ls, threads);
}

PopulationTrace mc_ramsey(const ThermalEnsemble& ensemble, double delta_rl,
                          const PulseSpec& pulse, const std::vector<double>& times,
                          const RelaxationParams& relax, std::uint64_t seed,
                          const PhysicsConstants& constants, double extra_shift,
                          int sign_ls, int threads) {
    return collapse_blocks(mc_ramsey_blocks(ensemble, delta_rl, pulse, times, relax,
                                            seed, constants, extra_shift, sign_ls,
                                            threads),
                           ensemble.prepared_fraction);
}

McBlocks mc_echo_blocks(const ThermalEnsemble& ensemble, double t1, double delta_rl,
                        const PulseSpec& pulse, const std::vector<double>& times,
                        const RelaxationParams& relax, std::uint64_t seed,
                        const PhysicsConstants& constants, double extra_shift,
                        int sign_ls, int threads) {
    if (!(t1 >= 0.0)) throw InvalidArgument("mc_echo: t1 must be >= 0");
    AtomSequence seq{pulse, relax, true, t1};
    return mc_run(ensemble, delta_rl, seq, times, seed, constants, extra_shift,
                  sign_ls, threads);
}

PopulationTrace mc_echo(const ThermalEnsemble& ensemble, double t1, double delta_rl,
                        const PulseSpec& pulse, const std::vector<double>& times,
                        const RelaxationParams& relax, std::uint64_t seed,
                        const PhysicsConstants& constants, double extra_shift,
                        int sign_ls, int threads) {
    return collapse_blocks(mc_echo_blocks(ensemble, t1, delta_rl, pulse, times, relax,
                                          seed, constants, extra_shift, sign_ls,
                                          threads),
                           ensemble.prepared_fraction);
}

double echo_visibility(double t1, double t_echo) {
    if (!(t1 >= 0.0)) throw InvalidArgument("echo_visibility: t1 must be >= 0");
    if (!(t_echo > 0.0)) throw InvalidArgument("echo_visibility: t_echo must be > 0");
    return std::exp(-t1 / t_echo);
}

double fringe_amplitude(const PopulationTrace& trace, double delta,
                        double t_center, double n_periods) {
    if (!(std::abs(delta) > 0.0)) {
        throw InvalidArgument("fringe_amplitude: need a nonzero fringe frequency");
    }
    const double half_window = 0.5 * n_periods * kTwoPi / std::abs(delta) * (1.0 + 1e-9);

    // Least-squares projection onto {cos dt, sin dt, 1} over the window.
    // Exact for a pure fringe on any sampling grid, unlike a plain
    // demodulation sum, which picks up O(1/N) endpoint bias.
    double scc = 0, scs = 0, css = 0, sc = 0, ss = 0, yc = 0, ys = 0, y1 = 0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double t = trace.times[k];
        if (std::abs(t - t_center) > half_window) continue;
        const double c = std::cos(delta * t);
        const double s = std::sin(delta * t);
        const double y = trace.p0[k];
        scc += c * c;
        scs += c * s;
        css += s * s;
        sc += c;
        ss += s;
        yc += y * c;
        ys += y * s;
        y1 += y;
        ++count;
    }
    if (count < 8) {
        throw InvalidArgument("fringe_amplitude: too few samples in the window");
    }
    const double n = static_cast<double>(count);
    // normal equations for [a, b, m]
    const double m11 = scc, m12 = scs, m13 = sc;
    const double m22 = css, m23 = ss, m33 = n;
    const double det = m11 * (m22 * m33 - m23 * m23) - m12 * (m12 * m33 - m23 * m13) +
                       m13 * (m12 * m23 - m22 * m13);
    if (!(std::abs(det) > 1e-12 * n * n * n)) {
        throw NumericError("fringe_amplitude: degenerate demodulation window");
    }
    const double a = (yc * (m22 * m33 - m23 * m23) - m12 * (ys * m33 - m23 * y1) +
                      m13 * (ys * m23 - m22 * y1)) /
                     det;
    const double b = (m11 * (ys * m33 - m23 * y1) - yc * (m12 * m33 - m13 * m23) +
                      m13 * (m12 * y1 - ys * m13)) /
                     det;
    return std::hypot(a, b);
}

} // namespace trapsim::dephasing
