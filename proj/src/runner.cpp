#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "dephasing.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace trapsim::runner {

using config::ExperimentConfig;
using nlohmann::json;

namespace {

// Stream purposes for seed derivation.
enum : std::uint64_t {
    kStreamLoad = 0x01,
    kStreamMc = 0x02,
    kStreamProjection = 0x03,
    kStreamPushout = 0x04,
    kStreamFrame = 0x05,
    kStreamReference = 0x06,
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return xs;
}

struct Emitter {
    std::filesystem::path out_dir;
    std::vector<Artifact> artifacts;

    explicit Emitter(const std::filesystem::path& dir) : out_dir(dir) {
        std::filesystem::create_directories(dir);
    }

    std::filesystem::path path(const std::string& name) const { return out_dir / name; }

    void note(const std::string& name) {
        artifacts.push_back({name, io::checksum_file(out_dir / name)});
    }

    void trace(const std::string& name, const bloch::PopulationTrace& t,
               const std::string& x_name, const std::string& y_name) {
        io::write_trace_csv(out_dir / name, t, x_name, y_name);
        note(name);
    }

    void text(const std::string& name, const std::string& content) {
        io::write_text_file(out_dir / name, content);
        note(name);
    }
};

Manifest finish_manifest(Emitter& em, const ExperimentConfig& cfg,
                         const std::string& command,
                         std::chrono::steady_clock::time_point started) {
    Manifest m;
    m.command = command;
    m.config_digest = config::config_digest(cfg);
    m.seed = cfg.seed;
    m.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    m.artifacts = em.artifacts;

    json doc;
    doc["tool"] = kToolName;
    doc["version"] = kToolVersion;
    doc["command"] = command;
    doc["config_digest"] = m.config_digest;
    doc["seed"] = m.seed;
    doc["wall_clock_s"] = m.wall_clock_s;
    doc["artifacts"] = json::array();
    for (const auto& a : m.artifacts) {
        doc["artifacts"].push_back({{"path", a.path}, {"checksum", a.checksum}});
    }
    io::write_text_file(em.path("manifest.json"), doc.dump(2) + "\n");
    return m;
}

dephasing::PulseSpec pulse_spec(const ExperimentConfig& cfg) {
    dephasing::PulseSpec p;
    p.omega = cfg.sequence.omega_rabi;
    p.ideal = cfg.sequence.ideal_pulses;
    p.phase = cfg.sequence.pulse_phase;
    p.echo_phase = cfg.sequence.echo_phase;
    return p;
}

bloch::PopulationTrace rabi_trace(const ExperimentConfig& cfg) {
    const auto times = linspace(0.0, cfg.sequence.t_max, cfg.sequence.points);
    std::vector<bloch::PulseSegment> seq = {bloch::PulseSegment{
        cfg.sequence.t_max,
        {cfg.sequence.omega_rabi, cfg.sequence.delta_rl, cfg.sequence.pulse_phase},
        false,
        0.0}};
    auto trace = bloch::run_sequence({0.0, 0.0, 1.0}, seq, cfg.relaxation(), times);
    for (double& p : trace.p0) p *= cfg.prepared_fraction;
    return trace;
}

bloch::PopulationTrace ramsey_trace(const ExperimentConfig& cfg, int threads) {
    const auto times = linspace(0.0, cfg.sequence.t_max, cfg.sequence.points);
    const double zeeman = trap::quadratic_zeeman_shift(cfg.field, cfg.shift_model);
    const auto& consts = cfg.shift_model.constants;

    if (cfg.sequence.analytic) {
        dephasing::RamseyParams rp;
        rp.amplitude = 0.5 * cfg.prepared_fraction;
        rp.offset = 0.5 * cfg.prepared_fraction;
        rp.delta = dephasing::trap_bottom_detuning(cfg.trap, zeeman - cfg.sequence.delta_rl,
                                                   consts, cfg.shift_model.light_shift_sign);
        rp.phi = 0.0;
        rp.t2_star =
            dephasing::t2star_from_temperature(cfg.ensemble_temperature_k, cfg.trap, consts);
        bloch::PopulationTrace trace;
        trace.times = times;
        trace.p0.reserve(times.size());
        for (double t : times) trace.p0.push_back(dephasing::ramsey_analytic(t, rp));
        return trace;
    }

    return dephasing::mc_ramsey(cfg.ensemble(), cfg.sequence.delta_rl, pulse_spec(cfg),
                                times, cfg.relaxation(), stream_key(cfg.seed, kStreamMc),
                                consts, zeeman, cfg.shift_model.light_shift_sign, threads);
}

// Modulation amplitude of the MC signal around t_center, demodulated at the
// thermal-mean fringe frequency over two full periods.
double mc_modulation(const ExperimentConfig& cfg, bool echo, double t1, double t_center,
                     int threads) {
    const double zeeman = trap::quadratic_zeeman_shift(cfg.field, cfg.shift_model);
    const auto& consts = cfg.shift_model.constants;
    const double fringe =
        dephasing::mean_detuning(cfg.ensemble(), zeeman - cfg.sequence.delta_rl, consts,
                                 cfg.shift_model.light_shift_sign);
    if (!(std::abs(fringe) > 0.0)) {
        throw NumericError("modulation estimate needs a nonzero fringe frequency");
    }
    const double period = kTwoPi / std::abs(fringe);
    const double lo = std::max(0.0, t_center - 0.5 * period);
    const auto times = linspace(lo, lo + period, 65);
    bloch::PopulationTrace trace;
    if (echo) {
        trace = dephasing::mc_echo(cfg.ensemble(), t1, cfg.sequence.delta_rl,
                                   pulse_spec(cfg), times, cfg.relaxation(),
                                   stream_key(cfg.seed, kStreamMc), consts, zeeman,
                                   cfg.shift_model.light_shift_sign, threads);
    } else {
        trace = dephasing::mc_ramsey(cfg.ensemble(), cfg.sequence.delta_rl, pulse_spec(cfg),
                                     times, cfg.relaxation(),
                                     stream_key(cfg.seed, kStreamMc), consts, zeeman,
                                     cfg.shift_model.light_shift_sign, threads);
    }
    return dephasing::fringe_amplitude(trace, fringe, lo + 0.5 * period, 1.0);
}

bloch::PopulationTrace visibility_scan(const ExperimentConfig& cfg, int threads) {
    const auto t1s = linspace(cfg.sequence.t1_max / cfg.sequence.t1_points,
                              cfg.sequence.t1_max, cfg.sequence.t1_points);
    bloch::PopulationTrace scan;
    scan.times = t1s;
    scan.p0.resize(t1s.size());

    if (cfg.sequence.analytic) {
        const auto relax = cfg.relaxation();
        if (std::isinf(relax.t1)) {
            throw ConfigError("analytic visibility scan needs sequence.relaxation.t1_s "
                              "or from_scattering");
        }
        for (std::size_t i = 0; i < t1s.size(); ++i) {
            const double t_eff = cfg.echo_decay_in_total_time ? 2.0 * t1s[i] : t1s[i];
            scan.p0[i] = dephasing::echo_visibility(t_eff, relax.t1);
        }
        return scan;
    }

    const double ramsey_mod = mc_modulation(cfg, false, 0.0, 0.0, threads);
    for (std::size_t i = 0; i < t1s.size(); ++i) {
        const double echo_mod = mc_modulation(cfg, true, t1s[i], 2.0 * t1s[i], threads);
        scan.p0[i] = echo_mod / ramsey_mod;
    }
    return scan;
}

bloch::PopulationTrace lineshape_trace(const ExperimentConfig& cfg) {
    const double span = kTwoPi * cfg.sequence.lineshape_span_hz;
    const auto detunings = linspace(-span, span, cfg.sequence.points);
    const double pulse = cfg.sequence.lineshape_pulse_s > 0.0
                             ? cfg.sequence.lineshape_pulse_s
                             : kPi / cfg.sequence.omega_rabi;
    auto trace = bloch::lineshape_scan(pulse, cfg.sequence.omega_rabi, detunings);
    for (double& p : trace.p0) p *= cfg.prepared_fraction;
    return trace;
}

struct LoadedRegister {
    std::vector<array::SiteState> sites;
    std::vector<std::pair<double, double>> grid;
    std::vector<detection::SiteAtoms> full; // pre-pumping populations
    detection::FrameGeometry geometry;
};

LoadedRegister load_register(const ExperimentConfig& cfg) {
    if (!cfg.has_array || !cfg.has_detection) {
        throw ConfigError("this command needs both 'array' and 'detection' sections");
    }
    LoadedRegister reg;
    trap::TrapParams base = cfg.trap;
    base.waist_m = cfg.array.site_waist_m;
    reg.sites = array::load_array(cfg.array, cfg.loading, base, cfg.field, cfg.shift_model,
                                  stream_key(cfg.seed, kStreamLoad));
    reg.grid.reserve(reg.sites.size());
    reg.full.reserve(reg.sites.size());
    for (const auto& s : reg.sites) {
        reg.grid.emplace_back(s.x_m, s.y_m);
        reg.full.push_back({s.x_m, s.y_m, s.atom_number});
    }
    reg.geometry = detection::frame_geometry_for(reg.full, cfg.detection, cfg.frame_margin_m);
    return reg;
}

json frame_sidecar(const ExperimentConfig& cfg, const LoadedRegister& reg,
                   std::uint64_t frame_seed) {
    json doc;
    doc["seed"] = frame_seed;
    doc["params"] = {
        {"exposure_s", cfg.detection.exposure_s},
        {"photons_per_atom", cfg.detection.photons_per_atom},
        {"psf_sigma_m", cfg.detection.psf_sigma_m},
        {"pixel_pitch_m", cfg.detection.pixel_pitch_m},
        {"em_gain", cfg.detection.em_gain},
        {"read_noise_counts", cfg.detection.read_noise_counts},
        {"baseline_counts", cfg.detection.baseline_counts},
        {"noise", cfg.detection.noise},
    };
    doc["geometry"] = {
        {"width", reg.geometry.width},
        {"height", reg.geometry.height},
        {"origin_x_m", reg.geometry.origin_x_m},
        {"origin_y_m", reg.geometry.origin_y_m},
        {"pixel_pitch_m", reg.geometry.pixel_pitch_m},
    };
    doc["grid"] = json::array();
    for (const auto& s : reg.sites) {
        doc["grid"].push_back({{"row", s.row},
                               {"col", s.col},
                               {"x_m", s.x_m},
                               {"y_m", s.y_m},
                               {"depth_k", s.depth_k},
                               {"atoms", s.atom_number},
                               {"shift_hz", s.resonance_shift / kTwoPi}});
    }
    return doc;
}

std::string site_csv_name(int row, int col) {
    return "site_" + std::to_string(row) + "_" + std::to_string(col) + ".csv";
}

std::string readout_csv(const std::vector<array::SiteState>& sites,
                        const detection::ReadoutResult& readout) {
    std::string out = "row,col,counts,population\n";
    for (std::size_t i = 0; i < sites.size(); ++i) {
        out += std::to_string(sites[i].row) + "," + std::to_string(sites[i].col) + "," +
               io::format_value(readout.sites[i].counts) + "," +
               io::format_value(readout.sites[i].population) + "\n";
    }
    return out;
}

json fit_result_json(const std::string& model, const fit::FitResult& r) {
    json params = json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        params[r.names[i]] = {{"value", r.values[i]}, {"sigma", r.sigmas[i]}};
    }
    return {{"model", model},
            {"params", params},
            {"rss", r.rss},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

} // namespace

SimKind sim_kind_from_name(const std::string& name) {
    if (name == "rabi") return SimKind::rabi;
    if (name == "ramsey") return SimKind::ramsey;
    if (name == "echo") return SimKind::echo;
    if (name == "lineshape") return SimKind::lineshape;
    throw InvalidArgument("unknown simulation kind '" + name + "'");
}

std::string sim_kind_name(SimKind kind) {
    switch (kind) {
        case SimKind::rabi: return "rabi";
        case SimKind::ramsey: return "ramsey";
        case SimKind::echo: return "echo";
        case SimKind::lineshape: return "lineshape";
    }
    return "?";
}

Manifest cmd_simulate(const ExperimentConfig& cfg, SimKind kind, const RunOptions& opts) {
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    Emitter em(opts.out_dir);
    const int threads = std::max(1, opts.threads);

    switch (kind) {
        case SimKind::rabi:
            em.trace("rabi.csv", rabi_trace(cfg), "time_s", "p0");
            break;
        case SimKind::ramsey:
            em.trace("ramsey.csv", ramsey_trace(cfg, threads), "time_s", "p0");
            break;
        case SimKind::echo: {
            if (cfg.sequence.visibility_scan) {
                em.trace("echo_visibility.csv", visibility_scan(cfg, threads), "t1_s",
                         "visibility");
            } else {
                if (cfg.sequence.analytic) {
                    throw ConfigError("analytic echo traces are not available; use "
                                      "visibility_scan or the Monte Carlo path");
                }
                const auto times = linspace(0.0, cfg.sequence.t_max, cfg.sequence.points);
                const double zeeman =
                    trap::quadratic_zeeman_shift(cfg.field, cfg.shift_model);
                auto trace = dephasing::mc_echo(
                    cfg.ensemble(), cfg.sequence.t1, cfg.sequence.delta_rl, pulse_spec(cfg),
                    times, cfg.relaxation(), stream_key(cfg.seed, kStreamMc),
                    cfg.shift_model.constants, zeeman, cfg.shift_model.light_shift_sign,
                    threads);
                em.trace("echo.csv", trace, "time_s", "p0");
            }
            break;
        }
        case SimKind::lineshape:
            em.trace("lineshape.csv", lineshape_trace(cfg), "x", "p0");
            break;
    }
    return finish_manifest(em, cfg, "simulate " + sim_kind_name(kind), started);
}

Manifest cmd_array_ramsey(const ExperimentConfig& cfg, const RunOptions& opts,
                          ArraySummary* summary) {
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    Emitter em(opts.out_dir);
    const int threads = std::max(1, opts.threads);

    LoadedRegister reg = load_register(cfg);
    const std::size_t n_sites = reg.sites.size();
    const auto times = linspace(0.0, cfg.sequence.t_max, cfg.sequence.points);
    const double zeeman = trap::quadratic_zeeman_shift(cfg.field, cfg.shift_model);
    const auto& consts = cfg.shift_model.constants;
    const auto relax = cfg.relaxation();
    const auto pulse = pulse_spec(cfg);

    // Reference frame: all loaded atoms, before optical pumping.
    const std::uint64_t ref_seed = stream_key(cfg.seed, kStreamReference);
    const auto ref_frame =
        detection::render_frame(reg.full, reg.geometry, cfg.detection, ref_seed);
    auto ref_readout =
        detection::integrate_sites(ref_frame, reg.grid, cfg.integration_radius_m,
                                   cfg.detection);
    io::write_pgm16(em.path("reference.pgm"), ref_frame);
    em.note("reference.pgm");
    em.text("reference.json", frame_sidecar(cfg, reg, ref_seed).dump(2) + "\n");
    {
        auto self_norm = ref_readout;
        detection::normalize_readout(self_norm, ref_readout);
        em.text("readout_reference.csv", readout_csv(reg.sites, self_norm));
    }

    // Site-level Monte Carlo traces (mean lower-state fraction, scaled by
    // the prepared fraction), computed per site over all sample times.
    std::vector<bloch::PopulationTrace> mc_traces(n_sites);
    parallel_for(n_sites, threads, [&](std::size_t i) {
        const auto& site = reg.sites[i];
        if (site.atom_number < 1) {
            mc_traces[i].times = times;
            mc_traces[i].p0.assign(times.size(), 0.0);
            return;
        }
        dephasing::ThermalEnsemble ens;
        ens.n_atoms = site.atom_number;
        ens.temperature_k = site.temperature_k;
        ens.trap = cfg.trap;
        ens.trap.depth_k = site.depth_k;
        ens.trap.waist_m = cfg.array.site_waist_m;
        ens.prepared_fraction = cfg.prepared_fraction;
        mc_traces[i] = dephasing::mc_ramsey(ens, cfg.sequence.delta_rl, pulse, times, relax,
                                            stream_key(cfg.seed, kStreamMc, i), consts,
                                            zeeman, cfg.shift_model.light_shift_sign, 1);
    });

    // Per sample time: project atoms onto the qubit basis, push out the
    // upper state, image, and integrate the sites.
    std::vector<bloch::PopulationTrace> site_pop(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i) {
        site_pop[i].times = times;
        site_pop[i].p0.resize(times.size());
    }
    std::vector<std::vector<long>> survivors(times.size(), std::vector<long>(n_sites, 0));
    parallel_for(times.size(), threads, [&](std::size_t k) {
        for (std::size_t i = 0; i < n_sites; ++i) {
            const long n = reg.sites[i].atom_number;
            if (n < 1) continue;
            const double p = std::clamp(mc_traces[i].p0[k], 0.0, 1.0);
            SplitMix64 proj(stream_key(cfg.seed, kStreamProjection, i, k));
            const long n_f2 = proj.binomial(n, p);
            survivors[k][i] = detection::pushout_select(
                n_f2, n - n_f2, cfg.detection, stream_key(cfg.seed, kStreamPushout, i, k));
        }
    });

    std::vector<std::string> frame_names(times.size());
    json stack_meta = frame_sidecar(cfg, reg, 0);
    stack_meta.erase("seed");
    stack_meta["frames"] = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<detection::SiteAtoms> imaged = reg.full;
        for (std::size_t i = 0; i < n_sites; ++i) imaged[i].atoms = survivors[k][i];
        const std::uint64_t frame_seed = stream_key(cfg.seed, kStreamFrame, k);
        const auto frame =
            detection::render_frame(imaged, reg.geometry, cfg.detection, frame_seed);
        auto readout = detection::integrate_sites(frame, reg.grid,
                                                  cfg.integration_radius_m, cfg.detection);
        detection::normalize_readout(readout, ref_readout);
        for (std::size_t i = 0; i < n_sites; ++i) {
            site_pop[i].p0[k] = readout.sites[i].population;
        }
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.pgm", k);
        frame_names[k] = name;
        io::write_pgm16(em.path(name), frame);
        em.note(name);
        stack_meta["frames"].push_back(
            {{"path", name}, {"time_s", times[k]}, {"seed", frame_seed}});
    }
    em.text("frames.json", stack_meta.dump(2) + "\n");

    // Per-site traces and fits.
    json fits = json::array();
    if (summary) summary->sites.clear();
    for (std::size_t i = 0; i < n_sites; ++i) {
        const auto& site = reg.sites[i];
        em.trace(site_csv_name(site.row, site.col), site_pop[i], "time_s", "p0");

        fit::ModelSpec spec;
        spec.kind = fit::ModelKind::ramsey_eq4;
        fit::FitResult fr;
        bool fitted = false;
        try {
            const auto guess = fit::initial_guess(spec, site_pop[i].times, site_pop[i].p0);
            fr = fit::fit_curve(spec, site_pop[i].times, site_pop[i].p0, guess);
            fitted = true;
        } catch (const InvalidArgument&) {
            // empty or featureless site: leave the fit out
        }

        json entry = {{"row", site.row},
                      {"col", site.col},
                      {"atoms", site.atom_number},
                      {"depth_k", site.depth_k},
                      {"shift_hz", site.resonance_shift / kTwoPi},
                      {"reference_counts", ref_readout.sites[i].counts}};
        ArraySiteSummary ss;
        ss.row = site.row;
        ss.col = site.col;
        ss.atoms = site.atom_number;
        ss.depth_k = site.depth_k;
        ss.resonance_shift = site.resonance_shift;
        ss.reference_counts = ref_readout.sites[i].counts;
        if (fitted) {
            entry["fit"] = fit_result_json("ramsey_eq4", fr);
            const double amp = fr.value("amplitude");
            entry["amplitude_counts"] = amp * ref_readout.sites[i].counts;
            ss.fitted_delta = fr.value("delta_rad_s");
            ss.fitted_t2star = fr.value("t2_star_s");
            ss.fitted_amplitude = amp;
            ss.amplitude_counts = amp * ref_readout.sites[i].counts;
            ss.fit_converged = fr.converged;
        }
        fits.push_back(entry);
        if (summary) summary->sites.push_back(ss);
    }
    em.text("fits.json", fits.dump(2) + "\n");

    return finish_manifest(em, cfg, "array-ramsey", started);
}

Manifest cmd_render(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    Emitter em(opts.out_dir);

    LoadedRegister reg = load_register(cfg);
    const std::uint64_t frame_seed = stream_key(cfg.seed, kStreamFrame);
    const auto frame =
        detection::render_frame(reg.full, reg.geometry, cfg.detection, frame_seed);
    io::write_pgm16(em.path("frame.pgm"), frame);
    em.note("frame.pgm");
    em.text("frame.json", frame_sidecar(cfg, reg, frame_seed).dump(2) + "\n");
    return finish_manifest(em, cfg, "render", started);
}

FitOutcome cmd_fit(const FitCommand& cmd, const RunOptions& opts) {
    const auto trace = io::read_trace_csv(cmd.input_csv);

    fit::ModelSpec spec;
    spec.kind = fit::model_kind_from_name(cmd.model);
    for (const auto& [k, v] : cmd.fixed) spec.fixed[k] = v;

    auto init = fit::initial_guess(spec, trace.times, trace.p0);
    for (const auto& [k, v] : cmd.init) init[k] = v;

    const auto result = fit::fit_curve(spec, trace.times, trace.p0, init);

    json doc = fit_result_json(fit::model_kind_name(spec.kind), result);
    if (cmd.bootstrap > 0) {
        const auto sig = fit::bootstrap_sigmas(spec, trace.times, trace.p0, result,
                                               cmd.bootstrap, cmd.seed);
        json bs = json::object();
        for (const auto& [k, v] : sig) bs[k] = v;
        doc["bootstrap_sigma"] = bs;
        doc["bootstrap_replicas"] = cmd.bootstrap;
    }

    std::filesystem::create_directories(opts.out_dir);
    FitOutcome outcome;
    outcome.result = result;
    outcome.json_path = opts.out_dir / "fits.json";
    io::write_text_file(outcome.json_path, doc.dump(2) + "\n");
    return outcome;
}

} // namespace trapsim::runner
