#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "io.hpp"

namespace trapsim::config {

using nlohmann::json;

namespace {

// Walks one JSON object with an explicit key list; anything unknown is a
// hard error (configs fail closed).
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError(path_ + ": expected a JSON object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it != obj_.end() && !it->is_null();
    }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return fallback;
        if (!it->is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
        return it->get<double>();
    }

    long integer(const std::string& key, long fallback) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return fallback;
        if (!it->is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return it->get<long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return fallback;
        if (!it->is_boolean()) throw ConfigError(path_ + "." + key + ": expected a boolean");
        return it->get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return fallback;
        if (!it->is_string()) throw ConfigError(path_ + "." + key + ": expected a string");
        return it->get<std::string>();
    }

    const json* object(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return nullptr;
        if (!it->is_object()) throw ConfigError(path_ + "." + key + ": expected an object");
        return &*it;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (seen_.count(it.key()) == 0) {
                throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

double positive(double v, const char* what) {
    if (!is_finite(v) || !(v > 0.0)) {
        throw ConfigError(std::string(what) + " must be a positive finite number");
    }
    return v;
}

double time_or_inf(double v, const char* what) {
    if (std::isnan(v) || v <= 0.0) {
        throw ConfigError(std::string(what) + " must be > 0 (omit for no relaxation)");
    }
    return v;
}

void deep_merge(json& base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) {
        base = patch;
        return;
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
            deep_merge(base[it.key()], *it);
        } else {
            base[it.key()] = *it;
        }
    }
}

} // namespace

dephasing::ThermalEnsemble ExperimentConfig::ensemble() const {
    dephasing::ThermalEnsemble e;
    e.n_atoms = ensemble_atoms;
    e.temperature_k = ensemble_temperature_k;
    e.trap = trap;
    e.prepared_fraction = prepared_fraction;
    return e;
}

bloch::RelaxationParams ExperimentConfig::relaxation() const {
    bloch::RelaxationParams r;
    if (sequence.relax_from_scattering) {
        r.t1 = 1.0 / trap::scattering_rate(trap, shift_model.constants);
    } else {
        r.t1 = sequence.relax_t1_s;
    }
    // Scattering acts as pure population decay: T2 = 2 T1, combined with
    // any configured homogeneous dephasing channel.
    const double inv_t2 = (std::isinf(r.t1) ? 0.0 : 0.5 / r.t1) +
                          (std::isinf(sequence.relax_t2_prime_s)
                               ? 0.0
                               : 1.0 / sequence.relax_t2_prime_s);
    r.t2 = inv_t2 > 0.0 ? 1.0 / inv_t2 : bloch::kInf;
    r.t2_prime = sequence.relax_t2_prime_s;
    r.w_eq = sequence.relax_w_eq;
    return r;
}

void ExperimentConfig::validate() const {
    try {
        shift_model.validate();
        trap.validate();
        field.validate();
        if (has_array) {
            array.validate();
            loading.validate();
        }
        if (has_detection) detection.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (ensemble_atoms < 1) throw ConfigError("ensemble.n_atoms must be >= 1");
    if (!(ensemble_temperature_k > 0.0)) {
        throw ConfigError("ensemble.temperature_k must be > 0");
    }
    if (!(prepared_fraction >= 0.0 && prepared_fraction <= 1.0)) {
        throw ConfigError("ensemble.prepared_fraction must lie in [0, 1]");
    }
    if (sequence.points < 2) throw ConfigError("sequence.points must be >= 2");
    if (!(sequence.t_max > 0.0)) throw ConfigError("sequence.t_max_s must be > 0");
    if (!(sequence.omega_rabi > 0.0)) {
        throw ConfigError("sequence.omega_rabi_rad_s must be > 0");
    }
    if (!(sequence.t1 > 0.0)) throw ConfigError("sequence.t1_s must be > 0");
    if (sequence.visibility_scan) {
        if (!(sequence.t1_max > 0.0)) throw ConfigError("sequence.t1_max_s must be > 0");
        if (sequence.t1_points < 2) throw ConfigError("sequence.t1_points must be >= 2");
    }
    if (!(integration_radius_m > 0.0) || !(frame_margin_m > 0.0)) {
        throw ConfigError("detection frame margin and integration radius must be > 0");
    }
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Section root(doc, "config");

    if (const json* constants = root.object("constants")) {
        Section s(*constants, "config.constants");
        auto& pc = cfg.shift_model.constants;
        pc.omega_hfs = kTwoPi * positive(s.number("omega_hfs_hz", 3.0357e9),
                                         "constants.omega_hfs_hz");
        pc.gamma_natural = kTwoPi * positive(s.number("gamma_natural_hz", 6.07e6),
                                             "constants.gamma_natural_hz");
        pc.d1_hz = positive(s.number("d1_hz", pc.d1_hz), "constants.d1_hz");
        pc.d2_hz = positive(s.number("d2_hz", pc.d2_hz), "constants.d2_hz");
        cfg.shift_model.zeeman_coefficient_hz_per_t2 =
            positive(s.number("zeeman_coefficient_hz_per_t2",
                              cfg.shift_model.zeeman_coefficient_hz_per_t2),
                     "constants.zeeman_coefficient_hz_per_t2");
        const long sign = s.integer("light_shift_sign", cfg.shift_model.light_shift_sign);
        if (sign != 1 && sign != -1) {
            throw ConfigError("config.constants.light_shift_sign must be +1 or -1");
        }
        cfg.shift_model.light_shift_sign = static_cast<int>(sign);
        s.finish();
    }

    if (const json* trap_obj = root.object("trap")) {
        Section s(*trap_obj, "config.trap");
        cfg.trap.depth_k = s.number("depth_k", cfg.trap.depth_k);
        cfg.trap.waist_m = positive(s.number("waist_m", cfg.trap.waist_m), "trap.waist_m");
        cfg.trap.wavelength_m =
            positive(s.number("wavelength_m", cfg.trap.wavelength_m), "trap.wavelength_m");
        if (s.has("delta_eff_hz")) {
            const double hz = s.number("delta_eff_hz", 0.0);
            if (!(hz < 0.0)) throw ConfigError("config.trap.delta_eff_hz must be negative");
            cfg.trap.delta_eff = kTwoPi * hz;
        } else {
            cfg.trap.delta_eff =
                trap::effective_detuning(cfg.trap.wavelength_m, cfg.shift_model.constants);
        }
        if (!(cfg.trap.depth_k >= 0.0)) throw ConfigError("config.trap.depth_k must be >= 0");
        s.finish();
    }

    if (const json* field_obj = root.object("field")) {
        Section s(*field_obj, "config.field");
        cfg.field.bias_field_t = s.number("bias_field_t", cfg.field.bias_field_t);
        if (!(cfg.field.bias_field_t >= 0.0)) {
            throw ConfigError("config.field.bias_field_t must be >= 0");
        }
        s.finish();
    }

    if (const json* ens = root.object("ensemble")) {
        Section s(*ens, "config.ensemble");
        cfg.ensemble_atoms = s.integer("n_atoms", cfg.ensemble_atoms);
        cfg.ensemble_temperature_k =
            positive(s.number("temperature_k", cfg.ensemble_temperature_k),
                     "ensemble.temperature_k");
        cfg.prepared_fraction = s.number("prepared_fraction", cfg.prepared_fraction);
        s.finish();
    }

    if (const json* arr = root.object("array")) {
        cfg.has_array = true;
        Section s(*arr, "config.array");
        cfg.array.rows = static_cast<int>(s.integer("rows", cfg.array.rows));
        cfg.array.cols = static_cast<int>(s.integer("cols", cfg.array.cols));
        cfg.array.pitch_m = positive(s.number("pitch_m", cfg.array.pitch_m), "array.pitch_m");
        cfg.array.site_waist_m =
            positive(s.number("site_waist_m", cfg.array.site_waist_m), "array.site_waist_m");
        cfg.array.illumination_waist_m =
            positive(s.number("illumination_waist_m", cfg.array.illumination_waist_m),
                     "array.illumination_waist_m");
        cfg.array.center_depth_k =
            positive(s.number("center_depth_k", cfg.array.center_depth_k),
                     "array.center_depth_k");
        cfg.array.diffraction_efficiency =
            s.number("diffraction_efficiency", cfg.array.diffraction_efficiency);
        if (const json* load = s.object("loading")) {
            Section l(*load, "config.array.loading");
            cfg.loading.exponent_p = l.number("exponent_p", cfg.loading.exponent_p);
            cfg.loading.center_atoms = l.number("center_atoms", cfg.loading.center_atoms);
            cfg.loading.temperature_k =
                positive(l.number("temperature_k", cfg.loading.temperature_k),
                         "loading.temperature_k");
            cfg.loading.poisson_jitter = l.boolean("poisson_jitter", cfg.loading.poisson_jitter);
            l.finish();
        }
        s.finish();
    }

    if (const json* det = root.object("detection")) {
        cfg.has_detection = true;
        Section s(*det, "config.detection");
        auto& d = cfg.detection;
        d.exposure_s = s.number("exposure_s", d.exposure_s);
        d.photons_per_atom = s.number("photons_per_atom", d.photons_per_atom);
        d.psf_sigma_m = s.number("psf_sigma_m", d.psf_sigma_m);
        d.pixel_pitch_m = s.number("pixel_pitch_m", d.pixel_pitch_m);
        d.em_gain = s.number("em_gain", d.em_gain);
        d.read_noise_counts = s.number("read_noise_counts", d.read_noise_counts);
        d.baseline_counts = s.number("baseline_counts", d.baseline_counts);
        d.pushout_leakage = s.number("pushout_leakage", d.pushout_leakage);
        d.noise = s.boolean("noise", d.noise);
        cfg.frame_margin_m = s.number("frame_margin_m", cfg.frame_margin_m);
        cfg.integration_radius_m = s.number("integration_radius_m", cfg.integration_radius_m);
        s.finish();
    }

    if (const json* seq = root.object("sequence")) {
        Section s(*seq, "config.sequence");
        auto& q = cfg.sequence;
        q.omega_rabi = s.number("omega_rabi_rad_s", q.omega_rabi);
        q.delta_rl = s.number("delta_rl_rad_s", q.delta_rl);
        q.t_max = s.number("t_max_s", q.t_max);
        q.points = static_cast<int>(s.integer("points", q.points));
        q.t1 = s.number("t1_s", q.t1);
        q.ideal_pulses = s.boolean("ideal_pulses", q.ideal_pulses);
        q.pulse_phase = s.number("pulse_phase_rad", q.pulse_phase);
        q.echo_phase = s.number("echo_phase_rad", q.echo_phase);
        q.analytic = s.boolean("analytic", q.analytic);
        q.visibility_scan = s.boolean("visibility_scan", q.visibility_scan);
        q.t1_max = s.number("t1_max_s", q.t1_max);
        q.t1_points = static_cast<int>(s.integer("t1_points", q.t1_points));
        if (const json* ls = s.object("lineshape")) {
            Section l(*ls, "config.sequence.lineshape");
            q.lineshape_span_hz = positive(l.number("span_hz", q.lineshape_span_hz),
                                           "lineshape.span_hz");
            q.lineshape_pulse_s = l.number("pulse_s", q.lineshape_pulse_s);
            if (q.lineshape_pulse_s < 0.0) {
                throw ConfigError("config.sequence.lineshape.pulse_s must be >= 0");
            }
            l.finish();
        }
        if (const json* rel = s.object("relaxation")) {
            Section l(*rel, "config.sequence.relaxation");
            if (l.has("t1_s")) {
                q.relax_t1_s = time_or_inf(l.number("t1_s", 0.0), "relaxation.t1_s");
            }
            if (l.has("t2_prime_s")) {
                q.relax_t2_prime_s =
                    time_or_inf(l.number("t2_prime_s", 0.0), "relaxation.t2_prime_s");
            }
            q.relax_w_eq = l.number("w_eq", q.relax_w_eq);
            if (!(q.relax_w_eq >= -1.0 && q.relax_w_eq <= 1.0)) {
                throw ConfigError("config.sequence.relaxation.w_eq must lie in [-1, 1]");
            }
            q.relax_from_scattering = l.boolean("from_scattering", q.relax_from_scattering);
            l.finish();
        }
        s.finish();
    }

    cfg.echo_decay_in_total_time =
        root.boolean("echo_decay_in_total_time", cfg.echo_decay_in_total_time);
    const long seed = root.integer("seed", static_cast<long>(cfg.seed));
    if (seed < 0) throw ConfigError("config.seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output_dir = root.text("output_dir", cfg.output_dir);
    root.finish();

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config_text(buf.str(), path.string());
}

json to_json(const ExperimentConfig& cfg) {
    json doc;
    const auto& pc = cfg.shift_model.constants;
    doc["constants"] = {
        {"omega_hfs_hz", pc.omega_hfs / kTwoPi},
        {"gamma_natural_hz", pc.gamma_natural / kTwoPi},
        {"d1_hz", pc.d1_hz},
        {"d2_hz", pc.d2_hz},
        {"zeeman_coefficient_hz_per_t2", cfg.shift_model.zeeman_coefficient_hz_per_t2},
        {"light_shift_sign", cfg.shift_model.light_shift_sign},
    };
    doc["trap"] = {
        {"depth_k", cfg.trap.depth_k},
        {"waist_m", cfg.trap.waist_m},
        {"wavelength_m", cfg.trap.wavelength_m},
        {"delta_eff_hz", cfg.trap.delta_eff / kTwoPi},
    };
    doc["field"] = {{"bias_field_t", cfg.field.bias_field_t}};
    doc["ensemble"] = {
        {"n_atoms", cfg.ensemble_atoms},
        {"temperature_k", cfg.ensemble_temperature_k},
        {"prepared_fraction", cfg.prepared_fraction},
    };
    if (cfg.has_array) {
        doc["array"] = {
            {"rows", cfg.array.rows},
            {"cols", cfg.array.cols},
            {"pitch_m", cfg.array.pitch_m},
            {"site_waist_m", cfg.array.site_waist_m},
            {"illumination_waist_m", cfg.array.illumination_waist_m},
            {"center_depth_k", cfg.array.center_depth_k},
            {"diffraction_efficiency", cfg.array.diffraction_efficiency},
            {"loading",
             {{"exponent_p", cfg.loading.exponent_p},
              {"center_atoms", cfg.loading.center_atoms},
              {"temperature_k", cfg.loading.temperature_k},
              {"poisson_jitter", cfg.loading.poisson_jitter}}},
        };
    }
    if (cfg.has_detection) {
        doc["detection"] = {
            {"exposure_s", cfg.detection.exposure_s},
            {"photons_per_atom", cfg.detection.photons_per_atom},
            {"psf_sigma_m", cfg.detection.psf_sigma_m},
            {"pixel_pitch_m", cfg.detection.pixel_pitch_m},
            {"em_gain", cfg.detection.em_gain},
            {"read_noise_counts", cfg.detection.read_noise_counts},
            {"baseline_counts", cfg.detection.baseline_counts},
            {"pushout_leakage", cfg.detection.pushout_leakage},
            {"noise", cfg.detection.noise},
            {"frame_margin_m", cfg.frame_margin_m},
            {"integration_radius_m", cfg.integration_radius_m},
        };
    }
    const auto& q = cfg.sequence;
    json seq = {
        {"omega_rabi_rad_s", q.omega_rabi},
        {"delta_rl_rad_s", q.delta_rl},
        {"t_max_s", q.t_max},
        {"points", q.points},
        {"t1_s", q.t1},
        {"ideal_pulses", q.ideal_pulses},
        {"pulse_phase_rad", q.pulse_phase},
        {"echo_phase_rad", q.echo_phase},
        {"analytic", q.analytic},
        {"visibility_scan", q.visibility_scan},
        {"t1_max_s", q.t1_max},
        {"t1_points", q.t1_points},
        {"lineshape", {{"span_hz", q.lineshape_span_hz}, {"pulse_s", q.lineshape_pulse_s}}},
    };
    json relax = json::object();
    if (!std::isinf(q.relax_t1_s)) relax["t1_s"] = q.relax_t1_s;
    if (!std::isinf(q.relax_t2_prime_s)) relax["t2_prime_s"] = q.relax_t2_prime_s;
    relax["w_eq"] = q.relax_w_eq;
    relax["from_scattering"] = q.relax_from_scattering;
    seq["relaxation"] = relax;
    doc["sequence"] = seq;
    doc["echo_decay_in_total_time"] = cfg.echo_decay_in_total_time;
    doc["seed"] = cfg.seed;
    doc["output_dir"] = cfg.output_dir;
    return doc;
}

std::string config_digest(const ExperimentConfig& cfg) {
    return io::fnv1a64_hex(to_json(cfg).dump());
}

ExperimentConfig apply_overrides(const ExperimentConfig& base, const json& overrides) {
    json doc = to_json(base);
    deep_merge(doc, overrides);
    return parse_config(doc);
}

} // namespace trapsim::config
