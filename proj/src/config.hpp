#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "array.hpp"
#include "bloch.hpp"
#include "dephasing.hpp"
#include "detection.hpp"
#include "trap.hpp"

namespace trapsim::config {

// Sequence settings shared by the simulate commands. All frequencies are
// angular (rad/s); every key name carries its unit.
struct SequenceConfig {
    double omega_rabi = kTwoPi * 995.0; // rad/s
    double delta_rl = 0.0;              // rad/s, Raman detuning from omega_hfs
    double t_max = 12e-3;               // s
    int points = 120;
    double t1 = 7.5e-3;                 // s, echo pulse position
    bool ideal_pulses = false;
    double pulse_phase = 0.0;           // rad
    double echo_phase = 0.0;            // rad
    bool analytic = false;
    bool visibility_scan = false;
    double t1_max = 40e-3;              // s, visibility scan upper end
    int t1_points = 10;

    double lineshape_span_hz = 10e3;    // scan +- span
    double lineshape_pulse_s = 0.0;     // 0 -> pi/omega

    // Homogeneous relaxation during sequences. from_scattering derives
    // T1 = 1/Gamma_sc from the trap and sets T2 = 2 T1.
    double relax_t1_s = bloch::kInf;
    double relax_t2_prime_s = bloch::kInf;
    double relax_w_eq = 0.0;
    bool relax_from_scattering = false;
};

struct ExperimentConfig {
    trap::ShiftModel shift_model; // physics constants + Zeeman + shift sign
    trap::TrapParams trap;
    trap::FieldParams field;

    long ensemble_atoms = 10000;
    double ensemble_temperature_k = 15.6e-6;
    double prepared_fraction = 0.51;

    bool has_array = false;
    array::ArraySpec array;
    array::LoadingParams loading;

    bool has_detection = false;
    detection::DetectionParams detection;
    double frame_margin_m = 20e-6;
    double integration_radius_m = 6e-6;

    SequenceConfig sequence;
    bool echo_decay_in_total_time = false;

    std::uint64_t seed = 1;
    std::string output_dir = "out";

    dephasing::ThermalEnsemble ensemble() const;
    bloch::RelaxationParams relaxation() const;

    void validate() const;
};

// Parse + schema-check a config document. Unknown keys anywhere are
// rejected with their JSON path; parse errors report the source line.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Effective configuration re-serialized in canonical key order; the digest
// of this text identifies a run regardless of input formatting.
nlohmann::json to_json(const ExperimentConfig& config);
std::string config_digest(const ExperimentConfig& config);

// Deep-merge overrides (same schema) onto a parsed document, then re-parse.
ExperimentConfig apply_overrides(const ExperimentConfig& base,
                                 const nlohmann::json& overrides);

} // namespace trapsim::config
