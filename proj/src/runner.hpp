#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "fit.hpp"

namespace trapsim::runner {

inline constexpr const char* kToolName = "trapsim";
inline constexpr const char* kToolVersion = "0.1.0";

enum class SimKind { rabi, ramsey, echo, lineshape };

SimKind sim_kind_from_name(const std::string& name);
std::string sim_kind_name(SimKind kind);

struct RunOptions {
    std::filesystem::path out_dir;
    int threads = 1;
};

struct Artifact {
    std::string path; // relative to out_dir
    std::string checksum;
};

struct Manifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    double wall_clock_s = 0.0;
    std::vector<Artifact> artifacts;
};

// Per-site outcome of the array pipeline, for callers that analyze the run
// beyond the emitted files.
struct ArraySiteSummary {
    int row = 0;
    int col = 0;
    long atoms = 0;
    double depth_k = 0.0;
    double resonance_shift = 0.0; // rad/s
    double reference_counts = 0.0;
    double fitted_delta = 0.0;   // rad/s
    double fitted_t2star = 0.0;  // s
    double fitted_amplitude = 0.0;
    double amplitude_counts = 0.0;
    bool fit_converged = false;
};

struct ArraySummary {
    std::vector<ArraySiteSummary> sites;
};

// simulate <kind>: writes <kind>.csv (plus manifest.json) into out_dir.
Manifest cmd_simulate(const config::ExperimentConfig& cfg, SimKind kind,
                      const RunOptions& opts);

// array-ramsey: site-resolved Ramsey traces through the full readout chain;
// writes site_r_c.csv per site, the frame stack, readout_reference.csv,
// fits.json and manifest.json.
Manifest cmd_array_ramsey(const config::ExperimentConfig& cfg, const RunOptions& opts,
                          ArraySummary* summary = nullptr);

// render: one fluorescence frame of the loaded register.
Manifest cmd_render(const config::ExperimentConfig& cfg, const RunOptions& opts);

struct FitCommand {
    std::string model;
    std::filesystem::path input_csv;
    std::map<std::string, double> init;
    std::map<std::string, double> fixed;
    int bootstrap = 0;
    std::uint64_t seed = 1;
};

struct FitOutcome {
    fit::FitResult result;
    std::filesystem::path json_path;
};

// fit <model>: fit a trace CSV, write fits.json.
FitOutcome cmd_fit(const FitCommand& cmd, const RunOptions& opts);

} // namespace trapsim::runner
