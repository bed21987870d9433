#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "trap.hpp"

namespace trapsim::array {

using trap::FieldParams;
using trap::ShiftModel;
using trap::TrapParams;

// 2-D microlens trap register: grid geometry plus the Gaussian illumination
// profile that makes outer sites shallower than the center.
struct ArraySpec {
    int rows = 4;
    int cols = 4;
    double pitch_m = 54e-6;
    double site_waist_m = 1.7e-6;
    double illumination_waist_m = 194.6e-6; // 1/e^2 radius at the atom plane
    double center_depth_k = 1.2e-3;
    double diffraction_efficiency = 0.40;

    void validate() const;
};

// Loading model: site populations follow depth^p around the configured
// center count, optionally with seeded Poisson jitter.
struct LoadingParams {
    double exponent_p = 3.5;
    double center_atoms = 500.0;
    double temperature_k = 30e-6;
    bool poisson_jitter = true;

    void validate() const;
};

struct SiteState {
    int row = 0;
    int col = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double depth_k = 0.0;
    long atom_number = 0;
    double temperature_k = 0.0;
    double resonance_shift = 0.0; // rad/s
};

// Site centers on a regular grid centered at the origin.
std::vector<std::pair<double, double>> site_grid(const ArraySpec& spec);

// Per-site depth center_depth * exp(-2 r^2 / w_ill^2).
std::vector<double> site_depths(const ArraySpec& spec);

// Populate the register: per-site depth, atom number, temperature and
// resonance shift. base_trap supplies the wavelength / effective detuning
// shared by all sites; its depth is replaced per site.
std::vector<SiteState> load_array(const ArraySpec& spec, const LoadingParams& loading,
                                  const TrapParams& base_trap, const FieldParams& field,
                                  const ShiftModel& model, std::uint64_t seed);

} // namespace trapsim::array
