#include "array.hpp"

#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace trapsim::array {

void ArraySpec::validate() const {
    if (rows < 1 || cols < 1) {
        throw InvalidArgument("ArraySpec: rows and cols must be >= 1");
    }
    if (!is_finite(pitch_m) || !(pitch_m > 2.0 * site_waist_m)) {
        throw InvalidArgument("ArraySpec: pitch must exceed twice the site waist");
    }
    if (!(site_waist_m > 0.0) || !(illumination_waist_m > 0.0)) {
        throw InvalidArgument("ArraySpec: waists must be > 0");
    }
    if (!(center_depth_k > 0.0)) {
        throw InvalidArgument("ArraySpec: center_depth_k must be > 0");
    }
    if (!(diffraction_efficiency > 0.0 && diffraction_efficiency <= 1.0)) {
        throw InvalidArgument("ArraySpec: diffraction_efficiency must lie in (0, 1]");
    }
}

void LoadingParams::validate() const {
    if (!is_finite(exponent_p) || exponent_p < 0.0) {
        throw InvalidArgument("LoadingParams: exponent_p must be >= 0");
    }
    if (!is_finite(center_atoms) || center_atoms < 0.0) {
        throw InvalidArgument("LoadingParams: center_atoms must be >= 0");
    }
    if (!(temperature_k > 0.0)) {
        throw InvalidArgument("LoadingParams: temperature must be > 0");
    }
}

std::vector<std::pair<double, double>> site_grid(const ArraySpec& spec) {
    spec.validate();
    std::vector<std::pair<double, double>> grid;
    grid.reserve(static_cast<std::size_t>(spec.rows) * spec.cols);
    const double row0 = -0.5 * (spec.rows - 1);
    const double col0 = -0.5 * (spec.cols - 1);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            grid.emplace_back((col0 + c) * spec.pitch_m, (row0 + r) * spec.pitch_m);
        }
    }
    return grid;
}

std::vector<double> site_depths(const ArraySpec& spec) {
    const auto grid = site_grid(spec);
    const double w2 = spec.illumination_waist_m * spec.illumination_waist_m;
    std::vector<double> depths;
    depths.reserve(grid.size());
    for (const auto& [x, y] : grid) {
        depths.push_back(spec.center_depth_k * std::exp(-2.0 * (x * x + y * y) / w2));
    }
    return depths;
}

std::vector<SiteState> load_array(const ArraySpec& spec, const LoadingParams& loading,
                                  const TrapParams& base_trap, const FieldParams& field,
                                  const ShiftModel& model, std::uint64_t seed) {
    loading.validate();
    base_trap.validate();
    field.validate();
    model.validate();
    const auto grid = site_grid(spec);
    const auto depths = site_depths(spec);

    std::vector<SiteState> sites;
    sites.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SiteState s;
        s.row = static_cast<int>(i) / spec.cols;
        s.col = static_cast<int>(i) % spec.cols;
        s.x_m = grid[i].first;
        s.y_m = grid[i].second;
        s.depth_k = depths[i];
        s.temperature_k = loading.temperature_k;

        const double expected =
            loading.center_atoms *
            std::pow(depths[i] / spec.center_depth_k, loading.exponent_p);
        if (loading.poisson_jitter) {
            SplitMix64 rng(stream_key(seed, i, 0x10AD));
            s.atom_number = rng.poisson(expected);
        } else {
            s.atom_number = std::lround(expected);
        }

        TrapParams site_trap = base_trap;
        site_trap.depth_k = depths[i];
        site_trap.waist_m = spec.site_waist_m;
        s.resonance_shift = trap::total_resonance_shift(site_trap, field, model);
        sites.push_back(s);
    }
    return sites;
}

} // namespace trapsim::array
