#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "constants.hpp"

namespace trapsim::detection {

// State-selective readout chain: push-out survival, EMCCD frame synthesis
// and aperture integration back to per-site populations.
struct DetectionParams {
    double exposure_s = 300e-6;        // flagged invalid above 300 us
    double photons_per_atom = 50.0;    // collected photons per remaining atom
    double psf_sigma_m = 1.5e-6;
    double pixel_pitch_m = 1.0e-6;
    double em_gain = 20.0;             // >= 1
    double read_noise_counts = 10.0;   // rms, in output counts
    double baseline_counts = 100.0;    // camera bias level
    double pushout_leakage = 0.0;      // fraction of upper-state atoms surviving
    bool noise = true;

    void validate() const;
};

struct FrameGeometry {
    int width = 0;   // pixels
    int height = 0;  // pixels
    double origin_x_m = 0.0; // position of the low corner of pixel (0, 0)
    double origin_y_m = 0.0;
    double pixel_pitch_m = 1.0e-6;
};

// Synthesized camera frame. Pixel values are stored as doubles: with noise
// enabled every value is a non-negative integer; with noise disabled they
// are the exact expectations (needed for conservation checks).
struct Frame {
    FrameGeometry geometry;
    std::vector<double> counts; // row-major, size width*height
    std::uint64_t seed = 0;
    std::string params_digest;

    double& at(int ix, int iy) { return counts[static_cast<std::size_t>(iy) * geometry.width + ix]; }
    double at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * geometry.width + ix]; }
};

struct SiteAtoms {
    double x_m = 0.0;
    double y_m = 0.0;
    long atoms = 0;
};

struct SiteReadout {
    double counts = 0.0;     // background-subtracted integral
    double background = 0.0; // per-pixel background estimate
    double population = 0.0; // counts / reference counts, when normalized
};

struct ReadoutResult {
    std::vector<SiteReadout> sites;
};

// Atoms surviving the push-out pulse: all lower-state atoms plus a seeded
// binomial leakage of the upper-state ones.
long pushout_select(long n_f2, long n_f3, const DetectionParams& params,
                    std::uint64_t seed);

// Frame geometry covering all sites with the given margin, snapped to the
// pixel grid and centered on the site bounding box.
FrameGeometry frame_geometry_for(const std::vector<SiteAtoms>& sites,
                                 const DetectionParams& params, double margin_m);

// Render the fluorescence frame: per site a pixel-integrated Gaussian spot
// with total expected photons = atoms * photons_per_atom. Noise model:
// Poisson shot noise with the EM-register excess (variance doubled), times
// em_gain, plus Gaussian read noise on a baseline offset. Deterministic per
// (sites, params, seed) with per-pixel streams.
Frame render_frame(const std::vector<SiteAtoms>& sites, const FrameGeometry& geometry,
                   const DetectionParams& params, std::uint64_t seed);

// Aperture photometry: per-site sum of pixel counts within radius of the
// site center, minus the annulus-median background. Site disks must not
// overlap.
ReadoutResult integrate_sites(const Frame& frame,
                              const std::vector<std::pair<double, double>>& grid,
                              double radius_m, const DetectionParams& params);

// Populations as counts over per-site reference counts, clamped to
// [0, 1 + 3 sigma] with sigma from the shot-noise budget.
void normalize_readout(ReadoutResult& readout, const ReadoutResult& reference);

} // namespace trapsim::detection
