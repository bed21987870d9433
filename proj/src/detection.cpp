#include "detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "rng.hpp"

namespace trapsim::detection {

void DetectionParams::validate() const {
    if (!is_finite(exposure_s) || !(exposure_s > 0.0) || exposure_s > 300e-6) {
        throw InvalidArgument(
            "DetectionParams: exposure must lie in (0, 300 us]; longer exposures leave "
            "the push-out validity window");
    }
    if (!is_finite(photons_per_atom) || !(photons_per_atom > 0.0)) {
        throw InvalidArgument("DetectionParams: photons_per_atom must be > 0");
    }
    if (!(psf_sigma_m > 0.0) || !(pixel_pitch_m > 0.0)) {
        throw InvalidArgument("DetectionParams: psf_sigma and pixel_pitch must be > 0");
    }
    if (!is_finite(em_gain) || em_gain < 1.0) {
        throw InvalidArgument("DetectionParams: em_gain must be >= 1");
    }
    if (!is_finite(read_noise_counts) || read_noise_counts < 0.0) {
        throw InvalidArgument("DetectionParams: read_noise must be >= 0");
    }
    if (!is_finite(baseline_counts) || baseline_counts < 0.0) {
        throw InvalidArgument("DetectionParams: baseline must be >= 0");
    }
    if (!(pushout_leakage >= 0.0 && pushout_leakage <= 1.0)) {
        throw InvalidArgument("DetectionParams: pushout_leakage must lie in [0, 1]");
    }
}

long pushout_select(long n_f2, long n_f3, const DetectionParams& params,
                    std::uint64_t seed) {
    params.validate();
    if (n_f2 < 0 || n_f3 < 0) {
        throw InvalidArgument("pushout_select: counts must be >= 0");
    }
    if (params.pushout_leakage == 0.0) return n_f2;
    SplitMix64 rng(stream_key(seed, 0x9055, static_cast<std::uint64_t>(n_f3)));
    return n_f2 + rng.binomial(n_f3, params.pushout_leakage);
}

FrameGeometry frame_geometry_for(const std::vector<SiteAtoms>& sites,
                                 const DetectionParams& params, double margin_m) {
    params.validate();
    if (sites.empty()) throw InvalidArgument("frame_geometry_for: no sites");
    double xmin = sites[0].x_m, xmax = sites[0].x_m;
    double ymin = sites[0].y_m, ymax = sites[0].y_m;
    for (const auto& s : sites) {
        xmin = std::min(xmin, s.x_m);
        xmax = std::max(xmax, s.x_m);
        ymin = std::min(ymin, s.y_m);
        ymax = std::max(ymax, s.y_m);
    }
    FrameGeometry g;
    g.pixel_pitch_m = params.pixel_pitch_m;
    g.width = static_cast<int>(std::ceil((xmax - xmin + 2.0 * margin_m) / g.pixel_pitch_m));
    g.height = static_cast<int>(std::ceil((ymax - ymin + 2.0 * margin_m) / g.pixel_pitch_m));
    g.width = std::max(g.width, 1);
    g.height = std::max(g.height, 1);
    g.origin_x_m = 0.5 * (xmin + xmax) - 0.5 * g.width * g.pixel_pitch_m;
    g.origin_y_m = 0.5 * (ymin + ymax) - 0.5 * g.height * g.pixel_pitch_m;
    return g;
}

namespace {

// Mass of a unit 1-D Gaussian centered at c inside pixel i (cumulative over
// the pixel edges). Summing over all pixels telescopes to the encircled
// energy of the covered interval, which the conservation contract relies on.
void gaussian_pixel_masses(double center, double sigma, double origin, double pitch,
                           int n, std::vector<double>& mass) {
    mass.resize(static_cast<std::size_t>(n));
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    double prev = 0.5 * std::erf((origin - center) * inv);
    for (int i = 0; i < n; ++i) {
        const double edge = origin + (i + 1) * pitch;
        const double cur = 0.5 * std::erf((edge - center) * inv);
        mass[static_cast<std::size_t>(i)] = cur - prev;
        prev = cur;
    }
}

} // namespace

Frame render_frame(const std::vector<SiteAtoms>& sites, const FrameGeometry& geometry,
                   const DetectionParams& params, std::uint64_t seed) {
    params.validate();
    if (geometry.width < 1 || geometry.height < 1 || !(geometry.pixel_pitch_m > 0.0)) {
        throw InvalidArgument("render_frame: invalid frame geometry");
    }
    const double x_lo = geometry.origin_x_m;
    const double x_hi = geometry.origin_x_m + geometry.width * geometry.pixel_pitch_m;
    const double y_lo = geometry.origin_y_m;
    const double y_hi = geometry.origin_y_m + geometry.height * geometry.pixel_pitch_m;
    for (const auto& s : sites) {
        if (s.atoms < 0) throw InvalidArgument("render_frame: negative atom number");
        if (s.x_m < x_lo || s.x_m > x_hi || s.y_m < y_lo || s.y_m > y_hi) {
            throw InvalidArgument("render_frame: site outside the field of view");
        }
    }

    const std::size_t npix =
        static_cast<std::size_t>(geometry.width) * static_cast<std::size_t>(geometry.height);
    std::vector<double> expected(npix, 0.0);

    std::vector<double> mx, my;
    for (const auto& s : sites) {
        if (s.atoms == 0) continue;
        const double photons = static_cast<double>(s.atoms) * params.photons_per_atom;
        gaussian_pixel_masses(s.x_m, params.psf_sigma_m, geometry.origin_x_m,
                              geometry.pixel_pitch_m, geometry.width, mx);
        gaussian_pixel_masses(s.y_m, params.psf_sigma_m, geometry.origin_y_m,
                              geometry.pixel_pitch_m, geometry.height, my);
        for (int iy = 0; iy < geometry.height; ++iy) {
            const double row = photons * my[static_cast<std::size_t>(iy)];
            if (row == 0.0) continue;
            double* dst = expected.data() + static_cast<std::size_t>(iy) * geometry.width;
            for (int ix = 0; ix < geometry.width; ++ix) {
                dst[ix] += row * mx[static_cast<std::size_t>(ix)];
            }
        }
    }

    Frame frame;
    frame.geometry = geometry;
    frame.seed = seed;
    frame.counts.resize(npix);

    if (!params.noise) {
        for (std::size_t i = 0; i < npix; ++i) {
            frame.counts[i] = params.baseline_counts + params.em_gain * expected[i];
        }
        return frame;
    }

    for (std::size_t i = 0; i < npix; ++i) {
        SplitMix64 rng(stream_key(seed, i, 0xF0A3));
        double photons = 0.0;
        if (expected[i] > 1e-12) {
            const double n = static_cast<double>(rng.poisson(expected[i]));
            // EM register excess: one extra shot-noise draw doubles the
            // variance of the photon term.
            photons = n <= 0.0 ? 0.0 : n + std::sqrt(n) * rng.normal();
        }
        double value = params.baseline_counts + params.em_gain * photons +
                       params.read_noise_counts * rng.normal();
        frame.counts[i] = std::max(0.0, std::round(value));
    }
    return frame;
}

ReadoutResult integrate_sites(const Frame& frame,
                              const std::vector<std::pair<double, double>>& grid,
                              double radius_m, const DetectionParams& params) {
    params.validate();
    if (grid.empty()) throw InvalidArgument("integrate_sites: no sites");
    if (!(radius_m > 0.0)) throw InvalidArgument("integrate_sites: radius must be > 0");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double dx = grid[i].first - grid[j].first;
            const double dy = grid[i].second - grid[j].second;
            if (std::hypot(dx, dy) <= 2.0 * radius_m) {
                throw InvalidArgument("integrate_sites: integration disks overlap");
            }
        }
    }

    const auto& g = frame.geometry;
    const double pitch = g.pixel_pitch_m;
    const double r_out = 1.6 * radius_m;

    ReadoutResult result;
    result.sites.reserve(grid.size());
    std::vector<double> annulus;
    for (const auto& [sx, sy] : grid) {
        const int ix_lo = std::max(0, static_cast<int>((sx - r_out - g.origin_x_m) / pitch) - 1);
        const int ix_hi = std::min(g.width - 1, static_cast<int>((sx + r_out - g.origin_x_m) / pitch) + 1);
        const int iy_lo = std::max(0, static_cast<int>((sy - r_out - g.origin_y_m) / pitch) - 1);
        const int iy_hi = std::min(g.height - 1, static_cast<int>((sy + r_out - g.origin_y_m) / pitch) + 1);

        double disk_sum = 0.0;
        long disk_npix = 0;
        annulus.clear();
        for (int iy = iy_lo; iy <= iy_hi; ++iy) {
            const double py = g.origin_y_m + (iy + 0.5) * pitch;
            for (int ix = ix_lo; ix <= ix_hi; ++ix) {
                const double px = g.origin_x_m + (ix + 0.5) * pitch;
                const double d = std::hypot(px - sx, py - sy);
                if (d <= radius_m) {
                    disk_sum += frame.at(ix, iy);
                    ++disk_npix;
                } else if (d <= r_out) {
                    annulus.push_back(frame.at(ix, iy));
                }
            }
        }
        SiteReadout site;
        if (!annulus.empty()) {
            auto mid = annulus.begin() + annulus.size() / 2;
            std::nth_element(annulus.begin(), mid, annulus.end());
            site.background = *mid;
        } else {
            site.background = 0.0;
        }
        site.counts = disk_sum - site.background * static_cast<double>(disk_npix);
        site.population = std::numeric_limits<double>::quiet_NaN();
        result.sites.push_back(site);
    }
    return result;
}

void normalize_readout(ReadoutResult& readout, const ReadoutResult& reference) {
    if (readout.sites.size() != reference.sites.size()) {
        throw InvalidArgument("normalize_readout: site count mismatch");
    }
    for (std::size_t i = 0; i < readout.sites.size(); ++i) {
        const double ref = reference.sites[i].counts;
        auto& site = readout.sites[i];
        if (!(ref > 0.0)) {
            site.population = 0.0;
            continue;
        }
        // Shot-noise budget on the ratio, with the EM excess factor.
        const double sigma = std::sqrt(2.0 / ref);
        site.population = std::clamp(site.counts / ref, 0.0, 1.0 + 3.0 * sigma);
    }
}

} // namespace trapsim::detection
