#include <doctest.h>

#include <cmath>

#include "array.hpp"
#include "errors.hpp"

using namespace trapsim;
using namespace trapsim::array;

namespace {

ArraySpec default_spec() { return ArraySpec{}; }

TrapParams base_trap() {
    TrapParams t;
    t.delta_eff = -kTwoPi * 13.04e12;
    t.depth_k = 1.2e-3;
    return t;
}

} // namespace

TEST_CASE("site grid geometry") {
    const auto grid = site_grid(default_spec());
    REQUIRE(grid.size() == 16);
    // corners at +-(3/2) pitch
    double max_x = 0.0, max_y = 0.0;
    for (const auto& [x, y] : grid) {
        max_x = std::max(max_x, std::abs(x));
        max_y = std::max(max_y, std::abs(y));
    }
    CHECK(max_x == doctest::Approx(81e-6).epsilon(1e-12));
    CHECK(max_y == doctest::Approx(81e-6).epsilon(1e-12));

    ArraySpec single;
    single.rows = 1;
    single.cols = 1;
    const auto one = site_grid(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0].first == 0.0);
    CHECK(one[0].second == 0.0);

    ArraySpec rect;
    rect.rows = 2;
    rect.cols = 3;
    const auto six = site_grid(rect);
    REQUIRE(six.size() == 6);
    double cx = 0.0, cy = 0.0;
    for (const auto& [x, y] : six) {
        cx += x;
        cy += y;
    }
    CHECK(std::abs(cx / 6.0) < 1e-15);
    CHECK(std::abs(cy / 6.0) < 1e-15);

    ArraySpec bad;
    bad.rows = 0;
    CHECK_THROWS_AS(site_grid(bad), InvalidArgument);
}

TEST_CASE("depth profile follows the illumination Gaussian") {
    const auto spec = default_spec();
    const auto depths = site_depths(spec);
    const auto grid = site_grid(spec);

    double corner = 1.0, inner = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        corner = std::min(corner, depths[i]);
        inner = std::max(inner, depths[i]);
    }
    // 2:1 depth span between center-adjacent and corner sites
    CHECK(corner == doctest::Approx(600e-6).epsilon(0.01));
    CHECK(inner < spec.center_depth_k);

    // point symmetry: mirrored sites share depths exactly
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double ri = grid[i].first * grid[i].first + grid[i].second * grid[i].second;
            const double rj = grid[j].first * grid[j].first + grid[j].second * grid[j].second;
            if (std::abs(ri - rj) < 1e-24) {
                CHECK(depths[i] == doctest::Approx(depths[j]).epsilon(1e-12));
            }
        }
    }

    // depth strictly decreases with radius
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double ri = std::hypot(grid[i].first, grid[i].second);
            const double rj = std::hypot(grid[j].first, grid[j].second);
            if (ri < rj - 1e-12) CHECK(depths[i] > depths[j]);
        }
    }

    // r = 0 gives the center depth exactly
    ArraySpec odd;
    odd.rows = 3;
    odd.cols = 3;
    const auto odd_depths = site_depths(odd);
    CHECK(odd_depths[4] == odd.center_depth_k);

    // flat illumination limit
    ArraySpec flat = spec;
    flat.illumination_waist_m = 1.0;
    for (double d : site_depths(flat)) {
        CHECK(d == doctest::Approx(flat.center_depth_k).epsilon(1e-6));
    }
}

TEST_CASE("register loading") {
    const auto spec = default_spec();
    LoadingParams loading;
    loading.poisson_jitter = false;
    const trap::FieldParams field;
    const trap::ShiftModel model;

    const auto sites = load_array(spec, loading, base_trap(), field, model, 1);
    REQUIRE(sites.size() == 16);

    long corner_atoms = 1000, deepest_atoms = 0;
    double min_shift = 1e12, max_shift = 0.0;
    double min_depth = 1.0, max_depth = 0.0;
    for (const auto& s : sites) {
        corner_atoms = std::min(corner_atoms, s.atom_number);
        deepest_atoms = std::max(deepest_atoms, s.atom_number);
        min_shift = std::min(min_shift, s.resonance_shift);
        max_shift = std::max(max_shift, s.resonance_shift);
        min_depth = std::min(min_depth, s.depth_k);
        max_depth = std::max(max_depth, s.depth_k);
        CHECK(s.temperature_k == loading.temperature_k);
        CHECK(s.depth_k <= spec.center_depth_k);
    }
    // corner population at least an order of magnitude below the
    // illumination-center count
    CHECK(corner_atoms <= 50);
    CHECK(10 * corner_atoms <= std::lround(loading.center_atoms));
    CHECK(deepest_atoms > 6 * corner_atoms);

    // shift span matches the light-shift slope times the actual depth span
    // (the deepest site of the even grid sits at 0.926 of the beam center)
    const double slope_hz_per_k =
        trap::differential_light_shift(base_trap(), model.constants) / kTwoPi /
        base_trap().depth_k;
    CHECK((max_shift - min_shift) / kTwoPi ==
          doctest::Approx(slope_hz_per_k * (max_depth - min_depth)).epsilon(1e-9));
    CHECK((max_shift - min_shift) / kTwoPi == doctest::Approx(2.479e3).epsilon(0.01));

    // every site shift lies on the affine line of the shift model
    for (const auto& s : sites) {
        trap::TrapParams site_trap = base_trap();
        site_trap.depth_k = s.depth_k;
        CHECK(s.resonance_shift ==
              doctest::Approx(trap::total_resonance_shift(site_trap, field, model))
                  .epsilon(1e-12));
    }

    // p = 0: uniform loading before jitter
    LoadingParams flat = loading;
    flat.exponent_p = 0.0;
    for (const auto& s : load_array(spec, flat, base_trap(), field, model, 1)) {
        CHECK(s.atom_number == 500);
    }
}

TEST_CASE("poisson loading jitter is seeded and centered") {
    const auto spec = default_spec();
    LoadingParams loading; // jitter on
    const trap::FieldParams field;
    const trap::ShiftModel model;

    const auto a = load_array(spec, loading, base_trap(), field, model, 9);
    const auto b = load_array(spec, loading, base_trap(), field, model, 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].atom_number == b[i].atom_number);
    }

    // mean over seeds approaches the deterministic expectation
    LoadingParams no_jitter = loading;
    no_jitter.poisson_jitter = false;
    const auto expected = load_array(spec, no_jitter, base_trap(), field, model, 0);
    double total = 0.0, total_expected = 0.0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const auto sites = load_array(spec, loading, base_trap(), field, model, seed);
        for (const auto& s : sites) total += static_cast<double>(s.atom_number);
    }
    for (const auto& s : expected) total_expected += static_cast<double>(s.atom_number);
    CHECK(total / 64.0 == doctest::Approx(total_expected).epsilon(0.02));
}

TEST_CASE("array spec validation") {
    ArraySpec too_tight;
    too_tight.pitch_m = 2e-6;
    CHECK_THROWS_AS(site_grid(too_tight), InvalidArgument);
    ArraySpec bad_eff;
    bad_eff.diffraction_efficiency = 0.0;
    CHECK_THROWS_AS(site_grid(bad_eff), InvalidArgument);
}
