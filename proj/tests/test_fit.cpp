#include <doctest.h>

#include <cmath>

#include "bloch.hpp"
#include "dephasing.hpp"
#include "errors.hpp"
#include "fit.hpp"
#include "rng.hpp"
#include "test_helpers.hpp"

using namespace trapsim;
using namespace trapsim::fit;
using testutil::linspace;

namespace {

ModelSpec ramsey_spec() {
    ModelSpec s;
    s.kind = ModelKind::ramsey_eq4;
    return s;
}

std::map<std::string, double> ramsey_truth() {
    return {{"amplitude", 0.35},
            {"offset", 0.35},
            {"delta_rad_s", kTwoPi * 4814.0},
            {"phi_rad", 0.3},
            {"t2_star_s", 4.08e-3}};
}

std::vector<double> noisy_ramsey(const std::vector<double>& x, double sigma,
                                 std::uint64_t seed) {
    auto y = predict(ramsey_spec(), ramsey_truth(), x);
    SplitMix64 rng(seed);
    for (double& v : y) v += sigma * rng.normal();
    return y;
}

} // namespace

TEST_CASE("predict: model values") {
    const auto x0 = predict(ramsey_spec(), ramsey_truth(), {0.0});
    CHECK(x0[0] == doctest::Approx(0.35 * std::cos(0.3) + 0.35).epsilon(1e-12));

    ModelSpec decay;
    decay.kind = ModelKind::exp_decay;
    const auto v = predict(decay, {{"v0", 1.0}, {"tau_s", 68e-3}}, {68e-3});
    CHECK(v[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("predict: rabi_bloch with damping off equals the closed-form transfer") {
    ModelSpec spec;
    spec.kind = ModelKind::rabi_bloch;
    spec.fixed["t2_s"] = 1e6;
    spec.fixed["t1_s"] = 1e6;
    const double omega = kTwoPi * 995.0;
    const auto x = linspace(0.0, 4e-3, 81);
    const auto y = predict(spec, {{"omega_rad_s", omega}, {"amplitude", 1.0}}, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(y[i] - bloch::rabi_transfer(x[i], omega, 0.0)) < 1e-6);
    }
}

TEST_CASE("predict rejects out-of-bounds and missing parameters") {
    CHECK_THROWS_AS(predict(ramsey_spec(), {{"amplitude", -0.1}}, {0.0}), InvalidArgument);
    auto p = ramsey_truth();
    p["t2_star_s"] = -1.0;
    CHECK_THROWS_AS(predict(ramsey_spec(), p, {0.0}), InvalidArgument);
    CHECK_THROWS_AS(predict(ramsey_spec(), {}, {0.0}), InvalidArgument);
}

TEST_CASE("noise-free data recovers exact parameters") {
    const auto x = linspace(0.0, 12e-3, 120);
    const auto y = predict(ramsey_spec(), ramsey_truth(), x);
    const auto guess = initial_guess(ramsey_spec(), x, y);
    const auto fr = fit_curve(ramsey_spec(), x, y, guess);
    REQUIRE(fr.converged);
    for (const auto& [name, truth] : ramsey_truth()) {
        CHECK(std::abs(fr.value(name) - truth) <= 1e-6 * std::max(1.0, std::abs(truth)));
    }
    CHECK(fr.rss < 1e-16);
    CHECK(fr.residual_monotone);
}

TEST_CASE("synthetic Ramsey round trip at sigma = 0.02") {
    const auto x = linspace(0.0, 12e-3, 120);
    const auto y = noisy_ramsey(x, 0.02, 2024);
    const auto guess = initial_guess(ramsey_spec(), x, y);
    const auto fr = fit_curve(ramsey_spec(), x, y, guess);
    REQUIRE(fr.converged);
    CHECK(std::abs(fr.value("delta_rad_s") - kTwoPi * 4814.0) < kTwoPi * 5.0);
    CHECK(std::abs(fr.value("t2_star_s") - 4.08e-3) < 0.25e-3);
    CHECK(fr.sigma("delta_rad_s") > 0.0);
    CHECK(fr.sigma("delta_rad_s") < kTwoPi * 10.0);
}

TEST_CASE("synthetic Rabi trace recovers the drive frequency") {
    ModelSpec spec;
    spec.kind = ModelKind::rabi_bloch;
    const std::map<std::string, double> truth = {{"omega_rad_s", kTwoPi * 995.0},
                                                 {"t2_s", 3e-3},
                                                 {"t1_s", 65e-3},
                                                 {"amplitude", 1.0}};
    const auto x = linspace(0.0, 4e-3, 100);
    auto y = predict(spec, truth, x);
    SplitMix64 rng(7);
    for (double& v : y) v += 0.03 * rng.normal();

    auto guess = initial_guess(spec, x, y);
    const auto fr = fit_curve(spec, x, y, guess);
    REQUIRE(fr.converged);
    CHECK(std::abs(fr.value("omega_rad_s") - kTwoPi * 995.0) < kTwoPi * 5.0);
}

TEST_CASE("lineshape fit recovers center and width") {
    ModelSpec spec;
    spec.kind = ModelKind::lineshape;
    spec.fixed["pulse_s"] = 503e-6;
    const std::map<std::string, double> truth = {{"omega_rad_s", kTwoPi * 995.0},
                                                 {"delta0_rad_s", kTwoPi * 120.0},
                                                 {"amplitude", 0.51},
                                                 {"offset", 0.02}};
    const auto x = linspace(-kTwoPi * 5e3, kTwoPi * 5e3, 201);
    auto y = predict(spec, truth, x);
    SplitMix64 rng(17);
    for (double& v : y) v += 0.01 * rng.normal();

    auto guess = initial_guess(spec, x, y);
    const auto fr = fit_curve(spec, x, y, guess);
    REQUIRE(fr.converged);
    CHECK(std::abs(fr.value("delta0_rad_s") - kTwoPi * 120.0) < kTwoPi * 30.0);
    CHECK(std::abs(fr.value("omega_rad_s") - kTwoPi * 995.0) < kTwoPi * 30.0);
}

TEST_CASE("exponential decay fit inside the reference band") {
    ModelSpec spec;
    spec.kind = ModelKind::exp_decay;
    const auto x = linspace(2e-3, 40e-3, 12);
    std::vector<double> y;
    SplitMix64 rng(5);
    for (double t : x) y.push_back(std::exp(-t / 68e-3) + 0.01 * rng.normal());
    const auto fr = fit_curve(spec, x, y, initial_guess(spec, x, y));
    REQUIRE(fr.converged);
    CHECK(fr.value("tau_s") > 61e-3);
    CHECK(fr.value("tau_s") < 75e-3);
}

TEST_CASE("initial guesses land near the truth") {
    const auto x = linspace(0.0, 12e-3, 120);
    const auto y = noisy_ramsey(x, 0.02, 99);
    const auto g = initial_guess(ramsey_spec(), x, y);
    CHECK(std::abs(g.at("delta_rad_s") - kTwoPi * 4814.0) < 0.1 * kTwoPi * 4814.0);

    ModelSpec decay;
    decay.kind = ModelKind::exp_decay;
    std::vector<double> yd;
    for (double t : x) yd.push_back(2.0 * std::exp(-t / 3e-3));
    const auto gd = initial_guess(decay, x, yd);
    CHECK(gd.at("tau_s") == doctest::Approx(3e-3).epsilon(0.4));

    ModelSpec rabi;
    rabi.kind = ModelKind::rabi_bloch;
    std::vector<double> yr;
    for (double t : x) yr.push_back(0.5 * (1.0 - std::cos(kTwoPi * 995.0 * t)));
    const auto gr = initial_guess(rabi, x, yr);
    // within one spectral bin of the 12 ms window
    CHECK(std::abs(gr.at("omega_rad_s") - kTwoPi * 995.0) < kTwoPi / 12e-3);
}

TEST_CASE("degenerate and malformed data are rejected") {
    const auto x = linspace(0.0, 1e-3, 16);
    std::vector<double> flat(x.size(), 0.4);
    CHECK_THROWS_AS(initial_guess(ramsey_spec(), x, flat), InvalidArgument);

    std::vector<double> bad = flat;
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_curve(ramsey_spec(), x, bad, ramsey_truth()), InvalidArgument);

    CHECK_THROWS_AS(fit_curve(ramsey_spec(), {0.0, 1.0}, {0.0, 1.0}, ramsey_truth()),
                    InvalidArgument);
}

TEST_CASE("singular problems end with converged = false, not a crash") {
    // tau has no effect when every x is zero: the normal equations stay
    // singular no matter the damping
    ModelSpec spec;
    spec.kind = ModelKind::exp_decay;
    const std::vector<double> x(8, 0.0);
    const std::vector<double> y = {1.0, 1.1, 0.9, 1.05, 0.95, 1.0, 1.02, 0.98};
    const auto fr =
        fit_curve(spec, x, y, {{"v0", 0.8}, {"tau_s", 1e-3}}, FitOptions{.max_iterations = 40});
    CHECK_FALSE(fr.converged);
    CHECK(std::isinf(fr.sigma("tau_s")));
}

TEST_CASE("jacobian matches an independent forward difference") {
    const auto x = linspace(0.0, 12e-3, 40);
    const auto spec = ramsey_spec();
    auto p = ramsey_truth();
    const auto f0 = predict(spec, p, x);
    for (const char* name : {"amplitude", "delta_rad_s", "t2_star_s"}) {
        const double v = p.at(name);
        const double h = 1e-7 * std::max(std::abs(v), 1e-3);
        auto ph = p;
        ph[name] = v + h;
        const auto fh = predict(spec, ph, x);
        auto pm = p;
        pm[name] = v - h;
        const auto fm = predict(spec, pm, x);
        // central vs forward difference agree to first order
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double central = (fh[i] - fm[i]) / (2.0 * h);
            const double forward = (fh[i] - f0[i]) / h;
            if (std::abs(central) > 1e-6) {
                CHECK(std::abs(forward - central) / std::abs(central) < 1e-2);
            }
        }
    }
}

TEST_CASE("estimator calibration: reported sigma tracks the scatter") {
    const auto x = linspace(0.0, 12e-3, 120);
    std::vector<double> deltas;
    double sigma_reported = 0.0;
    const int runs = 40;
    for (int i = 0; i < runs; ++i) {
        const auto y = noisy_ramsey(x, 0.02, 1000 + static_cast<std::uint64_t>(i));
        const auto fr = fit_curve(ramsey_spec(), x, y, initial_guess(ramsey_spec(), x, y));
        REQUIRE(fr.converged);
        deltas.push_back(fr.value("delta_rad_s"));
        sigma_reported += fr.sigma("delta_rad_s");
    }
    sigma_reported /= runs;
    double mean = 0.0;
    for (double d : deltas) mean += d;
    mean /= runs;
    double var = 0.0;
    for (double d : deltas) var += (d - mean) * (d - mean);
    const double scatter = std::sqrt(var / (runs - 1));
    CHECK(scatter < 2.0 * sigma_reported);
    CHECK(scatter > 0.5 * sigma_reported);
}

TEST_CASE("model nesting: huge T2* fit matches the undamped fringe") {
    ModelSpec spec = ramsey_spec();
    spec.fixed["t2_star_s"] = 1e9;
    const auto x = linspace(0.0, 3e-3, 80);
    std::vector<double> y;
    for (double t : x) y.push_back(0.5 + 0.5 * std::cos(kTwoPi * 4814.0 * t));
    auto guess = initial_guess(spec, x, y);
    const auto fr = fit_curve(spec, x, y, guess);
    REQUIRE(fr.converged);
    CHECK(std::abs(fr.value("delta_rad_s") - kTwoPi * 4814.0) < kTwoPi * 1.0);
    CHECK(fr.value("amplitude") == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::abs(fr.value("phi_rad")) < 1e-2);
}

TEST_CASE("phi is reported in (-pi, pi]") {
    const auto x = linspace(0.0, 12e-3, 120);
    auto truth = ramsey_truth();
    truth["phi_rad"] = 0.3;
    const auto y = predict(ramsey_spec(), truth, x);
    auto init = truth;
    init["phi_rad"] = 0.3 + 3.0 * kTwoPi; // same signal, wrapped start
    const auto fr = fit_curve(ramsey_spec(), x, y, init);
    CHECK(fr.value("phi_rad") == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("bootstrap sigmas are reproducible and sane") {
    const auto x = linspace(0.0, 12e-3, 120);
    const auto y = noisy_ramsey(x, 0.02, 55);
    const auto fr = fit_curve(ramsey_spec(), x, y, initial_guess(ramsey_spec(), x, y));
    const auto s1 = bootstrap_sigmas(ramsey_spec(), x, y, fr, 20, 9);
    const auto s2 = bootstrap_sigmas(ramsey_spec(), x, y, fr, 20, 9);
    CHECK(s1.at("delta_rad_s") == s2.at("delta_rad_s"));
    CHECK(s1.at("delta_rad_s") > 0.2 * fr.sigma("delta_rad_s"));
    CHECK(s1.at("delta_rad_s") < 5.0 * fr.sigma("delta_rad_s"));
}
