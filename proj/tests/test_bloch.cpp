#include <doctest.h>

#include <cmath>

#include "bloch.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace trapsim;
using namespace trapsim::bloch;

namespace {

double norm2(const BlochState& s) { return s.norm2(); }

BlochState evolve_drive(const BlochState& s, double omega, double delta, double t,
                        const RelaxationParams& relax = RelaxationParams::none(),
                        double max_step = 1e-5) {
    return evolve_segment(s, PulseSegment{t, {omega, delta, 0.0}, false, 0.0}, relax,
                          max_step);
}

} // namespace

TEST_CASE("pi pulse inverts the prepared state") {
    const double omega = kTwoPi * 995.0;
    const double t_pi = kPi / omega;
    const auto out = evolve_drive({0, 0, 1}, omega, 0.0, t_pi);
    CHECK(std::abs(out.u) < 1e-8);
    CHECK(std::abs(out.v) < 1e-8);
    CHECK(std::abs(out.w + 1.0) < 1e-8);

    // the pi time for this drive strength
    CHECK(t_pi == doctest::Approx(502.5e-6).epsilon(1e-6));
    CHECK(t_pi > 500e-6);
    CHECK(t_pi < 506e-6);
}

TEST_CASE("resonant pulse matches the exact rotation of (v, w) about u") {
    const double omega = kTwoPi * 1300.0;
    const BlochState in{0.2, -0.4, 0.6};
    for (double angle : {0.3, 1.1, 2.9, 5.0}) {
        const auto out = evolve_drive(in, omega, 0.0, angle / omega);
        const double c = std::cos(angle), s = std::sin(angle);
        CHECK(std::abs(out.u - in.u) < 1e-8);
        CHECK(std::abs(out.v - (in.v * c - in.w * s)) < 1e-8);
        CHECK(std::abs(out.w - (in.w * c + in.v * s)) < 1e-8);
    }
}

TEST_CASE("detuned pulse transfer at delta = omega") {
    const double omega = kTwoPi * 995.0;
    const double t = kPi / omega;
    // closed form (omega^2/W^2) sin^2(W t / 2) with W = sqrt(2) omega
    const double expected = 0.5 * std::pow(std::sin(kPi / std::sqrt(2.0)), 2);
    const auto out = evolve_drive({0, 0, 1}, omega, omega, t);
    CHECK(out.p0() == doctest::Approx(expected).epsilon(1e-7));
    CHECK(rabi_transfer(t, omega, omega) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(expected - 0.3165) < 1e-4);
}

TEST_CASE("rabi_transfer agrees with the integrated equations on random inputs") {
    SplitMix64 rng(20240501);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double omega = kTwoPi * (100.0 + 4900.0 * rng.uniform01());
        const double delta = kTwoPi * 5000.0 * (2.0 * rng.uniform01() - 1.0);
        const double w_gen = std::hypot(omega, delta);
        const double t = (0.1 + 15.0 * rng.uniform01()) * kTwoPi / w_gen;
        const auto out = evolve_drive({0, 0, 1}, omega, delta, t);
        worst = std::max(worst, std::abs(out.p0() - rabi_transfer(t, omega, delta)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("free precession uses the exact propagator") {
    RelaxationParams relax;
    relax.t1 = 30e-3;
    relax.t2 = 8e-3;
    const double delta = kTwoPi * 4814.0;
    const double t = 3.7e-3;
    const BlochState in{0.8, 0.1, -0.3};
    const auto out =
        evolve_segment(in, PulseSegment::gap(t, delta), relax, 1.0);
    const double e2 = std::exp(-t / relax.t2);
    const double c = std::cos(delta * t), s = std::sin(delta * t);
    CHECK(out.u == doctest::Approx(e2 * (in.u * c - in.v * s)).epsilon(1e-12));
    CHECK(out.v == doctest::Approx(e2 * (in.u * s + in.v * c)).epsilon(1e-12));
    CHECK(out.w == doctest::Approx(in.w * std::exp(-t / relax.t1)).epsilon(1e-12));
}

TEST_CASE("inversion relaxes toward w_eq") {
    RelaxationParams relax;
    relax.t1 = 5e-3;
    relax.w_eq = -0.25;
    const auto out = evolve_segment({0, 0, 1}, PulseSegment::gap(50e-3, 0.0), relax, 1.0);
    CHECK(out.w == doctest::Approx(-0.25 + 1.25 * std::exp(-10.0)).epsilon(1e-10));
}

TEST_CASE("norm is conserved without relaxation") {
    const double omega = kTwoPi * 1000.0;
    // 1e4 steps at the internal 512-per-cycle resolution
    const double t = 1e4 * (kTwoPi / omega / 512.0);
    const auto out = evolve_drive({0, 0, 1}, omega, 0.3 * omega, t);
    CHECK(std::abs(norm2(out) - 1.0) < 1e-9);
}

TEST_CASE("norm contracts under relaxation with w_eq = 0") {
    RelaxationParams relax;
    relax.t1 = 4e-3;
    relax.t2 = 2e-3;
    BlochState s{0.0, 0.0, 1.0};
    double prev = norm2(s);
    const double omega = kTwoPi * 800.0;
    for (int i = 0; i < 40; ++i) {
        s = evolve_drive(s, omega, 0.0, 0.25e-3, relax);
        const double cur = norm2(s);
        CHECK(cur <= prev + 1e-9);
        prev = cur;
    }
}

TEST_CASE("pulse-area composition: two segments equal their union") {
    RelaxationParams relax;
    relax.t1 = 9e-3;
    relax.t2 = 6e-3;
    const double omega = kTwoPi * 995.0;
    const double delta = kTwoPi * 600.0;
    const double ta = 0.83e-3, tb = 1.21e-3;
    for (bool with_relax : {true, false}) {
        const RelaxationParams rel = with_relax ? relax : RelaxationParams::none();
        const auto split =
            evolve_drive(evolve_drive({0, 0, 1}, omega, delta, ta, rel), omega, delta, tb, rel);
        const auto joint = evolve_drive({0, 0, 1}, omega, delta, ta + tb, rel);
        CHECK(std::abs(split.u - joint.u) < 1e-8);
        CHECK(std::abs(split.v - joint.v) < 1e-8);
        CHECK(std::abs(split.w - joint.w) < 1e-8);
    }
}

TEST_CASE("integrator is fourth order against the analytic rotation") {
    const double omega = kTwoPi * 1000.0;
    const double period = kTwoPi / omega;
    const double t = 0.5 * period; // pi pulse
    auto error_at = [&](double h) {
        const auto out = evolve_drive({0, 0, 1}, omega, 0.0, t, RelaxationParams::none(), h);
        return std::hypot(out.u, std::hypot(out.v, out.w + 1.0));
    };
    const double e1 = error_at(period / 1024.0);
    const double e2 = error_at(period / 2048.0);
    CHECK(e1 > 1e-13); // measurable
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("run_sequence: two pi pulses act as the identity") {
    const double omega = kTwoPi * 995.0;
    std::vector<PulseSegment> seq = {PulseSegment::pulse(omega, kPi),
                                     PulseSegment::pulse(omega, kPi)};
    const auto trace = run_sequence({0, 0, 1}, seq, RelaxationParams::none(),
                                    {2.0 * kPi / omega});
    CHECK(std::abs(trace.p0.back() - 0.0) < 1e-8);
}

TEST_CASE("run_sequence: ideal Ramsey reproduces (1 + cos dt)/2") {
    const double delta = kTwoPi * 4814.0;
    for (double t : {0.1e-3, 0.31e-3, 0.77e-3, 2.3e-3}) {
        std::vector<PulseSegment> seq = {PulseSegment::ideal_pulse(0.5 * kPi),
                                         PulseSegment::gap(t, delta),
                                         PulseSegment::ideal_pulse(0.5 * kPi)};
        const auto trace = run_sequence({0, 0, 1}, seq, RelaxationParams::none(), {t});
        CHECK(trace.p0.back() ==
              doctest::Approx(0.5 * (1.0 + std::cos(delta * t))).epsilon(1e-10));
    }
}

TEST_CASE("run_sequence samples inside a drive segment") {
    const double omega = kTwoPi * 995.0;
    std::vector<PulseSegment> seq = {PulseSegment{4e-3, {omega, 0.0, 0.0}, false, 0.0}};
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(4e-3 * i / 40.0);
    const auto trace = run_sequence({0, 0, 1}, seq, RelaxationParams::none(), times);
    CHECK(trace.p0.front() == doctest::Approx(0.0));
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(trace.p0[i] - rabi_transfer(times[i], omega, 0.0)) < 1e-7);
    }
}

TEST_CASE("drive phase sets the rotation axis") {
    // pi/2 about v (phase pi/2) maps w onto u
    const auto out = ideal_rotation({0, 0, 1}, 0.5 * kPi, 0.5 * kPi);
    CHECK(out.u == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(out.v) < 1e-12);
    CHECK(std::abs(out.w) < 1e-12);

    const double omega = kTwoPi * 995.0;
    const auto driven = evolve_segment(
        {0, 0, 1}, PulseSegment{0.5 * kPi / omega, {omega, 0.0, 0.5 * kPi}, false, 0.0},
        RelaxationParams::none());
    CHECK(driven.u == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lineshape scan: peak, symmetry, first zeros") {
    const double omega = kTwoPi * 995.0;
    const double t = kPi / omega;
    std::vector<double> detunings;
    for (int i = -200; i <= 200; ++i) detunings.push_back(kTwoPi * 50.0 * i);
    const auto scan = lineshape_scan(t, omega, detunings);

    const std::size_t mid = detunings.size() / 2;
    CHECK(scan.p0[mid] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < detunings.size(); ++i) {
        CHECK(scan.p0[i] == scan.p0[detunings.size() - 1 - i]); // exact symmetry
        CHECK(scan.p0[i] <= scan.p0[mid]);
    }
    // first zeros where W t = 2 pi
    const double d0 = std::sqrt(std::pow(kTwoPi / t, 2) - omega * omega);
    CHECK(rabi_transfer(t, omega, d0) < 1e-24);
}

TEST_CASE("relaxation composition follows 1/T2 = 1/T2' + 1/T2*") {
    const auto r = RelaxationParams::from_components(68e-3, 500e-3, 4.08e-3);
    CHECK(1.0 / r.t2 == doctest::Approx(1.0 / 500e-3 + 1.0 / 4.08e-3).epsilon(1e-12));
    const auto open = RelaxationParams::from_components(kInf, kInf, kInf);
    CHECK(std::isinf(open.t2));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(evolve_drive({0, 0, 1}, kTwoPi * 100.0, 0.0, -1e-3), InvalidArgument);
    CHECK_THROWS_AS(
        evolve_drive({std::numeric_limits<double>::quiet_NaN(), 0, 1}, kTwoPi * 100.0, 0.0, 1e-3),
        InvalidArgument);
    CHECK_THROWS_AS(evolve_drive({0, 0, 1}, -1.0, 0.0, 1e-3), InvalidArgument);
    CHECK_THROWS_AS(
        evolve_segment({0, 0, 1}, PulseSegment{0.0, {}, false, 0.0}, RelaxationParams::none(), 0.0),
        InvalidArgument);

    std::vector<PulseSegment> seq = {PulseSegment::gap(1e-3, 0.0)};
    CHECK_THROWS_AS(run_sequence({0, 0, 1}, seq, RelaxationParams::none(), {2e-3}),
                    InvalidArgument);
    CHECK_THROWS_AS(run_sequence({0, 0, 1}, seq, RelaxationParams::none(), {0.6e-3, 0.4e-3}),
                    InvalidArgument);
    CHECK_THROWS_AS(lineshape_scan(1e-3, kTwoPi * 100.0, {}), InvalidArgument);
    CHECK_THROWS_AS(rabi_transfer(-1.0, 1.0, 0.0), InvalidArgument);

    RelaxationParams bad;
    bad.w_eq = 1.5;
    CHECK_THROWS_AS(evolve_segment({0, 0, 1}, PulseSegment::gap(1e-3, 0.0), bad),
                    InvalidArgument);
}

TEST_CASE("ideal segments must carry zero duration") {
    PulseSegment seg = PulseSegment::ideal_pulse(kPi);
    seg.duration = 1e-3;
    CHECK_THROWS_AS(evolve_segment({0, 0, 1}, seg, RelaxationParams::none()), InvalidArgument);
}
