#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "runner.hpp"

using namespace trapsim;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("trapsim_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("defaults parse and validate") {
    const auto cfg = config::parse_config(json::object());
    CHECK(cfg.trap.delta_eff == doctest::Approx(-kTwoPi * 13.04e12));
    CHECK(cfg.sequence.omega_rabi == doctest::Approx(kTwoPi * 995.0));
    CHECK_FALSE(cfg.has_array);
}

TEST_CASE("unknown keys fail closed") {
    CHECK_THROWS_WITH_AS(config::parse_config(json::parse(R"({"sede": 1})")),
                         doctest::Contains("unknown key 'sede'"), ConfigError);
    CHECK_THROWS_WITH_AS(
        config::parse_config(json::parse(R"({"trap": {"depth_uk": 300}})")),
        doctest::Contains("config.trap: unknown key"), ConfigError);
    CHECK_THROWS_WITH_AS(
        config::parse_config(json::parse(R"({"sequence": {"lineshape": {"span": 1}}})")),
        doctest::Contains("lineshape: unknown key"), ConfigError);
}

TEST_CASE("out-of-range values are rejected with their path") {
    CHECK_THROWS_AS(config::parse_config(json::parse(R"({"trap": {"delta_eff_hz": 1e12}})")),
                    ConfigError);
    CHECK_THROWS_AS(config::parse_config(json::parse(R"({"seed": -4})")), ConfigError);
    CHECK_THROWS_AS(
        config::parse_config(json::parse(R"({"ensemble": {"prepared_fraction": 1.4}})")),
        ConfigError);
    CHECK_THROWS_AS(
        config::parse_config(json::parse(R"({"detection": {"exposure_s": 1e-3}})")),
        ConfigError);
}

TEST_CASE("parse errors report the source line") {
    const std::string text = "{\n  \"seed\": 1,\n  \"trap\" {}\n}\n";
    try {
        config::load_config_text(text, "bad.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.json:3") != std::string::npos);
    }
}

TEST_CASE("effective detuning falls back to the wavelength") {
    const auto cfg = config::parse_config(json::parse(R"({"trap": {"wavelength_m": 800e-9}})"));
    CHECK(cfg.trap.delta_eff == doctest::Approx(-kTwoPi * 4.737e12).epsilon(1e-3));
}

TEST_CASE("config round trip and digest stability") {
    auto cfg = config::parse_config(json::parse(
        R"({"array": {}, "detection": {}, "seed": 77, "sequence": {"points": 64}})"));
    const auto doc = config::to_json(cfg);
    const auto back = config::parse_config(doc);
    CHECK(config::config_digest(cfg) == config::config_digest(back));
    CHECK(back.has_array);
    CHECK(back.sequence.points == 64);
}

TEST_CASE("overrides merge deeply and re-validate") {
    const auto base = config::parse_config(json::object());
    const auto merged = config::apply_overrides(
        base, json::parse(R"({"sequence": {"points": 31}, "seed": 9})"));
    CHECK(merged.sequence.points == 31);
    CHECK(merged.seed == 9);
    CHECK(merged.sequence.t_max == base.sequence.t_max);
    CHECK_THROWS_AS(config::apply_overrides(base, json::parse(R"({"bogus": 1})")),
                    ConfigError);
}

TEST_CASE("relaxation assembly from scattering") {
    auto cfg = config::parse_config(json::parse(
        R"({"trap": {"depth_k": 250e-6, "delta_eff_hz": -13.04e12},
            "sequence": {"relaxation": {"from_scattering": true}}})"));
    const auto relax = cfg.relaxation();
    CHECK(relax.t1 == doctest::Approx(65.64e-3).epsilon(1e-3));
    CHECK(relax.t2 == doctest::Approx(2.0 * relax.t1).epsilon(1e-12));
}

TEST_CASE("simulate rabi writes the trace and manifest") {
    auto cfg = config::parse_config(json::parse(
        R"({"sequence": {"omega_rabi_rad_s": 6251.9, "t_max_s": 4e-3, "points": 801},
            "ensemble": {"prepared_fraction": 1.0}})"));
    const auto dir = fresh_dir("rabi");
    runner::RunOptions opts;
    opts.out_dir = dir;
    const auto manifest = runner::cmd_simulate(cfg, runner::SimKind::rabi, opts);

    REQUIRE(std::filesystem::exists(dir / "rabi.csv"));
    REQUIRE(std::filesystem::exists(dir / "manifest.json"));
    REQUIRE(manifest.artifacts.size() == 1);
    CHECK(manifest.artifacts[0].path == "rabi.csv");
    CHECK(manifest.artifacts[0].checksum == io::checksum_file(dir / "rabi.csv"));

    // first minimum of the upper-state population at the pi time
    const auto trace = io::read_trace_csv(dir / "rabi.csv");
    std::size_t first_max = 0;
    for (std::size_t i = 1; i + 1 < trace.p0.size(); ++i) {
        if (trace.p0[i] >= trace.p0[i - 1] && trace.p0[i] >= trace.p0[i + 1]) {
            first_max = i;
            break;
        }
    }
    const double dt = trace.times[1] - trace.times[0];
    CHECK(std::abs(trace.times[first_max] - 502.5e-6) <= dt + 1e-12);
}

TEST_CASE("simulate ramsey --analytic matches the closed form pointwise") {
    auto cfg = config::parse_config(json::parse(
        R"({"trap": {"depth_k": 300e-6, "delta_eff_hz": -13.04e12},
            "ensemble": {"temperature_k": 15.6e-6, "prepared_fraction": 1.0},
            "sequence": {"analytic": true, "t_max_s": 12e-3, "points": 120}})"));
    const auto dir = fresh_dir("ramsey_analytic");
    runner::RunOptions opts;
    opts.out_dir = dir;
    runner::cmd_simulate(cfg, runner::SimKind::ramsey, opts);

    const auto trace = io::read_trace_csv(dir / "ramsey.csv");
    REQUIRE(trace.times.size() == 120);

    const double zeeman = trap::quadratic_zeeman_shift(cfg.field, cfg.shift_model);
    dephasing::RamseyParams rp;
    rp.amplitude = 0.5;
    rp.offset = 0.5;
    rp.delta = dephasing::trap_bottom_detuning(cfg.trap, zeeman, cfg.shift_model.constants);
    rp.t2_star = dephasing::t2star_from_temperature(15.6e-6, cfg.trap,
                                                    cfg.shift_model.constants);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        CHECK(trace.p0[i] ==
              doctest::Approx(dephasing::ramsey_analytic(trace.times[i], rp)).epsilon(1e-9));
    }
}

TEST_CASE("csv serialization uses 12 significant digits and LF endings") {
    const auto dir = fresh_dir("csv");
    bloch::PopulationTrace t;
    t.times = {0.0, 1.0 / 3.0};
    t.p0 = {0.123456789012345, 1.0};
    io::write_trace_csv(dir / "t.csv", t);
    std::ifstream in(dir / "t.csv", std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content.find("time_s,p0\n") == 0);
    CHECK(content.find("1.23456789012e-01") != std::string::npos);
    CHECK(content.find('\r') == std::string::npos);
}

TEST_CASE("same config and seed give byte-identical artifacts") {
    auto cfg = config::parse_config(json::parse(
        R"({"trap": {"depth_k": 300e-6, "delta_eff_hz": -13.04e12},
            "ensemble": {"n_atoms": 2000, "temperature_k": 15.6e-6},
            "sequence": {"ideal_pulses": true, "t_max_s": 4e-3, "points": 40},
            "seed": 31})"));
    const auto d1 = fresh_dir("det_a");
    const auto d2 = fresh_dir("det_b");
    runner::RunOptions o1{d1, 1};
    runner::RunOptions o2{d2, 4};
    runner::cmd_simulate(cfg, runner::SimKind::ramsey, o1);
    runner::cmd_simulate(cfg, runner::SimKind::ramsey, o2);
    CHECK(io::checksum_file(d1 / "ramsey.csv") == io::checksum_file(d2 / "ramsey.csv"));
}

TEST_CASE("malformed trace csv is a config error") {
    const auto dir = fresh_dir("badcsv");
    io::write_text_file(dir / "bad.csv", "time_s,p0\n0.0;0.5\n");
    CHECK_THROWS_AS(io::read_trace_csv(dir / "bad.csv"), ConfigError);
    io::write_text_file(dir / "empty.csv", "time_s,p0\n");
    CHECK_THROWS_AS(io::read_trace_csv(dir / "empty.csv"), ConfigError);
}
