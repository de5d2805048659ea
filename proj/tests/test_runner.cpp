#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dtc/runner.hpp"

using namespace dtc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dtc_runner_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream is(p);
    std::size_t n = 0;
    for (std::string line; std::getline(is, line);) ++n;
    return n;
}

RunConfig small_config(BackendKind kind = BackendKind::Exact) {
    RunConfig c;
    c.rows = c.cols = 1;
    c.cycles = 8;
    c.backend.kind = kind;
    c.backend.policy.chi_max = 256;
    c.shots = 500;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = config_from_json(json::parse(R"({
        "lattice": {"rows": 2, "cols": 3},
        "epsilon": [0.0, 0.1],
        "phi_pi": 0.5,
        "cycles": 12,
        "initial_state": "polarized",
        "backend": {"type": "mps", "chi_max": 48, "cutoff": 1e-10},
        "shots": 64,
        "seed": 5,
        "noise": {"tau": 20.0, "bias": [0.01, -0.01]},
        "recovery": {"q": 1e-3, "small_lattice": {"rows": 1, "cols": 2}},
        "threads": 2
    })"));
    CHECK(c.rows == 2);
    CHECK(c.cols == 3);
    CHECK(c.epsilons == std::vector<double>{0.0, 0.1});
    REQUIRE(c.phis.size() == 1);
    CHECK(c.phis[0] == doctest::Approx(kPi / 2));
    CHECK(c.cycles == 12);
    CHECK(c.backend.kind == BackendKind::Mps);
    CHECK(c.backend.policy.chi_max == 48);
    CHECK(c.backend.policy.cutoff == 1e-10);
    REQUIRE(c.noise);
    CHECK(c.noise->tau_max == 20.0);
    REQUIRE(c.recovery);
    CHECK(c.recovery->fit.ridge == 1e-3);
    CHECK(c.recovery->small_cols == 2);
    CHECK(c.threads == 2);

    // The resolved form parses back to itself.
    const auto resolved = config_to_json(c);
    CHECK(config_to_json(config_from_json(resolved)) == resolved);

    CHECK(config_from_json(json{{"backend", "exact"}}).backend.kind == BackendKind::Exact);
    CHECK_THROWS_AS((void)config_from_json(json{{"cyclez", 3}}), std::invalid_argument);
    CHECK_THROWS_AS((void)config_from_json(json{{"backend", {{"type", "gpu"}}}}), std::invalid_argument);
    CHECK_THROWS_AS((void)config_from_json(json{{"phi", 0.1}, {"phi_pi", 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS((void)config_from_json(json{{"recovery", {{"lambda3", 1}}}}), std::invalid_argument);
}

TEST_CASE("config validation") {
    auto c = small_config();
    CHECK_NOTHROW(validate(c));
    c.rows = 2;
    c.cols = 2;
    CHECK_THROWS_AS(validate(c), CapacityError);
    c = small_config();
    c.shots = 0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = small_config();
    c.cycles = 0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = small_config();
    c.recovery = RecoveryConfig{};
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = small_config();
    c.phis = {2.0};
    CHECK_THROWS_AS(validate(c), std::invalid_argument);

    c = small_config();
    const auto lat = build_lattice(1, 1);
    c.initial_state = "010";
    CHECK_THROWS_AS((void)initial_state(c, lat), std::invalid_argument);
    c.initial_state = "000000000000";
    CHECK(initial_state(c, lat).spins == std::vector<int>(12, 1));
}

TEST_CASE("Clifford points on both backends") {
    for (auto kind : {BackendKind::Exact, BackendKind::Mps}) {
        const auto c = small_config(kind);
        const auto flip = run_point(c, 0.0, kPi / 2);
        REQUIRE(flip.ideal.size() == c.cycles + 1);
        for (std::size_t t = 0; t <= c.cycles; ++t) {
            CHECK(flip.ideal.delta[t] == doctest::Approx(t % 2 ? -1.0 : 1.0).epsilon(1e-12));
            CHECK(flip.ideal.hamming[t][t % 2 ? 12 : 0] == doctest::Approx(1.0).epsilon(1e-12));
        }
        const auto glass = run_point(c, 0.0, 0.0);
        for (double d : glass.ideal.delta) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(clifford_delta(kPi / 2, 3) == std::vector<double>{1, -1, 1, -1});
    CHECK(clifford_delta(0.0, 2) == std::vector<double>{1, 1, 1});
}

TEST_CASE("exact and MPS runs agree") {
    auto ce = small_config(BackendKind::Exact);
    auto cm = small_config(BackendKind::Mps);
    ce.cycles = cm.cycles = 10;
    const auto e = run_point(ce, 0.05, 0.45 * kPi);
    const auto m = run_point(cm, 0.05, 0.45 * kPi);
    CHECK(m.truncation_error < 1e-20);
    for (std::size_t t = 0; t <= 10; ++t) {
        CHECK(std::abs(e.ideal.delta[t] - m.ideal.delta[t]) < 1e-6);
        CHECK(std::abs(e.ideal.chi_nn[t] - m.ideal.chi_nn[t]) < 1e-6);
        CHECK(std::abs(e.ideal.chi_sg[t] - m.ideal.chi_sg[t]) < 1e-6);
        CHECK(std::abs(e.ideal.qfi[t] - m.ideal.qfi[t]) < 1e-6);
    }
}

TEST_CASE("simulate writes one row per cycle and is byte reproducible") {
    auto c = small_config();
    c.cycles = 30;
    c.epsilons = {0.05};
    c.phis = {0.45 * kPi};
    NoiseModel noise = NoiseModel::uniform_decay(30.0);
    noise.bias = {0.03, -0.03};
    noise.flip_rate = 0.01;
    c.noise = noise;
    c.recovery = RecoveryConfig{};
    c.output_dir = scratch("sim_a");
    run_simulate(c);
    const auto point = c.output_dir / "eps_0.0500_phi_0.4500pi";
    CHECK(fs::exists(c.output_dir / "config.resolved"));
    REQUIRE(fs::exists(point / "series.csv"));
    CHECK(line_count(point / "series.csv") == 32);  // header + T + 1
    for (const char* f : {"hamming.json", "hamming_noisy.json", "recovery.json", "summary.json"}) CHECK(fs::exists(point / f));

    auto c2 = c;
    c2.output_dir = scratch("sim_b");
    run_simulate(c2);
    for (const std::string f : {"series.csv", "hamming.json", "hamming_noisy.json", "recovery.json"}) {
        CAPTURE(f);
        CHECK(slurp(point / f) == slurp(c2.output_dir / "eps_0.0500_phi_0.4500pi" / f));
    }

    // The measured-data path reads the noisy columns back.
    const auto ch = read_channels_csv(point / "series.csv");
    const auto direct = run_point(c, 0.05, 0.45 * kPi);
    REQUIRE(direct.noisy);
    REQUIRE(ch.delta.size() == 31);
    for (std::size_t t = 0; t <= 30; ++t) {
        CHECK(ch.delta[t] == direct.noisy->delta[t]);
        CHECK(ch.chi_nn[t] == direct.noisy->chi_nn[t]);
    }
    const auto rep = recover_measured(c, MeasuredInputs{ch, std::nullopt, std::nullopt, std::nullopt});
    REQUIRE(direct.recovery);
    for (std::size_t t = 0; t <= 30; ++t) {
        if (rep.delta.flagged[t]) continue;
        CHECK(std::abs(rep.delta.values[t] - direct.ideal.delta[t]) < 0.02);
    }
    CHECK(recovery_to_json(rep).contains("offsets"));
    fs::remove_all(c.output_dir);
    fs::remove_all(c2.output_dir);
}

TEST_CASE("phase diagram at the Clifford points") {
    auto c = small_config();
    c.epsilons = {0.0};
    c.phis = {0.0, kPi / 2};
    c.cycles = 10;
    c.threads = 1;
    const auto grid = run_phase_diagram(c);
    REQUIRE(grid.size() == 2);
    CHECK(grid[0].delta_mbl == doctest::Approx(1.0));
    CHECK(std::abs(grid[0].delta_dtc) < 0.1);
    CHECK(grid[1].delta_mbl == doctest::Approx(1.0));
    CHECK(grid[1].delta_dtc == doctest::Approx(1.0));
    const auto j = phase_diagram_to_json(grid);
    REQUIRE(j.size() == 2);
    CHECK(j[1].contains("eps"));
    CHECK(j[1].contains("delta_dtc"));
}

TEST_CASE("grid results do not depend on the thread count") {
    auto c = small_config();
    c.epsilons = {0.05, 0.2, 0.4};
    c.phis = {0.25 * kPi, 0.45 * kPi};
    c.cycles = 6;
    c.threads = 1;
    const auto serial = phase_diagram_to_json(run_phase_diagram(c)).dump();
    c.threads = 3;
    CHECK(phase_diagram_to_json(run_phase_diagram(c)).dump() == serial);
}

TEST_CASE("checkpoint resume reproduces a fresh run") {
    auto c = small_config(BackendKind::Mps);
    c.cycles = 6;
    c.backend.policy.chi_max = 16;
    c.output_dir = scratch("fresh");
    run_simulate(c);
    const auto fresh = slurp(c.output_dir / "eps_0.0500_phi_0.4500pi" / "series.csv");

    auto ck = c;
    ck.checkpoint = true;
    ck.output_dir = scratch("ckpt");
    run_simulate(ck);
    CHECK(fs::exists(ck.output_dir / "checkpoints"));
    CHECK(slurp(ck.output_dir / "eps_0.0500_phi_0.4500pi" / "series.csv") == fresh);
    // Second run resumes from the stored state.
    run_simulate(ck);
    CHECK(slurp(ck.output_dir / "eps_0.0500_phi_0.4500pi" / "series.csv") == fresh);
    fs::remove_all(c.output_dir);
    fs::remove_all(ck.output_dir);
}
