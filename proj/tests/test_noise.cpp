#include <doctest.h>

#include <cmath>

#include "dtc/circuit.hpp"
#include "dtc/noise.hpp"
#include "dtc/observables.hpp"
#include "oracles.hpp"

using namespace dtc;

namespace {

std::vector<Bitstring> constant_samples(std::size_t shots, std::size_t n, std::uint8_t bit = 0) {
    return std::vector<Bitstring>(shots, Bitstring(n, bit));
}

}  // namespace

TEST_CASE("identity and full-decay limits") {
    const ProductState s{{1, -1, 1, -1}};
    const std::vector<double> z{0.9, -0.4, 0.1, -1.0};
    const NoiseModel none;
    CHECK(corrupt_expectations(z, none, 7, s) == z);

    NoiseModel dead;
    dead.tau_min = dead.tau_max = 1e-300;
    const auto out = corrupt_expectations(z, dead, 3, s);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("attenuation schedule") {
    const auto m = NoiseModel::uniform_decay(-1.0 / std::log(0.97));
    for (std::size_t t = 0; t < 30; ++t) CHECK(attenuation(m, 4, t) == doctest::Approx(std::pow(0.97, t)).epsilon(1e-12));

    NoiseModel spread;
    spread.tau_min = 10;
    spread.tau_max = 40;
    spread.seed = 4;
    for (std::size_t q = 0; q < 20; ++q) {
        double prev = 1.0;
        for (std::size_t t = 0; t < 10; ++t) {
            const double f = attenuation(spread, q, t);
            CHECK(f <= prev);
            CHECK(f >= 0.0);
            prev = f;
        }
        const double tau = -1.0 / std::log(attenuation(spread, q, 1));
        CHECK(tau >= 10 - 1e-9);
        CHECK(tau <= 40 + 1e-9);
    }
    NoiseModel mismatch = NoiseModel::uniform_decay(20.0);
    mismatch.attenuation_eps_slope = 0.5;
    CHECK(attenuation(mismatch, 0, 4, 0.2) < attenuation(mismatch, 0, 4, 0.0));
}

TEST_CASE("bias has period two and follows the frame") {
    NoiseModel m;
    m.bias = {0.02, -0.01};
    for (std::size_t t = 0; t < 8; ++t) CHECK(spin_offset(m, t) == spin_offset(m, t + 2));
    CHECK(site_bias(m, 0, -1, 0) == doctest::Approx(-0.02));
    m.frame = NoiseModel::BiasFrame::Uniform;
    CHECK(site_bias(m, 0, -1, 0) == doctest::Approx(0.02));
    m.bias_eps_slope = {0.5, 0.0};
    CHECK(spin_offset(m, 0, 0.1) == doctest::Approx(0.07));
}

TEST_CASE("noisy Delta decays while the noiseless value persists") {
    auto m = NoiseModel::uniform_decay(-1.0 / std::log(0.97));
    m.bias = {0.02, -0.01};
    const auto lat = build_lattice(1, 1);
    const auto s = neel_state(lat);
    std::vector<double> z(12);
    for (std::size_t i = 0; i < 12; ++i) z[i] = static_cast<double>(s.spins[i]);
    const double late = delta(corrupt_expectations(z, m, 30, s), s);
    CHECK(late < 0.45);
    CHECK(delta(z, s) == 1.0);
}

TEST_CASE("corruption commutes with averaging for uniform attenuation") {
    auto m = NoiseModel::uniform_decay(15.0);
    m.bias = {0.04, -0.03};
    const ProductState s{{1, -1, -1, 1, 1, -1}};
    const std::vector<double> z{0.3, -0.8, 0.1, 0.6, -0.2, -0.5};
    for (std::size_t t = 0; t < 6; ++t) {
        const double f = std::exp(-static_cast<double>(t) / 15.0);
        const double expected = f * delta(z, s) + spin_offset(m, t);
        CHECK(delta(corrupt_expectations(z, m, t, s), s) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("correlator corruption") {
    auto m = NoiseModel::uniform_decay(10.0);
    m.correlator_bias = 0.05;
    const std::vector<double> zz{1, 0.5, 0.5, 1};
    const auto out = corrupt_correlators(zz, 2, m, 3);
    const double f = std::exp(-0.3);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == doctest::Approx(f * f * 0.5 + 0.05));
    CHECK_THROWS_AS((void)corrupt_correlators(zz, 3, m, 3), std::invalid_argument);
}

TEST_CASE("flip schedule") {
    NoiseModel m;
    m.flip_rate = 0.02;
    m.flip_cap = 0.3;
    CHECK(flip_probability(m, 0) == 0.0);
    CHECK(flip_probability(m, 5) == doctest::Approx(0.1));
    CHECK(flip_probability(m, 40) == 0.3);
}

TEST_CASE("bit flips") {
    NoiseModel m;
    const auto in = constant_samples(10, 8);
    CHECK(corrupt_bits(in, m, 3, 1) == in);

    m.flip_base = 0.5;
    const std::size_t shots = 100000, n = 6;
    const auto half = hamming_distribution(corrupt_bits(constant_samples(shots, n), m, 0, 2), ProductState{std::vector<int>(n, 1)});
    const auto bin = oracle::binomial_pmf(n, 0.5);
    for (std::size_t d = 0; d <= n; ++d) CHECK(std::abs(half[d] - bin[d]) < 4 * std::sqrt(bin[d] * (1 - bin[d]) / shots));

    m.flip_base = 0.07;
    const auto out = corrupt_bits(constant_samples(shots, n), m, 0, 3);
    double flips = 0;
    for (const auto& b : out) {
        for (auto x : b) flips += x;
    }
    const double trials = static_cast<double>(shots * n);
    CHECK(std::abs(flips / trials - 0.07) < 3 * std::sqrt(0.07 * 0.93 / trials));

    const auto dist = hamming_distribution(out, ProductState{std::vector<int>(n, 1)});
    const auto b07 = oracle::binomial_pmf(n, 0.07);
    for (std::size_t d = 0; d <= n; ++d) CHECK(std::abs(dist[d] - b07[d]) < 4 * std::sqrt(b07[d] * (1 - b07[d]) / shots) + 1e-12);
}

TEST_CASE("flips do not depend on how samples are split") {
    NoiseModel m;
    m.flip_base = 0.2;
    m.readout_flip = 0.05;
    std::vector<Bitstring> in;
    for (std::size_t k = 0; k < 50; ++k) in.push_back(Bitstring{static_cast<std::uint8_t>(k % 2), 0, 1, 1});
    const auto whole = corrupt_bits(in, m, 0, 9);
    CHECK(whole == corrupt_bits(in, m, 0, 9));
    CHECK(whole != corrupt_bits(in, m, 0, 10));
    // Sample k draws from substream k, so the first half alone gives the same bits.
    const std::vector<Bitstring> head(in.begin(), in.begin() + 25);
    const auto h = corrupt_bits(head, m, 0, 9);
    for (std::size_t k = 0; k < 25; ++k) CHECK(h[k] == whole[k]);
}

TEST_CASE("validation and JSON") {
    NoiseModel bad;
    bad.flip_cap = 0.7;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = NoiseModel{};
    bad.bias = {1.2, 0.0};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = NoiseModel{};
    bad.tau_min = 5;
    bad.tau_max = 2;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    NoiseModel m;
    m.tau_min = 10;
    m.tau_max = 20;
    m.bias = {0.03, -0.02};
    m.frame = NoiseModel::BiasFrame::Uniform;
    m.correlator_bias = 0.01;
    m.flip_rate = 0.02;
    m.flip_cap = 0.3;
    m.readout_flip = 0.01;
    m.seed = 77;
    const auto back = noise_from_json(noise_to_json(m));
    CHECK(noise_to_json(back) == noise_to_json(m));
    const auto tau = noise_from_json(nlohmann::json{{"tau", 25.0}});
    CHECK(tau.tau_min == 25.0);
    CHECK(tau.tau_max == 25.0);
    CHECK_THROWS_AS((void)noise_from_json(nlohmann::json{{"bias_frame", "sideways"}}), std::invalid_argument);
    CHECK_THROWS_AS((void)noise_from_json(nlohmann::json{{"flip_base", -0.1}}), std::invalid_argument);
}
