#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dtc/circuit.hpp"
#include "dtc/noise.hpp"
#include "dtc/observables.hpp"
#include "dtc/recovery.hpp"
#include "dtc/statevector.hpp"
#include "oracles.hpp"

using namespace dtc;

namespace {

constexpr double kPi = std::numbers::pi;

struct Traces {
    std::vector<double> delta, chi, corr;
};

Traces exact_traces(double eps, double phi, std::size_t cycles) {
    const auto lat = build_lattice(1, 1);
    const auto s = neel_state(lat);
    auto sv = init_product(s);
    const auto cyc = build_cycle(lat, sample_disorder(lat, 0), {eps, phi});
    Traces out;
    for (std::size_t t = 0; t <= cycles; ++t) {
        if (t > 0) apply_cycle(sv, cyc);
        const auto zz = expect_zz_matrix(sv);
        out.delta.push_back(delta(expect_z_all(sv), s));
        out.chi.push_back(chi(lat.edges, zz, 12));
        out.corr.push_back(correlator_mean(lat.edges, zz, 12));
    }
    return out;
}

std::vector<double> alternating(std::size_t cycles) {
    std::vector<double> v(cycles + 1);
    for (std::size_t t = 0; t <= cycles; ++t) v[t] = t % 2 ? -1.0 : 1.0;
    return v;
}

std::vector<double> noisy_delta(const std::vector<double>& clean, double tau, double even, double odd) {
    std::vector<double> out(clean.size());
    for (std::size_t t = 0; t < clean.size(); ++t) {
        out[t] = std::exp(-static_cast<double>(t) / tau) * clean[t] + (t % 2 ? odd : even);
    }
    return out;
}

double max_error(const RecoveredSeries& r, const std::vector<double>& truth) {
    double m = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (!r.flagged[t]) m = std::max(m, std::abs(r.values[t] - truth[t]));
    }
    return m;
}

}  // namespace

TEST_CASE("Clifford reference angle") {
    CHECK(clifford_reference(0.1 * kPi) == 0.0);
    CHECK(clifford_reference(0.45 * kPi) == doctest::Approx(kPi / 2));
    CHECK(clifford_reference(kPi / 4) == 0.0);
}

TEST_CASE("renormalization without noise is the identity") {
    const auto tr = exact_traces(0.05, 0.45 * kPi, 12);
    const auto ref = alternating(12);
    const auto r = renormalize_delta(tr.delta, ref, ref, {});
    for (std::size_t t = 0; t < ref.size(); ++t) CHECK(r.values[t] == doctest::Approx(tr.delta[t]).epsilon(1e-14));
    CHECK(r.flagged_count() == 0);
}

TEST_CASE("renormalization inverts the assumed noise model") {
    const auto tr = exact_traces(0.05, 0.45 * kPi, 20);
    const auto ref = alternating(20);
    const OffsetVector off{0.05, -0.03, 0.02, -0.02};
    const auto r = renormalize_delta(noisy_delta(tr.delta, 25.0, 0.05, -0.03), noisy_delta(ref, 25.0, 0.02, -0.02), ref, off);
    CHECK(max_error(r, tr.delta) < 1e-10);
    CHECK(r.flagged_count() == 0);
}

TEST_CASE("degenerate denominators are flagged") {
    const std::vector<double> noisy{0.5, 0.4}, noisy_ref{0.0005, 0.8}, ref{1.0, -1.0};
    const auto r = renormalize_delta(noisy, noisy_ref, ref, {});
    CHECK(r.flagged[0]);
    CHECK(std::isnan(r.values[0]));
    CHECK_FALSE(r.flagged[1]);
    CHECK(r.values[1] == doctest::Approx(-0.5));
    CHECK(r.flagged_count() == 1);
    CHECK_THROWS_AS((void)renormalize_delta({1.0}, {1.0, 1.0}, {1.0, 1.0}, {}), std::invalid_argument);
}

TEST_CASE("offset learning") {
    const std::size_t cycles = 30;
    const auto tr = exact_traces(0.05, 0.45 * kPi, cycles);
    const auto ref = alternating(cycles);

    SUBCASE("noiseless data gives near-zero offsets") {
        const auto fit = learn_offsets(tr.delta, ref, ref, tr.delta);
        CHECK(std::abs(fit.offsets.target_even) < 1e-3);
        CHECK(std::abs(fit.offsets.target_odd) < 1e-3);
        CHECK(std::abs(fit.offsets.reference_even) < 1e-3);
        CHECK(std::abs(fit.offsets.reference_odd) < 1e-3);
    }
    SUBCASE("known offsets are recovered") {
        const double tau = -1.0 / std::log(0.97);
        const auto fit = learn_offsets(noisy_delta(tr.delta, tau, 0.05, -0.03), noisy_delta(ref, tau, 0.02, -0.02), ref,
                                       tr.delta, FitOptions{});
        CHECK(std::abs(fit.offsets.target_even - 0.05) < 1e-2);
        CHECK(std::abs(fit.offsets.target_odd + 0.03) < 1e-2);
        CHECK(std::abs(fit.offsets.reference_even - 0.02) < 1e-2);
        CHECK(std::abs(fit.offsets.reference_odd + 0.02) < 1e-2);
        CHECK(fit.objective < 1e-3);
    }
    SUBCASE("an iteration budget of one reports the best iterate") {
        FitOptions opt;
        opt.max_iterations = 1;
        bool thrown = false;
        try {
            (void)learn_offsets(noisy_delta(tr.delta, 20.0, 0.05, -0.03), noisy_delta(ref, 20.0, 0.02, -0.02), ref, tr.delta,
                                opt);
        } catch (const OptimizationError& e) {
            thrown = true;
            CHECK(e.best().size() == 4);
            CHECK(std::isfinite(e.objective()));
        }
        CHECK(thrown);
    }
    SUBCASE("invalid options") {
        FitOptions opt;
        opt.ridge = 0.0;
        CHECK_THROWS_AS((void)learn_offsets(tr.delta, ref, ref, tr.delta, opt), std::invalid_argument);
    }
}

TEST_CASE("chi recovery") {
    const std::size_t cycles = 20, n = 12;
    const auto tr = exact_traces(0.05, 0.45 * kPi, cycles);
    const std::vector<double> ones(cycles + 1, 1.0);

    SUBCASE("no noise, no parameters") {
        const auto r = recover_chi(tr.chi, tr.corr, ones, ones, {}, n);
        for (std::size_t t = 0; t <= cycles; ++t) CHECK(r.values[t] == doctest::Approx(tr.chi[t]).epsilon(1e-14));
    }

    // zz~ = f^2 zz + eta gives chi~ = f^4 chi + 2 eta f^2 C + eta^2 and C~ = f^2 C + eta,
    // so c1 = -eta and (N - 1) c2 = eta^2 cancel the bias exactly.
    const double eta = 0.03, tau = 30.0;
    std::vector<double> chi_n, corr_n, chi_r, corr_r;
    for (std::size_t t = 0; t <= cycles; ++t) {
        const double f2 = std::exp(-2.0 * static_cast<double>(t) / tau);
        chi_n.push_back(f2 * f2 * tr.chi[t] + 2 * eta * f2 * tr.corr[t] + eta * eta);
        corr_n.push_back(f2 * tr.corr[t] + eta);
        const double cref = -1.0;  // Neel neighbours at a Clifford point
        chi_r.push_back(f2 * f2 + 2 * eta * f2 * cref + eta * eta);
        corr_r.push_back(f2 * cref + eta);
    }

    SUBCASE("pure attenuation cancels") {
        std::vector<double> a, b;
        for (std::size_t t = 0; t <= cycles; ++t) {
            const double f4 = std::exp(-4.0 * static_cast<double>(t) / tau);
            a.push_back(f4 * tr.chi[t]);
            b.push_back(f4);
        }
        const auto r = recover_chi(a, tr.corr, b, ones, {}, n);
        for (std::size_t t = 0; t <= cycles; ++t) CHECK(r.values[t] == doctest::Approx(tr.chi[t]).epsilon(1e-12));
    }
    SUBCASE("true parameters invert the model") {
        const double c2 = eta * eta / static_cast<double>(n - 1);
        const auto r = recover_chi(chi_n, corr_n, chi_r, corr_r, {-eta, c2, -eta, c2}, n);
        CHECK(max_error(r, tr.chi) < 1e-10);
    }
    SUBCASE("learned parameters recover chi") {
        const auto fit = learn_chi_params(chi_n, corr_n, chi_r, corr_r, tr.chi, n);
        const auto r = recover_chi(chi_n, corr_n, chi_r, corr_r, fit.params, n);
        CHECK(max_error(r, tr.chi) < 1e-3);
        CHECK(fit.params.c1_target == doctest::Approx(-eta).epsilon(0.05));
    }
}

TEST_CASE("flip kernel") {
    SUBCASE("p = 0 is the identity") {
        const auto k = flip_kernel(10, 0.0);
        CHECK((k.matrix - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("N = 2 column for d' = 0") {
        const double p = 0.13;
        const auto k = flip_kernel(2, p);
        CHECK(k.matrix(0, 0) == doctest::Approx((1 - p) * (1 - p)));
        CHECK(k.matrix(1, 0) == doctest::Approx(2 * p * (1 - p)));
        CHECK(k.matrix(2, 0) == doctest::Approx(p * p));
    }
    SUBCASE("brute force enumeration") {
        for (std::size_t n : {1u, 3u, 6u, 9u}) {
            for (double p : {0.01, 0.2, 0.5}) {
                const auto k = flip_kernel(n, p);
                CHECK((k.matrix - oracle::brute_force_kernel(n, p)).cwiseAbs().maxCoeff() < 1e-13);
            }
        }
    }
    SUBCASE("column stochastic up to N = 200") {
        for (std::size_t n : {2u, 35u, 144u, 200u}) {
            for (double p : {0.0, 0.01, 0.1, 0.5}) {
                const auto k = flip_kernel(n, p);
                CHECK(k.matrix.allFinite());
                CHECK(k.matrix.minCoeff() >= 0.0);
                for (Eigen::Index c = 0; c <= static_cast<Eigen::Index>(n); ++c) CHECK(std::abs(k.matrix.col(c).sum() - 1.0) < 1e-12);
            }
        }
    }
    SUBCASE("apply") {
        const auto k = flip_kernel(4, 0.1);
        const auto b = oracle::binomial_pmf(4, 0.1);
        const auto out = k.apply({1, 0, 0, 0, 0});
        for (std::size_t d = 0; d <= 4; ++d) CHECK(out[d] == doctest::Approx(b[d]));
        CHECK_THROWS_AS((void)k.apply({1, 0}), std::invalid_argument);
    }
    CHECK_THROWS_AS((void)flip_kernel(3, 1.5), std::invalid_argument);
}

TEST_CASE("kernel agrees with sampled bit flips") {
    const std::size_t n = 8, shots = 100000;
    const ProductState s{std::vector<int>(n, 1)};
    // Input: a mix of distances 1, 4 and 7.
    std::vector<Bitstring> in;
    std::vector<double> input(n + 1, 0.0);
    for (std::size_t k = 0; k < shots; ++k) {
        const std::size_t d = k % 3 == 0 ? 1 : (k % 3 == 1 ? 4 : 7);
        Bitstring b(n, 0);
        for (std::size_t i = 0; i < d; ++i) b[i] = 1;
        in.push_back(b);
        input[d] += 1.0 / shots;
    }
    NoiseModel m;
    m.flip_base = 0.1;
    const auto out = hamming_distribution(corrupt_bits(in, m, 0, 5), s);
    const auto expected = flip_kernel(n, 0.1).apply(input);
    for (std::size_t d = 0; d <= n; ++d) CHECK(std::abs(out[d] - expected[d]) <= 3 * std::sqrt(expected[d] * (1 - expected[d]) / shots) + 1e-12);
}

TEST_CASE("flip probability learning") {
    const std::size_t n = 35;
    SUBCASE("exact binomial") {
        for (double p : {0.0, 0.03, 0.2, 0.45}) {
            auto phi = oracle::binomial_pmf(n, p);
            CHECK(std::abs(learn_flip_probability(phi, 0).p - p) < 1e-6);
            std::reverse(phi.begin(), phi.end());
            CHECK(std::abs(learn_flip_probability(phi, n).p - p) < 1e-6);
        }
    }
    SUBCASE("point mass") {
        std::vector<double> phi(n + 1, 0.0);
        phi[0] = 1.0;
        CHECK(learn_flip_probability(phi, 0).p < 1e-6);
    }
    SUBCASE("sampled data") {
        NoiseModel m;
        m.flip_base = 0.05;
        const ProductState s{std::vector<int>(n, 1)};
        const auto phi = hamming_distribution(corrupt_bits(std::vector<Bitstring>(10000, Bitstring(n, 0)), m, 0, 8), s);
        CHECK(std::abs(learn_flip_probability(phi, 0).p - 0.05) < 0.005);
    }
    CHECK_THROWS_AS((void)learn_flip_probability({1.0, 0.0}, 2), std::invalid_argument);
}

TEST_CASE("trial distribution") {
    const auto t = make_trial(20, 8.0, 2.5, 0.6, -9.0);
    const auto p = t.probabilities();
    double sum = 0;
    for (double v : p) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Direct evaluation of the unnormalized shape.
    const auto shape = [&](double d) { return std::exp(-(d - 8.0) * (d - 8.0) / (2 * 2.5 * 2.5)) / (1 + std::exp(0.6 * d - 9.0)); };
    CHECK(p[5] / p[10] == doctest::Approx(shape(5) / shape(10)));
    CHECK(t.norm * shape(10) == doctest::Approx(p[10]));
    CHECK_THROWS_AS((void)make_trial(20, 8.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("deconvolution") {
    const std::size_t n = 35;
    const auto truth = make_trial(n, 11.0, 3.0, 0.8, -14.0);
    const auto tp = truth.probabilities();
    const double mu = distribution_mean(tp), var = distribution_variance(tp);

    SUBCASE("push-forward data are recovered") {
        const double p = 0.1;
        const auto noisy = flip_kernel(n, p).apply(tp);
        const auto res = deconvolve_hamming(noisy, p, mu, var);
        CHECK(total_variation(res.distribution, tp) <= 0.02);
        double sum = 0;
        for (double v : res.distribution) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("p = 0 fits the data directly") {
        const auto res = deconvolve_hamming(tp, 0.0, mu, var);
        CHECK(total_variation(res.distribution, tp) <= 0.02);
    }
    SUBCASE("iteration budget") {
        DeconvolutionOptions opt;
        opt.max_iterations = 1;
        CHECK_THROWS_AS((void)deconvolve_hamming(flip_kernel(n, 0.1).apply(tp), 0.1, mu, var, opt), OptimizationError);
        opt = DeconvolutionOptions{};
        opt.lambda1 = 0.0;
        CHECK_THROWS_AS((void)deconvolve_hamming(tp, 0.1, mu, var, opt), std::invalid_argument);
    }
}

TEST_CASE("unflipped variance") {
    // Var of a flipped distribution = (1-2p)^2 Var + N p (1-p) for independent flips.
    const std::size_t n = 20;
    const auto base = make_trial(n, 6.0, 2.0, 0.0, 0.0).probabilities();
    const double p = 0.15;
    const auto noisy = flip_kernel(n, p).apply(base);
    CHECK(unflipped_variance(distribution_variance(noisy), n, p) == doctest::Approx(distribution_variance(base)).epsilon(1e-10));
    CHECK_THROWS_AS((void)unflipped_variance(1.0, n, 0.5), std::invalid_argument);
}

TEST_CASE("total variation and JSON") {
    CHECK(total_variation({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)total_variation({1.0}, {0.5, 0.5}), std::invalid_argument);
    const auto oj = offsets_to_json({0.1, 0.2, 0.3, 0.4});
    CHECK(oj.at("target_odd").get<double>() == 0.2);
    const auto tj = trial_to_json(make_trial(5, 2, 1, 0, 0));
    CHECK(tj.contains("d0"));
    CHECK(chi_params_to_json({}).contains("c1_target"));
}
