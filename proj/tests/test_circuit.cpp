#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "dtc/circuit.hpp"
#include "oracles.hpp"

using namespace dtc;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("xxz gate matches the generator exponential") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> uj(0.5, 1.5), ue(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const double j = uj(gen), eps = ue(gen);
        const Mat4 u = xxz_gate(j, eps);
        CHECK(max_abs(u - oracle::xxz(j, eps)) < 1e-12);
        CHECK(max_abs(u.adjoint() * u - Mat4::Identity()) < 1e-12);
        const Mat4 zz = oracle::kron(oracle::pauli_z(), oracle::pauli_z());
        CHECK(max_abs(zz * u - u * zz) < 1e-12);
    }
}

TEST_CASE("xxz gate at eps = 0 is diagonal") {
    const double j = 0.83;
    const Mat4 u = xxz_gate(j, 0.0);
    const cplx m = std::exp(cplx(0, -j)), p = std::exp(cplx(0, j));
    Mat4 expected = Mat4::Zero();
    expected.diagonal() << m, p, p, m;
    CHECK(max_abs(u - expected) < 1e-15);
}

TEST_CASE("xxz gate off-diagonal magnitude at J = 1, eps = 0.5") {
    const Mat4 u = xxz_gate(1.0, 0.5);
    CHECK(std::abs(u(1, 2)) == doctest::Approx(std::abs(std::sin(1.0))).epsilon(1e-12));
    CHECK(std::abs(u(2, 1)) == doctest::Approx(std::abs(std::sin(1.0))).epsilon(1e-12));
}

TEST_CASE("x kick") {
    CHECK(max_abs(x_kick_gate(0.0) - Mat2::Identity()) < 1e-15);
    CHECK(max_abs(x_kick_gate(kPi / 2) - cplx(0, -1) * oracle::pauli_x()) < 1e-15);
    const Mat2 quarter = (Mat2::Identity() - cplx(0, 1) * Mat2(oracle::pauli_x())) / std::sqrt(2.0);
    CHECK(max_abs(x_kick_gate(kPi / 4) - quarter) < 1e-15);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> uphi(0.0, kPi / 2);
    for (int k = 0; k < 20; ++k) {
        const double phi = uphi(gen);
        const Mat2 u = x_kick_gate(phi);
        CHECK(max_abs(u.adjoint() * u - Mat2::Identity()) < 1e-12);
        CHECK(max_abs(u - oracle::x_kick(phi)) < 1e-12);
    }
}

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(validate(FloquetParams{0.0, 0.0}));
    CHECK_NOTHROW(validate(FloquetParams{0.3, kPi / 2}));
    CHECK_THROWS_AS(validate(FloquetParams{-0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(validate(FloquetParams{0.1, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(validate(FloquetParams{0.1, 1.6}), std::invalid_argument);
}

TEST_CASE("disorder range, determinism and mean") {
    const auto lat = build_lattice(3, 7);
    const auto d = sample_disorder(lat, 42);
    REQUIRE(d.couplings.size() == lat.edges.size());
    double sum = 0.0;
    for (double j : d.couplings) {
        CHECK(j >= 0.5);
        CHECK(j <= 1.5);
        sum += j;
    }
    CHECK(sum / static_cast<double>(d.couplings.size()) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(sample_disorder(lat, 42).couplings == d.couplings);
    CHECK(sample_disorder(lat, 43).couplings != d.couplings);
}

TEST_CASE("disorder of an edge does not depend on the lattice size") {
    // Substreams are per edge index, so the first edge of two lattices with
    // the same seed draws the same value.
    const auto a = sample_disorder(build_lattice(1, 1), 5);
    const auto b = sample_disorder(build_lattice(2, 2), 5);
    CHECK(a.couplings[0] == b.couplings[0]);
}

TEST_CASE("disorder JSON round trip") {
    const auto lat = build_lattice(2, 2);
    const auto d = sample_disorder(lat, 9);
    const auto j = disorder_to_json(lat, d);
    CHECK(j.at("seed").get<std::uint64_t>() == 9);
    CHECK(j.at("couplings").size() == lat.edges.size());
    const auto back = disorder_from_json(lat, j);
    CHECK(back.couplings == d.couplings);

    auto partial = j;
    partial["couplings"].erase(partial["couplings"].begin());
    CHECK_THROWS_AS((void)disorder_from_json(lat, partial), std::invalid_argument);
}

TEST_CASE("cycle layout") {
    const auto lat = build_lattice(2, 2);
    const auto d = sample_disorder(lat, 1);
    const auto cyc = build_cycle(lat, d, {0.05, 0.45 * kPi});
    CHECK(cyc.n_qubits == 35);
    CHECK(cyc.kicks.size() == 35);
    CHECK(cyc.two_qubit_count() == lat.edges.size());
    for (int k = 0; k < 3; ++k) {
        std::set<std::size_t> used;
        for (const auto& g : cyc.layers[static_cast<std::size_t>(k)]) {
            CHECK(used.insert(g.first).second);
            CHECK(used.insert(g.second).second);
            CHECK(lat.layer_of_edge[lat.edge_index(g.first, g.second)] == k + 1);
        }
    }
    const auto again = build_cycle(lat, d, {0.05, 0.45 * kPi});
    for (int k = 0; k < 3; ++k) {
        const auto& a = cyc.layers[static_cast<std::size_t>(k)];
        const auto& b = again.layers[static_cast<std::size_t>(k)];
        REQUIRE(a.size() == b.size());
        for (std::size_t g = 0; g < a.size(); ++g) CHECK(a[g].matrix == b[g].matrix);
    }

    DisorderRealization wrong = d;
    wrong.couplings.pop_back();
    CHECK_THROWS_AS((void)build_cycle(lat, wrong, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("classical point has only diagonal gates") {
    const auto lat = build_lattice(1, 1);
    const auto cyc = build_cycle(lat, sample_disorder(lat, 2), {0.0, 0.0});
    for (const auto& k : cyc.kicks) CHECK(std::abs(k.matrix(0, 1)) == 0.0);
    for (const auto& layer : cyc.layers) {
        for (const auto& g : layer) {
            Mat4 off = g.matrix;
            off.diagonal().setZero();
            CHECK(max_abs(off) == 0.0);
        }
    }
}

TEST_CASE("initial states") {
    const auto lat = build_lattice(1, 1);
    const auto pol = polarized_state(lat);
    for (int s : pol.spins) CHECK(s == 1);

    const auto neel = neel_state(lat);
    REQUIRE(neel.size() == 12);
    for (std::size_t q = 0; q < 12; ++q) CHECK(neel.spins[q] == (lat.bipartition[q] == Sublattice::A ? 1 : -1));
    for (const auto& [i, j] : lat.edges) CHECK(neel.spins[i] == -neel.spins[j]);
    const auto lat2 = build_lattice(2, 2);
    const auto neel2 = neel_state(lat2);
    for (const auto& [i, j] : lat2.edges) CHECK(neel2.spins[i] == -neel2.spins[j]);

    const auto custom = product_state_from_bits("0110");
    CHECK(custom.spins == std::vector<int>{1, -1, -1, 1});
    CHECK_THROWS_AS((void)product_state_from_bits("01x"), std::invalid_argument);
}
