#include "dtc/circuit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dtc/rng.hpp"

namespace dtc {

void validate(const FloquetParams& params) {
    if (!(params.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    if (!(params.phi >= 0.0 && params.phi <= std::numbers::pi / 2 + 1e-12)) {
        throw std::invalid_argument("phi must lie in [0, pi/2]");
    }
}

DisorderRealization sample_disorder(const HeavyHexLattice& lattice, std::uint64_t seed) {
    DisorderRealization d;
    d.seed = seed;
    d.couplings.reserve(lattice.edges.size());
    for (std::size_t e = 0; e < lattice.edges.size(); ++e) {
        d.couplings.push_back(0.5 + to_unit_interval(substream_seed(seed, e)));
    }
    return d;
}

nlohmann::json disorder_to_json(const HeavyHexLattice& lattice, const DisorderRealization& d) {
    nlohmann::json j;
    j["seed"] = d.seed;
    auto arr = nlohmann::json::array();
    for (std::size_t e = 0; e < lattice.edges.size(); ++e) {
        arr.push_back({lattice.edges[e].first, lattice.edges[e].second, d.couplings.at(e)});
    }
    j["couplings"] = std::move(arr);
    return j;
}

DisorderRealization disorder_from_json(const HeavyHexLattice& lattice, const nlohmann::json& j) {
    DisorderRealization d;
    d.seed = j.at("seed").get<std::uint64_t>();
    d.couplings.assign(lattice.edges.size(), std::nan(""));
    for (const auto& rec : j.at("couplings")) {
        const auto e = lattice.edge_index(rec.at(0).get<std::size_t>(), rec.at(1).get<std::size_t>());
        d.couplings[e] = rec.at(2).get<double>();
    }
    for (double J : d.couplings) {
        if (std::isnan(J)) throw std::invalid_argument("disorder file does not cover every edge");
    }
    return d;
}

Mat4 xxz_gate(double coupling, double epsilon) {
    const cplx i{0.0, 1.0};
    const cplx even_phase = std::exp(-i * coupling);
    const cplx odd_phase = std::exp(i * coupling);
    const double angle = 2.0 * coupling * epsilon;
    Mat4 u = Mat4::Zero();
    u(0, 0) = even_phase;
    u(3, 3) = even_phase;
    u(1, 1) = odd_phase * std::cos(angle);
    u(2, 2) = odd_phase * std::cos(angle);
    u(1, 2) = -i * odd_phase * std::sin(angle);
    u(2, 1) = -i * odd_phase * std::sin(angle);
    return u;
}

Mat2 x_kick_gate(double phi) {
    Mat2 u;
    u << cplx{std::cos(phi), 0.0}, cplx{0.0, -std::sin(phi)},
         cplx{0.0, -std::sin(phi)}, cplx{std::cos(phi), 0.0};
    return u;
}

std::size_t GateSequence::two_qubit_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.size();
    return n;
}

GateSequence build_cycle(const HeavyHexLattice& lattice, const DisorderRealization& disorder,
                         const FloquetParams& params) {
    validate(params);
    if (disorder.couplings.size() != lattice.edges.size()) {
        throw std::invalid_argument("disorder realization does not match the lattice");
    }
    GateSequence seq;
    seq.n_qubits = lattice.n_qubits;
    const Mat2 kick = x_kick_gate(params.phi);
    for (std::size_t q = 0; q < lattice.n_qubits; ++q) seq.kicks.push_back({q, kick});
    for (int k = 1; k <= 3; ++k) {
        for (std::size_t e : lattice.layer_edges(k)) {
            const auto [a, b] = lattice.edges[e];
            seq.layers[k - 1].push_back({a, b, xxz_gate(disorder.couplings[e], params.epsilon)});
        }
    }
    return seq;
}

ProductState neel_state(const HeavyHexLattice& lattice) {
    ProductState s;
    s.spins.reserve(lattice.n_qubits);
    for (auto label : lattice.bipartition) s.spins.push_back(label == Sublattice::A ? 1 : -1);
    return s;
}

ProductState polarized_state(const HeavyHexLattice& lattice) {
    return ProductState{std::vector<int>(lattice.n_qubits, 1)};
}

ProductState product_state_from_bits(const std::string& bits) {
    ProductState s;
    for (char ch : bits) {
        if (ch == '0') s.spins.push_back(1);
        else if (ch == '1') s.spins.push_back(-1);
        else throw std::invalid_argument("bitstring may only contain '0' and '1'");
    }
    return s;
}

}  // namespace dtc
