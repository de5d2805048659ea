#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dtc/lattice.hpp"

namespace dtc {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
/// Two-qubit operator in the basis |b_first b_second>, index 2*b_first + b_second.
using Mat4 = Eigen::Matrix4cd;

/// Kick angle phi and spin-flip coupling epsilon of the kicked XXZ cycle.
struct FloquetParams {
    double epsilon = 0.0;
    double phi = 0.0;
};

void validate(const FloquetParams& params);

/// One coupling J_ij per lattice edge, indexed like `HeavyHexLattice::edges`.
struct DisorderRealization {
    std::uint64_t seed = 0;
    std::vector<double> couplings;
};

/// J_e = 1 + delta_e with delta_e uniform on [-0.5, 0.5). Edge e draws from
/// its own SplitMix64 substream, so the value does not depend on how many
/// edges precede it or on the platform.
[[nodiscard]] DisorderRealization sample_disorder(const HeavyHexLattice& lattice, std::uint64_t seed);

[[nodiscard]] nlohmann::json disorder_to_json(const HeavyHexLattice& lattice, const DisorderRealization& d);
[[nodiscard]] DisorderRealization disorder_from_json(const HeavyHexLattice& lattice, const nlohmann::json& j);

/// exp[-i J (eps XX + eps YY + ZZ)], evaluated from its block structure.
[[nodiscard]] Mat4 xxz_gate(double coupling, double epsilon);

/// exp(-i phi X) = cos(phi) I - i sin(phi) X.
[[nodiscard]] Mat2 x_kick_gate(double phi);

struct SingleQubitGate {
    std::size_t qubit;
    Mat2 matrix;
};

struct TwoQubitGate {
    std::size_t first;
    std::size_t second;
    Mat4 matrix;
};

/// One Floquet cycle in application order: the kick on every qubit, then
/// the two-qubit layers G1, G2, G3.
struct GateSequence {
    std::size_t n_qubits = 0;
    std::vector<SingleQubitGate> kicks;
    std::array<std::vector<TwoQubitGate>, 3> layers;

    [[nodiscard]] std::size_t two_qubit_count() const;
};

[[nodiscard]] GateSequence build_cycle(const HeavyHexLattice& lattice, const DisorderRealization& disorder,
                                       const FloquetParams& params);

/// Computational-basis product state; s_i = +1 is |0>.
struct ProductState {
    std::vector<int> spins;

    [[nodiscard]] std::size_t size() const { return spins.size(); }
};

[[nodiscard]] ProductState neel_state(const HeavyHexLattice& lattice);
[[nodiscard]] ProductState polarized_state(const HeavyHexLattice& lattice);
/// '0' -> +1, '1' -> -1.
[[nodiscard]] ProductState product_state_from_bits(const std::string& bits);

/// Measurement record, one byte per qubit: 0 for |0> (Z = +1), 1 for |1>.
using Bitstring = std::vector<std::uint8_t>;

}  // namespace dtc
