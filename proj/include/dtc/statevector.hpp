#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "dtc/circuit.hpp"

namespace dtc {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxStateVectorQubits = 24;

/// Dense state of N <= 24 qubits. Bit i of an amplitude index is qubit i,
/// set when the qubit is |1> (spin -1).
class StateVector {
public:
    explicit StateVector(std::size_t n_qubits);

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] const std::vector<cplx>& amplitudes() const { return amps_; }
    [[nodiscard]] std::vector<cplx>& amplitudes() { return amps_; }
    [[nodiscard]] double norm() const;

    void apply(const SingleQubitGate& gate);
    void apply(const TwoQubitGate& gate);

private:
    std::size_t n_qubits_;
    std::vector<cplx> amps_;
};

[[nodiscard]] StateVector init_product(const ProductState& state);

/// Applies one Floquet cycle in place. Norm drift beyond 1e-10 is
/// renormalized with a warning on stderr.
void apply_cycle(StateVector& sv, const GateSequence& cycle);

[[nodiscard]] double expect_z(const StateVector& sv, std::size_t i);
[[nodiscard]] double expect_zz(const StateVector& sv, std::size_t i, std::size_t j);
[[nodiscard]] std::vector<double> expect_z_all(const StateVector& sv);
/// Full symmetric <Z_i Z_j> matrix (row-major, N x N, unit diagonal).
[[nodiscard]] std::vector<double> expect_zz_matrix(const StateVector& sv);

/// Exact Hamming-distance distribution relative to `reference`, length N+1.
[[nodiscard]] std::vector<double> exact_hamming_distribution(const StateVector& sv, const ProductState& reference);

[[nodiscard]] std::vector<Bitstring> sample_bits(const StateVector& sv, std::size_t shots, std::uint64_t seed);

/// Little-endian float64 pairs (re, im), no header.
void dump_amplitudes(const StateVector& sv, const std::filesystem::path& path);

}  // namespace dtc
