#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "dtc/circuit.hpp"
#include "dtc/lattice.hpp"
#include "dtc/statevector.hpp"

namespace dtc {

using CMatrix = Eigen::MatrixXcd;

struct TruncationPolicy {
    std::size_t chi_max = 64;
    /// Singular values below cutoff * ||s|| are dropped.
    double cutoff = 1e-12;
};

/// Matrix product state on the unrolled chain. `sites[p][s]` is the
/// (left bond) x (right bond) matrix of chain site p for physical index s
/// (0 = |0>). Chain site p holds lattice qubit `order.qubit[p]`.
///
/// All mutating operations leave the state right-canonical with the
/// orthogonality center on site 0 and unit norm.
class Mps {
public:
    Mps() = default;
    Mps(UnrollOrder order, std::vector<std::array<CMatrix, 2>> sites, TruncationPolicy policy);

    [[nodiscard]] std::size_t size() const { return sites_.size(); }
    [[nodiscard]] const UnrollOrder& order() const { return order_; }
    [[nodiscard]] const TruncationPolicy& policy() const { return policy_; }
    [[nodiscard]] double truncation_error() const { return truncation_error_; }
    [[nodiscard]] const std::vector<std::array<CMatrix, 2>>& sites() const { return sites_; }
    [[nodiscard]] std::vector<std::array<CMatrix, 2>>& sites() { return sites_; }

    /// Bond dimensions at cuts 0..N (the outer two are 1).
    [[nodiscard]] std::vector<std::size_t> bond_dims() const;
    [[nodiscard]] std::size_t max_bond() const;
    [[nodiscard]] double norm() const;

    /// Largest deviation of sum_s A[s] A[s]^dagger from the identity over sites 1..N-1.
    [[nodiscard]] double right_canonical_defect() const;

    void add_truncation_error(double w) { truncation_error_ += w; }

private:
    UnrollOrder order_;
    std::vector<std::array<CMatrix, 2>> sites_;
    TruncationPolicy policy_;
    double truncation_error_ = 0.0;
};

/// Bond-dimension-1 MPS of a product state.
[[nodiscard]] Mps product_mps(const ProductState& state, const UnrollOrder& order, TruncationPolicy policy);

/// Per-site operator tensors. `sites[p][2 * out + in]` is the
/// (left bond) x (right bond) matrix for that physical transition.
struct Mpo {
    std::vector<std::array<CMatrix, 4>> sites;

    [[nodiscard]] std::size_t size() const { return sites.size(); }
    [[nodiscard]] std::vector<std::size_t> bond_dims() const;
    [[nodiscard]] std::size_t max_bond() const;
};

[[nodiscard]] Mpo identity_mpo(std::size_t n_sites);

/// Exact MPO of a layer of commuting two-qubit gates on disjoint qubits.
/// Each gate is split into two bond-4 tensors by SVD; the bond at a chain
/// cut is the product of the bonds of all gates spanning it, i.e. 4^k.
/// Throws std::invalid_argument if two gates share a qubit.
[[nodiscard]] Mpo layer_to_mpo(const std::vector<TwoQubitGate>& gates, const UnrollOrder& order);

/// Contracts the MPO into the MPS (zip-up from the left, truncating at
/// 2 * chi_max), then sweeps right to left with exact Schmidt truncation to
/// chi_max. The discarded weight of both passes is added to the state's
/// truncation error.
void apply_mpo(Mps& mps, const Mpo& mpo);

/// Applies a single-qubit gate to the site tensor of `qubit`.
void apply_local(Mps& mps, std::size_t qubit, const Mat2& gate);

/// One Floquet cycle with per-layer MPOs prepared once.
class MpsCycle {
public:
    MpsCycle(const GateSequence& cycle, const UnrollOrder& order);

    void apply(Mps& mps) const;
    [[nodiscard]] const std::array<Mpo, 3>& layer_mpos() const { return mpos_; }

private:
    std::vector<SingleQubitGate> kicks_;
    std::array<Mpo, 3> mpos_;
};

/// Convenience wrapper that builds the MPOs for a single use.
void evolve_cycle_mps(Mps& mps, const GateSequence& cycle);

[[nodiscard]] double mps_expect_z(const Mps& mps, std::size_t qubit);
[[nodiscard]] double mps_expect_zz(const Mps& mps, std::size_t qubit_i, std::size_t qubit_j);
/// <Z_q> for every lattice qubit q.
[[nodiscard]] std::vector<double> mps_expect_z_all(const Mps& mps);
/// Row-major N x N matrix of <Z_i Z_j> in lattice indices.
[[nodiscard]] std::vector<double> mps_expect_zz_matrix(const Mps& mps);

/// Perfect sampling in the computational basis; bits in lattice order.
[[nodiscard]] std::vector<Bitstring> mps_sample_bits(const Mps& mps, std::size_t shots, std::uint64_t seed);

/// Dense amplitudes in the statevector bit convention (lattice qubit q = bit q).
[[nodiscard]] StateVector mps_to_statevector(const Mps& mps);

/// Opaque binary checkpoint.
void save_mps(const Mps& mps, const std::filesystem::path& path);
[[nodiscard]] Mps load_mps(const std::filesystem::path& path);

}  // namespace dtc
