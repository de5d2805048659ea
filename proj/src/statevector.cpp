#include "dtc/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "dtc/rng.hpp"

namespace dtc {

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits > kMaxStateVectorQubits) {
        throw CapacityError("statevector backend supports at most 24 qubits, got " + std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    amps_[0] = 1.0;
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
}

void StateVector::apply(const SingleQubitGate& gate) {
    if (gate.qubit >= n_qubits_) throw std::out_of_range("gate qubit index out of range");
    const std::size_t bit = std::size_t{1} << gate.qubit;
    const auto& m = gate.matrix;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const cplx a0 = amps_[i];
        const cplx a1 = amps_[i | bit];
        amps_[i] = m(0, 0) * a0 + m(0, 1) * a1;
        amps_[i | bit] = m(1, 0) * a0 + m(1, 1) * a1;
    }
}

void StateVector::apply(const TwoQubitGate& gate) {
    if (gate.first >= n_qubits_ || gate.second >= n_qubits_) {
        throw std::out_of_range("gate qubit index out of range");
    }
    if (gate.first == gate.second) throw std::invalid_argument("two-qubit gate on a single qubit");
    const std::size_t hi = std::size_t{1} << gate.first;
    const std::size_t lo = std::size_t{1} << gate.second;
    const auto& m = gate.matrix;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & (hi | lo)) continue;
        const std::size_t idx[4] = {i, i | lo, i | hi, i | hi | lo};
        cplx in[4];
        for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
        for (int r = 0; r < 4; ++r) {
            amps_[idx[r]] = m(r, 0) * in[0] + m(r, 1) * in[1] + m(r, 2) * in[2] + m(r, 3) * in[3];
        }
    }
}

StateVector init_product(const ProductState& state) {
    StateVector sv(state.size());
    std::size_t index = 0;
    for (std::size_t q = 0; q < state.size(); ++q) {
        if (state.spins[q] == -1) index |= std::size_t{1} << q;
        else if (state.spins[q] != 1) throw std::invalid_argument("spins must be +1 or -1");
    }
    auto& a = sv.amplitudes();
    a[0] = 0.0;
    a[index] = 1.0;
    return sv;
}

void apply_cycle(StateVector& sv, const GateSequence& cycle) {
    if (cycle.n_qubits != sv.n_qubits()) throw std::invalid_argument("cycle and state sizes differ");
    for (const auto& g : cycle.kicks) sv.apply(g);
    for (const auto& layer : cycle.layers) {
        for (const auto& g : layer) sv.apply(g);
    }
    const double n = sv.norm();
    if (std::abs(n - 1.0) > 1e-10) {
        std::cerr << "warning: statevector norm drifted to " << n << ", renormalizing\n";
        for (auto& a : sv.amplitudes()) a /= n;
    }
}

double expect_z(const StateVector& sv, std::size_t i) {
    if (i >= sv.n_qubits()) throw std::out_of_range("qubit index out of range");
    const std::size_t bit = std::size_t{1} << i;
    double s = 0.0;
    const auto& a = sv.amplitudes();
    for (std::size_t k = 0; k < a.size(); ++k) s += (k & bit) ? -std::norm(a[k]) : std::norm(a[k]);
    return std::clamp(s, -1.0, 1.0);
}

double expect_zz(const StateVector& sv, std::size_t i, std::size_t j) {
    if (i >= sv.n_qubits() || j >= sv.n_qubits()) throw std::out_of_range("qubit index out of range");
    const std::size_t mask = (std::size_t{1} << i) ^ (std::size_t{1} << j);
    double s = 0.0;
    const auto& a = sv.amplitudes();
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += (std::popcount(k & mask) % 2) ? -std::norm(a[k]) : std::norm(a[k]);
    }
    return std::clamp(s, -1.0, 1.0);
}

std::vector<double> expect_z_all(const StateVector& sv) {
    const std::size_t n = sv.n_qubits();
    std::vector<double> z(n, 0.0);
    const auto& a = sv.amplitudes();
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double p = std::norm(a[k]);
        if (p == 0.0) continue;
        for (std::size_t q = 0; q < n; ++q) z[q] += ((k >> q) & 1U) ? -p : p;
    }
    for (auto& v : z) v = std::clamp(v, -1.0, 1.0);
    return z;
}

std::vector<double> expect_zz_matrix(const StateVector& sv) {
    const std::size_t n = sv.n_qubits();
    std::vector<double> zz(n * n, 0.0);
    std::vector<double> spin(n);
    const auto& a = sv.amplitudes();
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double p = std::norm(a[k]);
        if (p == 0.0) continue;
        for (std::size_t q = 0; q < n; ++q) spin[q] = ((k >> q) & 1U) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = p * spin[i];
            for (std::size_t j = i + 1; j < n; ++j) zz[i * n + j] += pi * spin[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        zz[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            zz[i * n + j] = std::clamp(zz[i * n + j], -1.0, 1.0);
            zz[j * n + i] = zz[i * n + j];
        }
    }
    return zz;
}

std::vector<double> exact_hamming_distribution(const StateVector& sv, const ProductState& reference) {
    if (reference.size() != sv.n_qubits()) throw std::invalid_argument("reference size mismatch");
    std::size_t ref_bits = 0;
    for (std::size_t q = 0; q < reference.size(); ++q) {
        if (reference.spins[q] == -1) ref_bits |= std::size_t{1} << q;
    }
    std::vector<double> phi(sv.n_qubits() + 1, 0.0);
    const auto& a = sv.amplitudes();
    for (std::size_t k = 0; k < a.size(); ++k) phi[std::popcount(k ^ ref_bits)] += std::norm(a[k]);
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    for (auto& v : phi) v /= total;
    return phi;
}

std::vector<Bitstring> sample_bits(const StateVector& sv, std::size_t shots, std::uint64_t seed) {
    if (shots == 0) throw std::invalid_argument("shots must be positive");
    const auto& a = sv.amplitudes();
    std::vector<double> cdf(a.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += std::norm(a[k]);
        cdf[k] = acc;
    }
    Rng rng(seed);
    std::vector<Bitstring> out;
    out.reserve(shots);
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), a.size() - 1);
        Bitstring b(sv.n_qubits());
        for (std::size_t q = 0; q < b.size(); ++q) b[q] = static_cast<std::uint8_t>((k >> q) & 1U);
        out.push_back(std::move(b));
    }
    return out;
}

void dump_amplitudes(const StateVector& sv, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little, "amplitude dump assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    for (const auto& a : sv.amplitudes()) {
        const double parts[2] = {a.real(), a.imag()};
        os.write(reinterpret_cast<const char*>(parts), sizeof(parts));
    }
}

}  // namespace dtc
