#pragma once

#include <vector>

#include "dtc/circuit.hpp"
#include "dtc/lattice.hpp"

namespace dtc {

/// Spin memory (1/N) sum_i s_i(0) <Z_i(t)>.
[[nodiscard]] double delta(const std::vector<double>& z, const ProductState& initial);

/// Mean of <Z_i Z_j>^2 over `pairs`; `zz` is the row-major N x N correlator matrix.
/// Nearest-neighbour pairs give chi(t), all pairs the Edwards-Anderson chi_SG.
[[nodiscard]] double chi(const std::vector<Edge>& pairs, const std::vector<double>& zz, std::size_t n);

/// Mean of <Z_i Z_j> over `pairs` (the C(t) entering correlator recovery).
[[nodiscard]] double correlator_mean(const std::vector<Edge>& pairs, const std::vector<double>& zz, std::size_t n);

[[nodiscard]] std::vector<Edge> all_pairs(std::size_t n);

struct PhasePoint {
    double epsilon = 0.0;
    double phi = 0.0;
    double delta_mbl = 0.0;
    double delta_dtc = 0.0;
    std::size_t cycles = 0;
};

/// Mean of |Delta(t)| and of (-1)^t Delta(t) over t = 0..T, normalized by
/// the T+1 terms actually summed.
[[nodiscard]] PhasePoint phase_order_params(const std::vector<double>& delta_series, double epsilon = 0.0,
                                            double phi = 0.0);
[[nodiscard]] PhasePoint phase_order_params(const std::vector<std::vector<double>>& z_series,
                                            const ProductState& initial, double epsilon = 0.0, double phi = 0.0);

/// Number of positions where a sample disagrees with the initial state.
[[nodiscard]] std::size_t hamming_distance(const Bitstring& sample, const ProductState& initial);

/// Normalized histogram of Hamming distances, length N+1.
[[nodiscard]] std::vector<double> hamming_distribution(const std::vector<Bitstring>& samples,
                                                       const ProductState& initial);

[[nodiscard]] double distribution_mean(const std::vector<double>& phi);
[[nodiscard]] double distribution_variance(const std::vector<double>& phi);

/// (1/4) sum_ij s_i s_j (<Z_i Z_j> - <Z_i><Z_j>), the variance of the
/// Hamming distance.
[[nodiscard]] double qfi(const std::vector<double>& z, const std::vector<double>& zz, const ProductState& initial);

/// Expected Hamming distance (N/2)(1 - Delta).
[[nodiscard]] double hamming_mean_from_delta(double delta_value, std::size_t n);

struct Spectrum {
    std::vector<double> omega;
    std::vector<double> magnitude;
};

/// |sum_t x_t e^{-i omega t}| on omega_k = pi k / M, k = 0..M, M = L/2 for a
/// series of length L. For even L these are the non-negative DFT bins.
[[nodiscard]] Spectrum fourier_spectrum(const std::vector<double>& series);

}  // namespace dtc
