#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtc/circuit.hpp"

namespace dtc {

/// Synthetic readout noise of the linear form  s~_i = f_i(t) s_i + delta_i(t).
///
/// Attenuation: f_i(t) = exp(-t / tau_i), with tau_i drawn per qubit from
/// [tau_min, tau_max] (tau = 0 disables attenuation). A nonzero
/// `attenuation_eps_slope` adds a parameter-dependent decay rate
/// kappa * epsilon, which breaks the parameter independence the recovery
/// assumes.
///
/// Bias: for parity p = t mod 2 the spin-memory offset is
/// b_p(epsilon) = bias[p] + bias_eps_slope[p] * epsilon. In the `aligned`
/// frame qubit i gets delta_i = s_i(0) * (b_p + jitter_i), so the offset of
/// Delta is exactly b_p when the jitter is zero; in the `uniform` frame
/// delta_i = b_p + jitter_i for every qubit.
///
/// Bit flips: p(t) = min(flip_cap, flip_base + flip_rate * t), followed by
/// an independent readout flip with probability `readout_flip`.
struct NoiseModel {
    enum class BiasFrame { Aligned, Uniform };

    double tau_min = 0.0;
    double tau_max = 0.0;
    double attenuation_eps_slope = 0.0;

    std::array<double, 2> bias{0.0, 0.0};
    std::array<double, 2> bias_eps_slope{0.0, 0.0};
    double bias_jitter = 0.0;
    BiasFrame frame = BiasFrame::Aligned;

    /// Additive offset eta of every two-point correlator.
    double correlator_bias = 0.0;

    double flip_base = 0.0;
    double flip_rate = 0.0;
    double flip_cap = 0.5;
    double readout_flip = 0.0;

    /// Seeds the per-qubit draws of tau_i and the bias jitter.
    std::uint64_t seed = 0;

    /// Uniform attenuation f(t) = exp(-t / tau).
    [[nodiscard]] static NoiseModel uniform_decay(double tau);
};

/// Throws std::invalid_argument when a schedule leaves its allowed range.
void validate(const NoiseModel& model);

[[nodiscard]] double attenuation(const NoiseModel& model, std::size_t qubit, std::size_t t, double epsilon = 0.0);
[[nodiscard]] double spin_offset(const NoiseModel& model, std::size_t t, double epsilon = 0.0);
[[nodiscard]] double site_bias(const NoiseModel& model, std::size_t qubit, int initial_spin, std::size_t t,
                               double epsilon = 0.0);
[[nodiscard]] double flip_probability(const NoiseModel& model, std::size_t t);

[[nodiscard]] std::vector<double> corrupt_expectations(const std::vector<double>& z, const NoiseModel& model,
                                                       std::size_t t, const ProductState& initial,
                                                       double epsilon = 0.0);

/// <Z_i Z_j>~ = f_i f_j <Z_i Z_j> + eta off the diagonal, clamped to [-1, 1].
[[nodiscard]] std::vector<double> corrupt_correlators(const std::vector<double>& zz, std::size_t n,
                                                      const NoiseModel& model, std::size_t t, double epsilon = 0.0);

/// Flips every bit with probability p(t), then applies readout flips.
/// Sample k uses RNG substream k of `seed`, so results do not depend on how
/// the work is split.
[[nodiscard]] std::vector<Bitstring> corrupt_bits(const std::vector<Bitstring>& samples, const NoiseModel& model,
                                                  std::size_t t, std::uint64_t seed);

[[nodiscard]] nlohmann::json noise_to_json(const NoiseModel& model);
[[nodiscard]] NoiseModel noise_from_json(const nlohmann::json& j);

}  // namespace dtc
