#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace dtc {

/// Clifford reference angle: 0 for phi <= pi/4, pi/2 above.
[[nodiscard]] double clifford_reference(double phi);

constexpr double kDenominatorGuard = 1e-3;

/// A recovered time series. Entries whose denominator fell below the guard
/// are flagged and hold NaN.
struct RecoveredSeries {
    std::vector<double> values;
    std::vector<bool> flagged;

    [[nodiscard]] std::size_t flagged_count() const;
};

/// Even/odd offsets at the target point and at the Clifford reference.
struct OffsetVector {
    double target_even = 0.0;
    double target_odd = 0.0;
    double reference_even = 0.0;
    double reference_odd = 0.0;

    [[nodiscard]] double target(std::size_t t) const { return t % 2 == 0 ? target_even : target_odd; }
    [[nodiscard]] double reference(std::size_t t) const { return t % 2 == 0 ? reference_even : reference_odd; }
};

/// D^(t) = D(0,phi0,t) (D~(t) - delta(t)) / (D~(0,phi0,t) - delta0(t)), clamped to [-1, 1].
[[nodiscard]] RecoveredSeries renormalize_delta(const std::vector<double>& noisy_target,
                                                const std::vector<double>& noisy_reference,
                                                const std::vector<double>& exact_reference,
                                                const OffsetVector& offsets, double guard = kDenominatorGuard);

/// c1 and c2 at the target and the reference point.
struct ChiParams {
    double c1_target = 0.0;
    double c2_target = 0.0;
    double c1_reference = 0.0;
    double c2_reference = 0.0;
};

/// chi^ = [chi~ + 2 c1 C~ + (N-1) c2] / [chi~_ref + 2 c1' C~_ref + (N-1) c2'],
/// using chi = 1 at the Clifford reference. Clamped to [0, 1].
[[nodiscard]] RecoveredSeries recover_chi(const std::vector<double>& chi_target, const std::vector<double>& corr_target,
                                          const std::vector<double>& chi_reference,
                                          const std::vector<double>& corr_reference, const ChiParams& params,
                                          std::size_t n_qubits, double guard = kDenominatorGuard);

struct FitOptions {
    double ridge = 1e-4;
    /// Reference parameters are scanned on a square grid of this half width.
    double grid_half_width = 0.2;
    std::size_t grid_points = 41;
    double initial_step = 0.01;
    double tolerance = 1e-10;
    std::size_t max_iterations = 20000;
    double guard = kDenominatorGuard;
};

class OptimizationError : public std::runtime_error {
public:
    OptimizationError(const std::string& what, std::vector<double> best, double objective)
        : std::runtime_error(what), best_(std::move(best)), objective_(objective) {}

    [[nodiscard]] const std::vector<double>& best() const { return best_; }
    [[nodiscard]] double objective() const { return objective_; }

private:
    std::vector<double> best_;
    double objective_;
};

struct OffsetFit {
    OffsetVector offsets;
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// Minimizes sum_t (D_sim - D^)^2 + q |delta|^2. The reference offsets are
/// scanned on a grid, the target offsets then solve a ridge least-squares
/// problem in closed form, and the best cell is refined by Nelder-Mead over
/// all four. Points flagged by the guard contribute D_sim^2.
[[nodiscard]] OffsetFit learn_offsets(const std::vector<double>& noisy_target, const std::vector<double>& noisy_reference,
                                      const std::vector<double>& exact_reference,
                                      const std::vector<double>& simulated_target, const FitOptions& options = {});

struct ChiFit {
    ChiParams params;
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// Same machinery as `learn_offsets`, over (c1, (N-1) c2) at both points.
[[nodiscard]] ChiFit learn_chi_params(const std::vector<double>& chi_target, const std::vector<double>& corr_target,
                                      const std::vector<double>& chi_reference,
                                      const std::vector<double>& corr_reference,
                                      const std::vector<double>& simulated_target, std::size_t n_qubits,
                                      const FitOptions& options = {});

/// Transition matrix of independent bit flips on Hamming distances:
/// matrix(d, d') = Prob[d | d'], column-stochastic.
struct FlipKernel {
    std::size_t n = 0;
    double p = 0.0;
    Eigen::MatrixXd matrix;

    [[nodiscard]] std::vector<double> apply(const std::vector<double>& distribution) const;
};

[[nodiscard]] FlipKernel flip_kernel(std::size_t n, double p);

struct FlipFit {
    double p = 0.0;
    double objective = 0.0;
    bool flat = false;
};

/// argmin_p sum_d (Phi~_d - T_p(d, d_cliff))^2 on [0, 1/2] by golden-section
/// search, bracketed by a coarse scan. A flat objective returns p = 0 with a
/// warning on stderr.
[[nodiscard]] FlipFit learn_flip_probability(const std::vector<double>& noisy_distribution, std::size_t d_cliff);

/// A exp(-(d - d0)^2 / 2 sigma^2) / (1 + exp(k d + q)) on d = 0..n.
struct TrialDistribution {
    std::size_t n = 0;
    double d0 = 0.0;
    double sigma = 1.0;
    double k = 0.0;
    double q = 0.0;
    double norm = 1.0;  // A

    [[nodiscard]] std::vector<double> probabilities() const;
};

/// Fixes A by normalization. Throws std::invalid_argument if sigma <= 0.
[[nodiscard]] TrialDistribution make_trial(std::size_t n, double d0, double sigma, double k, double q);

struct DeconvolutionOptions {
    double lambda1 = 10.0;
    double lambda2 = 10.0;
    double tolerance = 1e-10;
    std::size_t max_iterations = 20000;
};

struct DeconvolutionResult {
    TrialDistribution trial;
    std::vector<double> distribution;
    double objective = 0.0;
};

/// Fits the trial family through T_p against Phi~ with penalties on the
/// mean (target mu) and variance (target sigma_var). Nelder-Mead from three
/// seeds, then one restart from the best.
[[nodiscard]] DeconvolutionResult deconvolve_hamming(const std::vector<double>& noisy_distribution, double p,
                                                     double mu, double sigma_var,
                                                     const DeconvolutionOptions& options = {});

/// Variance of the noiseless Hamming distance implied by independent flips:
/// (Var~ - N p (1-p)) / (1 - 2p)^2.
[[nodiscard]] double unflipped_variance(double noisy_variance, std::size_t n, double p);

[[nodiscard]] double total_variation(const std::vector<double>& a, const std::vector<double>& b);

[[nodiscard]] nlohmann::json offsets_to_json(const OffsetVector& o);
[[nodiscard]] nlohmann::json chi_params_to_json(const ChiParams& c);
[[nodiscard]] nlohmann::json trial_to_json(const TrialDistribution& t);

}  // namespace dtc
