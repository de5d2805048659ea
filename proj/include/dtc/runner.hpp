#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtc/circuit.hpp"
#include "dtc/lattice.hpp"
#include "dtc/mps.hpp"
#include "dtc/noise.hpp"
#include "dtc/observables.hpp"
#include "dtc/recovery.hpp"

namespace dtc {

enum class BackendKind { Exact, Mps };

struct BackendConfig {
    BackendKind kind = BackendKind::Mps;
    TruncationPolicy policy;
};

struct RecoveryConfig {
    FitOptions fit;
    DeconvolutionOptions deconvolution;
    /// Lattice on which offsets and chi parameters are learned.
    std::size_t small_rows = 1;
    std::size_t small_cols = 1;
    bool hamming = true;
};

struct RunConfig {
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<double> epsilons{0.05};
    std::vector<double> phis{0.45 * 3.14159265358979323846};
    std::size_t cycles = 30;
    /// "neel", "polarized" or a custom bitstring ('0' = +1), one character per qubit.
    std::string initial_state = "neel";
    BackendConfig backend;
    std::size_t shots = 1000;
    std::uint64_t seed = 0;
    std::optional<NoiseModel> noise;
    std::optional<RecoveryConfig> recovery;
    std::filesystem::path output_dir = "out";
    /// Worker threads for grid runs; 0 picks the hardware concurrency.
    std::size_t threads = 0;
    bool checkpoint = false;
};

/// Reads a run configuration. Angles may be given in radians (`phi`) or in
/// units of pi (`phi_pi`). Unknown keys are rejected.
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& j);
/// Every field, defaults included.
[[nodiscard]] nlohmann::json config_to_json(const RunConfig& config);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Throws std::invalid_argument, or CapacityError for an exact backend on
/// more than 24 qubits.
void validate(const RunConfig& config);

[[nodiscard]] ProductState initial_state(const RunConfig& config, const HeavyHexLattice& lattice);

/// Observables per cycle t = 0..T.
struct TimeSeries {
    std::vector<double> delta;
    std::vector<double> chi_nn;
    std::vector<double> chi_sg;
    std::vector<double> corr_nn;
    std::vector<double> qfi;
    std::vector<double> hamming_mean;
    std::vector<double> hamming_var;
    std::vector<std::vector<double>> per_site_z;
    std::vector<std::vector<double>> hamming;

    [[nodiscard]] std::size_t size() const { return delta.size(); }
};

struct RecoveryReport {
    double reference_phi = 0.0;
    OffsetFit offsets;
    ChiFit chi;
    RecoveredSeries delta;
    RecoveredSeries chi_nn;
    std::vector<double> flip_probability;
    std::vector<std::optional<DeconvolutionResult>> hamming;
};

struct PointResult {
    double epsilon = 0.0;
    double phi = 0.0;
    std::size_t n_qubits = 0;
    TimeSeries ideal;
    /// Present when a noise model is configured: the same channels after
    /// corruption (Hamming data from corrupted samples).
    std::optional<TimeSeries> noisy;
    std::optional<RecoveryReport> recovery;
    std::size_t max_bond = 0;
    double truncation_error = 0.0;
};

/// Evolves T cycles and records all observables, then applies noise and
/// recovery when configured. Deterministic given the config.
[[nodiscard]] PointResult run_point(const RunConfig& config, double epsilon, double phi);

/// Writes series.csv, hamming*.json and recovery.json under `dir`.
void write_point(const PointResult& result, const std::filesystem::path& dir);

/// Runs every (epsilon, phi) of the config and writes one directory per point
/// plus `config.resolved`.
void run_simulate(const RunConfig& config);

/// Delta_MBL and Delta_DTC per grid cell, epsilon-major. Cells run on a
/// thread pool; the result does not depend on the thread count.
[[nodiscard]] std::vector<PhasePoint> run_phase_diagram(const RunConfig& config);
[[nodiscard]] nlohmann::json phase_diagram_to_json(const std::vector<PhasePoint>& grid);

/// Noisy channels measured at one parameter point.
struct MeasuredChannels {
    std::vector<double> delta;
    std::vector<double> chi_nn;
    std::vector<double> corr_nn;
};

/// Reads `delta`, `chi_nn`, `corr_nn` from a CSV, preferring the `_noisy`
/// columns when present.
[[nodiscard]] MeasuredChannels read_channels_csv(const std::filesystem::path& path);

/// Measured inputs to `recover_measured`. Missing reference or small-system
/// channels are synthesized from the config's noise model.
struct MeasuredInputs {
    MeasuredChannels target;
    std::optional<MeasuredChannels> reference;
    std::optional<MeasuredChannels> small_target;
    std::optional<MeasuredChannels> small_reference;
};

/// Recovers Delta and chi for the config's first (epsilon, phi).
[[nodiscard]] RecoveryReport recover_measured(const RunConfig& config, const MeasuredInputs& inputs);

[[nodiscard]] nlohmann::json recovery_to_json(const RecoveryReport& report);

/// Delta(t) at a Clifford point with epsilon = 0: 1 for phi0 = 0, (-1)^t for phi0 = pi/2.
[[nodiscard]] std::vector<double> clifford_delta(double phi0, std::size_t cycles);

}  // namespace dtc
