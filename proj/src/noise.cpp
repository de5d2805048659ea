#include "dtc/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dtc/rng.hpp"

namespace dtc {

namespace {

constexpr std::uint64_t kTauStream = 0;
constexpr std::uint64_t kJitterStream = std::uint64_t{1} << 32;

double qubit_draw(const NoiseModel& model, std::uint64_t stream) {
    return to_unit_interval(substream_seed(model.seed, stream));
}

bool attenuation_enabled(const NoiseModel& model) { return model.tau_max > 0.0; }

}  // namespace

NoiseModel NoiseModel::uniform_decay(double tau) {
    NoiseModel m;
    m.tau_min = tau;
    m.tau_max = tau;
    return m;
}

void validate(const NoiseModel& model) {
    if (model.tau_min < 0.0 || model.tau_max < model.tau_min) {
        throw std::invalid_argument("noise: need 0 <= tau_min <= tau_max");
    }
    if (attenuation_enabled(model) && model.tau_min <= 0.0) {
        throw std::invalid_argument("noise: tau_min must be positive when attenuation is enabled");
    }
    if (model.attenuation_eps_slope < 0.0) throw std::invalid_argument("noise: attenuation slope must be >= 0");
    for (int p = 0; p < 2; ++p) {
        if (std::abs(model.bias[p]) + std::abs(model.bias_jitter) > 1.0) {
            throw std::invalid_argument("noise: |bias| must not exceed 1");
        }
    }
    if (std::abs(model.correlator_bias) > 1.0) throw std::invalid_argument("noise: |correlator_bias| must not exceed 1");
    if (model.flip_base < 0.0 || model.flip_rate < 0.0 || model.flip_cap < 0.0 || model.flip_cap > 0.5 ||
        model.flip_base > 0.5) {
        throw std::invalid_argument("noise: flip schedule must stay within [0, 1/2]");
    }
    if (model.readout_flip < 0.0 || model.readout_flip > 0.5) {
        throw std::invalid_argument("noise: readout flip probability must lie in [0, 1/2]");
    }
}

double attenuation(const NoiseModel& model, std::size_t qubit, std::size_t t, double epsilon) {
    double rate = model.attenuation_eps_slope * epsilon;
    if (attenuation_enabled(model)) {
        const double tau = model.tau_min + (model.tau_max - model.tau_min) * qubit_draw(model, kTauStream + qubit);
        rate += 1.0 / tau;
    }
    return std::exp(-rate * static_cast<double>(t));
}

double spin_offset(const NoiseModel& model, std::size_t t, double epsilon) {
    const std::size_t p = t % 2;
    return model.bias[p] + model.bias_eps_slope[p] * epsilon;
}

double site_bias(const NoiseModel& model, std::size_t qubit, int initial_spin, std::size_t t, double epsilon) {
    double b = spin_offset(model, t, epsilon);
    if (model.bias_jitter != 0.0) b += model.bias_jitter * (2.0 * qubit_draw(model, kJitterStream + qubit) - 1.0);
    b = std::clamp(b, -1.0, 1.0);
    return model.frame == NoiseModel::BiasFrame::Aligned ? initial_spin * b : b;
}

double flip_probability(const NoiseModel& model, std::size_t t) {
    return std::min(model.flip_cap, model.flip_base + model.flip_rate * static_cast<double>(t));
}

std::vector<double> corrupt_expectations(const std::vector<double>& z, const NoiseModel& model, std::size_t t,
                                         const ProductState& initial, double epsilon) {
    if (z.size() != initial.size()) throw std::invalid_argument("corrupt_expectations: length mismatch");
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double v = attenuation(model, i, t, epsilon) * z[i] + site_bias(model, i, initial.spins[i], t, epsilon);
        out[i] = std::clamp(v, -1.0, 1.0);
    }
    return out;
}

std::vector<double> corrupt_correlators(const std::vector<double>& zz, std::size_t n, const NoiseModel& model,
                                        std::size_t t, double epsilon) {
    if (zz.size() != n * n) throw std::invalid_argument("corrupt_correlators: shape mismatch");
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = attenuation(model, i, t, epsilon);
    std::vector<double> out(zz.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = i == j ? 1.0 : std::clamp(f[i] * f[j] * zz[i * n + j] + model.correlator_bias, -1.0, 1.0);
        }
    }
    return out;
}

std::vector<Bitstring> corrupt_bits(const std::vector<Bitstring>& samples, const NoiseModel& model, std::size_t t,
                                    std::uint64_t seed) {
    const double p = flip_probability(model, t);
    const double r = model.readout_flip;
    std::vector<Bitstring> out = samples;
    if (p == 0.0 && r == 0.0) return out;
    for (std::size_t k = 0; k < out.size(); ++k) {
        Rng rng(seed, k);
        for (auto& bit : out[k]) {
            if (rng.bernoulli(p)) bit ^= 1U;
            if (rng.bernoulli(r)) bit ^= 1U;
        }
    }
    return out;
}

nlohmann::json noise_to_json(const NoiseModel& m) {
    return {
        {"tau_min", m.tau_min},
        {"tau_max", m.tau_max},
        {"attenuation_eps_slope", m.attenuation_eps_slope},
        {"bias", m.bias},
        {"bias_eps_slope", m.bias_eps_slope},
        {"bias_jitter", m.bias_jitter},
        {"bias_frame", m.frame == NoiseModel::BiasFrame::Aligned ? "aligned" : "uniform"},
        {"correlator_bias", m.correlator_bias},
        {"flip_base", m.flip_base},
        {"flip_rate", m.flip_rate},
        {"flip_cap", m.flip_cap},
        {"readout_flip", m.readout_flip},
        {"seed", m.seed},
    };
}

NoiseModel noise_from_json(const nlohmann::json& j) {
    NoiseModel m;
    if (j.contains("tau")) m.tau_min = m.tau_max = j.at("tau").get<double>();
    m.tau_min = j.value("tau_min", m.tau_min);
    m.tau_max = j.value("tau_max", m.tau_max);
    m.attenuation_eps_slope = j.value("attenuation_eps_slope", 0.0);
    if (j.contains("bias")) m.bias = j.at("bias").get<std::array<double, 2>>();
    if (j.contains("bias_eps_slope")) m.bias_eps_slope = j.at("bias_eps_slope").get<std::array<double, 2>>();
    m.bias_jitter = j.value("bias_jitter", 0.0);
    const std::string frame = j.value("bias_frame", std::string("aligned"));
    if (frame == "aligned") m.frame = NoiseModel::BiasFrame::Aligned;
    else if (frame == "uniform") m.frame = NoiseModel::BiasFrame::Uniform;
    else throw std::invalid_argument("noise: unknown bias_frame '" + frame + "'");
    m.correlator_bias = j.value("correlator_bias", 0.0);
    m.flip_base = j.value("flip_base", 0.0);
    m.flip_rate = j.value("flip_rate", 0.0);
    m.flip_cap = j.value("flip_cap", 0.5);
    m.readout_flip = j.value("readout_flip", 0.0);
    m.seed = j.value("seed", std::uint64_t{0});
    validate(m);
    return m;
}

}  // namespace dtc
