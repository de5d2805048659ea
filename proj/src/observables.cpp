#include "dtc/observables.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace dtc {

double delta(const std::vector<double>& z, const ProductState& initial) {
    if (z.size() != initial.size() || z.empty()) throw std::invalid_argument("delta: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += initial.spins[i] * z[i];
    return s / static_cast<double>(z.size());
}

namespace {

void check_pairs(const std::vector<Edge>& pairs, const std::vector<double>& zz, std::size_t n) {
    if (pairs.empty()) throw std::invalid_argument("pair set is empty");
    if (zz.size() != n * n) throw std::invalid_argument("correlator matrix has the wrong shape");
}

}  // namespace

double chi(const std::vector<Edge>& pairs, const std::vector<double>& zz, std::size_t n) {
    check_pairs(pairs, zz, n);
    double s = 0.0;
    for (const auto& [i, j] : pairs) s += zz[i * n + j] * zz[i * n + j];
    return s / static_cast<double>(pairs.size());
}

double correlator_mean(const std::vector<Edge>& pairs, const std::vector<double>& zz, std::size_t n) {
    check_pairs(pairs, zz, n);
    double s = 0.0;
    for (const auto& [i, j] : pairs) s += zz[i * n + j];
    return s / static_cast<double>(pairs.size());
}

std::vector<Edge> all_pairs(std::size_t n) {
    std::vector<Edge> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
    return out;
}

PhasePoint phase_order_params(const std::vector<double>& delta_series, double epsilon, double phi) {
    if (delta_series.size() < 2) throw std::invalid_argument("need at least one cycle beyond t = 0");
    PhasePoint pt;
    pt.epsilon = epsilon;
    pt.phi = phi;
    pt.cycles = delta_series.size() - 1;
    for (std::size_t t = 0; t < delta_series.size(); ++t) {
        pt.delta_mbl += std::abs(delta_series[t]);
        pt.delta_dtc += (t % 2 == 0 ? 1.0 : -1.0) * delta_series[t];
    }
    const auto terms = static_cast<double>(delta_series.size());
    pt.delta_mbl /= terms;
    pt.delta_dtc /= terms;
    return pt;
}

PhasePoint phase_order_params(const std::vector<std::vector<double>>& z_series, const ProductState& initial,
                              double epsilon, double phi) {
    std::vector<double> d;
    d.reserve(z_series.size());
    for (const auto& z : z_series) d.push_back(delta(z, initial));
    return phase_order_params(d, epsilon, phi);
}

std::size_t hamming_distance(const Bitstring& sample, const ProductState& initial) {
    if (sample.size() != initial.size()) throw std::invalid_argument("sample length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const int spin = sample[i] ? -1 : 1;
        d += (spin != initial.spins[i]) ? 1 : 0;
    }
    return d;
}

std::vector<double> hamming_distribution(const std::vector<Bitstring>& samples, const ProductState& initial) {
    if (samples.empty()) throw std::invalid_argument("need at least one sample");
    std::vector<double> phi(initial.size() + 1, 0.0);
    for (const auto& s : samples) phi[hamming_distance(s, initial)] += 1.0;
    for (auto& v : phi) v /= static_cast<double>(samples.size());
    return phi;
}

double distribution_mean(const std::vector<double>& phi) {
    double m = 0.0;
    for (std::size_t d = 0; d < phi.size(); ++d) m += static_cast<double>(d) * phi[d];
    return m;
}

double distribution_variance(const std::vector<double>& phi) {
    const double m = distribution_mean(phi);
    double v = 0.0;
    for (std::size_t d = 0; d < phi.size(); ++d) v += (static_cast<double>(d) - m) * (static_cast<double>(d) - m) * phi[d];
    return v;
}

double qfi(const std::vector<double>& z, const std::vector<double>& zz, const ProductState& initial) {
    const std::size_t n = z.size();
    if (initial.size() != n || zz.size() != n * n) throw std::invalid_argument("qfi: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            s += initial.spins[i] * initial.spins[j] * (zz[i * n + j] - z[i] * z[j]);
        }
    }
    return 0.25 * s;
}

double hamming_mean_from_delta(double delta_value, std::size_t n) {
    return 0.5 * static_cast<double>(n) * (1.0 - delta_value);
}

Spectrum fourier_spectrum(const std::vector<double>& series) {
    if (series.size() < 4) throw std::invalid_argument("Fourier analysis needs at least 4 samples");
    const std::size_t m = series.size() / 2;
    Spectrum out;
    for (std::size_t k = 0; k <= m; ++k) {
        const double w = std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < series.size(); ++t) acc += series[t] * std::polar(1.0, -w * static_cast<double>(t));
        out.omega.push_back(w);
        out.magnitude.push_back(std::abs(acc));
    }
    return out;
}

}  // namespace dtc
