#include "dtc/recovery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

namespace dtc {

double clifford_reference(double phi) { return phi <= std::numbers::pi / 4.0 ? 0.0 : std::numbers::pi / 2.0; }

std::size_t RecoveredSeries::flagged_count() const {
    return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Stand-in for non-finite objective values; the simplex solver rejects NaN and inf.
constexpr double kHugeObjective = 1e100;

void check_lengths(std::initializer_list<const std::vector<double>*> series) {
    const std::size_t n = (*series.begin())->size();
    if (n == 0) throw std::invalid_argument("recovery: empty series");
    for (const auto* s : series) {
        if (s->size() != n) throw std::invalid_argument("recovery: series lengths differ");
    }
}

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

double gsl_trampoline(const gsl_vector* v, void* params) {
    const auto& f = *static_cast<const Objective*>(params);
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    const double y = f(x);
    return std::isfinite(y) ? y : kHugeObjective;
}

SimplexResult nelder_mead(const Objective& f, const std::vector<double>& start, double step, double tolerance,
                          std::size_t max_iterations) {
    gsl_set_error_handler_off();
    const std::size_t dim = start.size();
    gsl_multimin_function fn{&gsl_trampoline, dim, const_cast<Objective*>(&f)};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* steps = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x, i, start[i]);
        gsl_vector_set(steps, i, step);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(s, &fn, x, steps);

    // Converged when the simplex is small, or when the best value has not
    // moved for kStallIterations (the simplex can drift along flat valleys).
    constexpr std::size_t kStallIterations = 500;
    constexpr double kStallRelative = 1e-12;
    SimplexResult out;
    int status = GSL_CONTINUE;
    // fminimizer_set leaves s->fval unset; the first iteration moves the anchor.
    double anchor = std::numeric_limits<double>::infinity();
    std::size_t anchor_iteration = 0;
    while (status == GSL_CONTINUE && out.iterations < max_iterations) {
        ++out.iterations;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), tolerance);
        if (anchor - s->fval > kStallRelative * std::abs(anchor)) {
            anchor = s->fval;
            anchor_iteration = out.iterations;
        } else if (out.iterations - anchor_iteration >= kStallIterations) {
            status = GSL_SUCCESS;
        }
    }
    out.converged = status == GSL_SUCCESS;
    out.x.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) out.x[i] = gsl_vector_get(s->x, i);
    out.value = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(steps);
    gsl_vector_free(x);
    return out;
}

// Predictions of the form
//   scale_t * (num_t + theta . g_t) / (den_t + theta' . h_t)
// fitted to `target` with ridge penalty on (theta, theta').
struct RatioProblem {
    std::vector<double> num;
    std::array<std::vector<double>, 2> g;
    std::vector<double> den;
    std::array<std::vector<double>, 2> h;
    std::vector<double> scale;
    std::vector<double> target;
    double ridge = 0.0;
    double guard = kDenominatorGuard;

    [[nodiscard]] double denominator(std::size_t t, const std::array<double, 2>& ref) const {
        return den[t] + ref[0] * h[0][t] + ref[1] * h[1][t];
    }

    [[nodiscard]] double objective(const std::vector<double>& x) const {
        double j = ridge * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
        for (std::size_t t = 0; t < num.size(); ++t) {
            const double d = denominator(t, {x[2], x[3]});
            if (std::abs(d) < guard) {
                j += target[t] * target[t];
                continue;
            }
            const double pred = scale[t] * (num[t] + x[0] * g[0][t] + x[1] * g[1][t]) / d;
            j += (target[t] - pred) * (target[t] - pred);
        }
        return j;
    }

    // Ridge least-squares solution for theta with theta' held fixed.
    [[nodiscard]] std::array<double, 2> solve_target(const std::array<double, 2>& ref) const {
        Eigen::Matrix2d a = ridge * Eigen::Matrix2d::Identity();
        Eigen::Vector2d b = Eigen::Vector2d::Zero();
        for (std::size_t t = 0; t < num.size(); ++t) {
            const double d = denominator(t, ref);
            if (std::abs(d) < guard) continue;
            const double w = scale[t] / d;
            const Eigen::Vector2d gt(w * g[0][t], w * g[1][t]);
            a += gt * gt.transpose();
            b += gt * (target[t] - w * num[t]);
        }
        if (std::abs(a.determinant()) < 1e-300) return {0.0, 0.0};
        const Eigen::Vector2d x = a.ldlt().solve(b);
        return {x(0), x(1)};
    }
};

struct RatioFit {
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;
};

RatioFit fit_ratio(const RatioProblem& prob, const FitOptions& opt) {
    if (opt.ridge <= 0.0) throw std::invalid_argument("ridge parameter q must be positive");
    if (opt.grid_points < 2) throw std::invalid_argument("fit grid needs at least two points per axis");
    std::vector<double> best{0.0, 0.0, 0.0, 0.0};
    double best_j = std::numeric_limits<double>::infinity();
    const double step = 2.0 * opt.grid_half_width / static_cast<double>(opt.grid_points - 1);
    for (std::size_t i = 0; i < opt.grid_points; ++i) {
        for (std::size_t k = 0; k < opt.grid_points; ++k) {
            const std::array<double, 2> ref{-opt.grid_half_width + step * static_cast<double>(i),
                                            -opt.grid_half_width + step * static_cast<double>(k)};
            const auto tgt = prob.solve_target(ref);
            const std::vector<double> x{tgt[0], tgt[1], ref[0], ref[1]};
            const double j = prob.objective(x);
            if (j < best_j) {
                best_j = j;
                best = x;
            }
        }
    }
    const Objective f = [&prob](const std::vector<double>& x) { return prob.objective(x); };
    const SimplexResult r = nelder_mead(f, best, opt.initial_step, opt.tolerance, opt.max_iterations);
    if (!r.converged) {
        const bool improved = r.value < best_j;
        throw OptimizationError("parameter fit did not converge", improved ? r.x : best, std::min(r.value, best_j));
    }
    if (r.value > best_j) return {best, best_j, r.iterations};
    return {r.x, r.value, r.iterations};
}

double clamp_or_nan(double v, double lo, double hi) { return std::isfinite(v) ? std::clamp(v, lo, hi) : kNaN; }

}  // namespace

RecoveredSeries renormalize_delta(const std::vector<double>& noisy_target, const std::vector<double>& noisy_reference,
                                  const std::vector<double>& exact_reference, const OffsetVector& offsets,
                                  double guard) {
    check_lengths({&noisy_target, &noisy_reference, &exact_reference});
    RecoveredSeries out;
    out.values.resize(noisy_target.size());
    out.flagged.resize(noisy_target.size());
    for (std::size_t t = 0; t < noisy_target.size(); ++t) {
        const double den = noisy_reference[t] - offsets.reference(t);
        if (std::abs(den) < guard) {
            out.values[t] = kNaN;
            out.flagged[t] = true;
            continue;
        }
        out.values[t] = clamp_or_nan(exact_reference[t] * (noisy_target[t] - offsets.target(t)) / den, -1.0, 1.0);
    }
    return out;
}

RecoveredSeries recover_chi(const std::vector<double>& chi_target, const std::vector<double>& corr_target,
                            const std::vector<double>& chi_reference, const std::vector<double>& corr_reference,
                            const ChiParams& c, std::size_t n_qubits, double guard) {
    check_lengths({&chi_target, &corr_target, &chi_reference, &corr_reference});
    if (n_qubits < 2) throw std::invalid_argument("recover_chi needs at least two qubits");
    const double m = static_cast<double>(n_qubits - 1);
    RecoveredSeries out;
    out.values.resize(chi_target.size());
    out.flagged.resize(chi_target.size());
    for (std::size_t t = 0; t < chi_target.size(); ++t) {
        const double den = chi_reference[t] + 2.0 * c.c1_reference * corr_reference[t] + m * c.c2_reference;
        if (std::abs(den) < guard) {
            out.values[t] = kNaN;
            out.flagged[t] = true;
            continue;
        }
        const double num = chi_target[t] + 2.0 * c.c1_target * corr_target[t] + m * c.c2_target;
        out.values[t] = clamp_or_nan(num / den, 0.0, 1.0);
    }
    return out;
}

OffsetFit learn_offsets(const std::vector<double>& noisy_target, const std::vector<double>& noisy_reference,
                        const std::vector<double>& exact_reference, const std::vector<double>& simulated_target,
                        const FitOptions& options) {
    check_lengths({&noisy_target, &noisy_reference, &exact_reference, &simulated_target});
    const std::size_t n = noisy_target.size();
    RatioProblem prob;
    prob.num = noisy_target;
    prob.den = noisy_reference;
    prob.scale = exact_reference;
    prob.target = simulated_target;
    prob.ridge = options.ridge;
    prob.guard = options.guard;
    for (auto* features : {&prob.g, &prob.h}) {
        for (int p = 0; p < 2; ++p) {
            (*features)[p].resize(n);
            for (std::size_t t = 0; t < n; ++t) (*features)[p][t] = (t % 2 == static_cast<std::size_t>(p)) ? -1.0 : 0.0;
        }
    }
    const RatioFit fit = fit_ratio(prob, options);
    return {{fit.x[0], fit.x[1], fit.x[2], fit.x[3]}, fit.objective, fit.iterations};
}

ChiFit learn_chi_params(const std::vector<double>& chi_target, const std::vector<double>& corr_target,
                        const std::vector<double>& chi_reference, const std::vector<double>& corr_reference,
                        const std::vector<double>& simulated_target, std::size_t n_qubits,
                        const FitOptions& options) {
    check_lengths({&chi_target, &corr_target, &chi_reference, &corr_reference, &simulated_target});
    if (n_qubits < 2) throw std::invalid_argument("learn_chi_params needs at least two qubits");
    const std::size_t n = chi_target.size();
    // Fit variables are (c1, (N-1) c2) so the grid and ridge do not depend on N.
    RatioProblem prob;
    prob.num = chi_target;
    prob.den = chi_reference;
    prob.scale.assign(n, 1.0);
    prob.target = simulated_target;
    prob.ridge = options.ridge;
    prob.guard = options.guard;
    prob.g[0].resize(n);
    prob.h[0].resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        prob.g[0][t] = 2.0 * corr_target[t];
        prob.h[0][t] = 2.0 * corr_reference[t];
    }
    prob.g[1].assign(n, 1.0);
    prob.h[1].assign(n, 1.0);
    const RatioFit fit = fit_ratio(prob, options);
    const double m = static_cast<double>(n_qubits - 1);
    return {{fit.x[0], fit.x[1] / m, fit.x[2], fit.x[3] / m}, fit.objective, fit.iterations};
}

// ---------------------------------------------------------------------------
// Flip kernel

namespace {

double log_choose(std::size_t n, std::size_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// log(x^e), with 0^0 = 1.
double log_power(double log_x, std::size_t e) { return e == 0 ? 0.0 : static_cast<double>(e) * log_x; }

double kernel_entry(std::size_t n, double log_p, double log_q, std::size_t d, std::size_t dp) {
    const std::size_t lo = d + dp > n ? d + dp - n : 0;
    const std::size_t hi = std::min(d, dp);
    double s = 0.0;
    for (std::size_t x = lo; x <= hi; ++x) {
        const std::size_t flips = d + dp - 2 * x;
        const double lt = log_choose(dp, x) + log_choose(n - dp, d - x) + log_power(log_p, flips) +
                          log_power(log_q, n - flips);
        s += std::exp(lt);
    }
    return s;
}

std::vector<double> kernel_column(std::size_t n, double p, std::size_t dp) {
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    std::vector<double> col(n + 1);
    for (std::size_t d = 0; d <= n; ++d) col[d] = kernel_entry(n, log_p, log_q, d, dp);
    return col;
}

}  // namespace

FlipKernel flip_kernel(std::size_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("flip probability must lie in [0, 1]");
    FlipKernel k{n, p, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1))};
    for (std::size_t dp = 0; dp <= n; ++dp) {
        const auto col = kernel_column(n, p, dp);
        for (std::size_t d = 0; d <= n; ++d) k.matrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(dp)) = col[d];
    }
    return k;
}

std::vector<double> FlipKernel::apply(const std::vector<double>& distribution) const {
    if (distribution.size() != n + 1) throw std::invalid_argument("distribution length must be N+1");
    const Eigen::VectorXd v = matrix * Eigen::Map<const Eigen::VectorXd>(distribution.data(), static_cast<Eigen::Index>(n + 1));
    return {v.data(), v.data() + v.size()};
}

FlipFit learn_flip_probability(const std::vector<double>& noisy, std::size_t d_cliff) {
    if (noisy.size() < 2) throw std::invalid_argument("distribution must cover d = 0..N with N >= 1");
    const std::size_t n = noisy.size() - 1;
    if (d_cliff > n) throw std::invalid_argument("d_cliff exceeds N");
    auto loss = [&](double p) {
        const auto col = kernel_column(n, p, d_cliff);
        double s = 0.0;
        for (std::size_t d = 0; d <= n; ++d) s += (noisy[d] - col[d]) * (noisy[d] - col[d]);
        return s;
    };

    constexpr std::size_t kScan = 501;
    constexpr double kUpper = 0.5;
    const double h = kUpper / static_cast<double>(kScan - 1);
    std::vector<double> values(kScan);
    for (std::size_t i = 0; i < kScan; ++i) values[i] = loss(h * static_cast<double>(i));
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    if (*hi_it - *lo_it <= 1e-15 * (1.0 + *hi_it)) {
        std::cerr << "warning: flip-probability objective is flat; returning p = 0\n";
        return {0.0, values[0], true};
    }
    const auto best = static_cast<std::size_t>(lo_it - values.begin());
    double a = h * static_cast<double>(best == 0 ? 0 : best - 1);
    double b = h * static_cast<double>(std::min(best + 1, kScan - 1));
    double guess = h * static_cast<double>(best);
    double f_guess = values[best];
    if (best == 0 || best + 1 == kScan) {
        // boundary cell: golden section needs an interior point below both ends
        guess = 0.5 * (a + b);
        f_guess = loss(guess);
        if (!(f_guess < loss(a) && f_guess < loss(b))) return {h * static_cast<double>(best), values[best], false};
    }

    gsl_set_error_handler_off();
    gsl_function fn;
    fn.function = [](double x, void* params) { return (*static_cast<decltype(loss)*>(params))(x); };
    fn.params = &loss;
    gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(gsl_min_fminimizer_goldensection);
    gsl_min_fminimizer_set_with_values(s, &fn, guess, f_guess, a, loss(a), b, loss(b));
    for (int iter = 0; iter < 200; ++iter) {
        if (gsl_min_fminimizer_iterate(s) != GSL_SUCCESS) break;
        a = gsl_min_fminimizer_x_lower(s);
        b = gsl_min_fminimizer_x_upper(s);
        if (gsl_min_test_interval(a, b, 1e-12, 0.0) == GSL_SUCCESS) break;
    }
    const FlipFit out{gsl_min_fminimizer_x_minimum(s), gsl_min_fminimizer_f_minimum(s), false};
    gsl_min_fminimizer_free(s);
    return out;
}

// ---------------------------------------------------------------------------
// Trial distribution and deconvolution

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

std::vector<double> trial_log_weights(std::size_t n, double d0, double sigma, double k, double q) {
    std::vector<double> lw(n + 1);
    for (std::size_t d = 0; d <= n; ++d) {
        const double x = static_cast<double>(d);
        lw[d] = -(x - d0) * (x - d0) / (2.0 * sigma * sigma) - softplus(k * x + q);
    }
    return lw;
}

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double weighted_mean(const std::vector<double>& phi) {
    double m = 0.0;
    for (std::size_t d = 0; d < phi.size(); ++d) m += static_cast<double>(d) * phi[d];
    return m;
}

double weighted_variance(const std::vector<double>& phi) {
    const double m = weighted_mean(phi);
    double v = 0.0;
    for (std::size_t d = 0; d < phi.size(); ++d) v += (static_cast<double>(d) - m) * (static_cast<double>(d) - m) * phi[d];
    return v;
}

}  // namespace

TrialDistribution make_trial(std::size_t n, double d0, double sigma, double k, double q) {
    if (!(sigma > 0.0)) throw std::invalid_argument("trial width sigma must be positive");
    const auto lw = trial_log_weights(n, d0, sigma, k, q);
    return {n, d0, sigma, k, q, std::exp(-log_sum_exp(lw))};
}

std::vector<double> TrialDistribution::probabilities() const {
    auto lw = trial_log_weights(n, d0, sigma, k, q);
    const double lse = log_sum_exp(lw);
    for (auto& v : lw) v = std::exp(v - lse);
    return lw;
}

DeconvolutionResult deconvolve_hamming(const std::vector<double>& noisy, double p, double mu, double sigma_var,
                                       const DeconvolutionOptions& options) {
    if (noisy.size() < 2) throw std::invalid_argument("distribution must cover d = 0..N with N >= 1");
    if (!(options.lambda1 > 0.0 && options.lambda2 > 0.0)) throw std::invalid_argument("lambda1, lambda2 must be positive");
    const std::size_t n = noisy.size() - 1;
    const FlipKernel kernel = flip_kernel(n, p);

    // Unconstrained coordinates x = (a, s, u, m):
    //   d0 = N/2 + 1.5 N tanh(a), sigma in (0.05, 2N) by a logistic map of s,
    //   k = 10 tanh(u), q = -k m (m is the logistic midpoint).
    // Bounding d0, sigma and k closes the flat valleys in which the raw
    // parameters drift off without changing the distribution.
    const double nn = static_cast<double>(n);
    const double center = 0.5 * nn;
    const double reach = 1.5 * std::max(nn, 1.0);
    constexpr double kSigmaMin = 0.05;
    const double sigma_span = 2.0 * std::max(nn, 1.0) - kSigmaMin;
    constexpr double kMaxSteepness = 10.0;
    auto unpack = [&](const std::vector<double>& x) {
        const double k = kMaxSteepness * std::tanh(x[2]);
        const double sigma = kSigmaMin + sigma_span / (1.0 + std::exp(-x[1]));
        return std::array<double, 4>{center + reach * std::tanh(x[0]), sigma, k, -k * x[3]};
    };
    auto pack = [&](double d0, double sigma, double u, double m) {
        const double r = std::clamp((d0 - center) / reach, -0.999, 0.999);
        const double f = std::clamp((sigma - kSigmaMin) / sigma_span, 1e-6, 1.0 - 1e-6);
        return std::vector<double>{std::atanh(r), std::log(f / (1.0 - f)), u, m};
    };
    const Objective loss = [&](const std::vector<double>& x) {
        const auto [d0, sigma, k, q] = unpack(x);
        auto lw = trial_log_weights(n, d0, sigma, k, q);
        const double lse = log_sum_exp(lw);
        if (!std::isfinite(lse)) return kHugeObjective;
        for (auto& v : lw) v = std::exp(v - lse);
        const auto pushed = kernel.apply(lw);
        double l = 0.0;
        for (std::size_t d = 0; d <= n; ++d) l += (noisy[d] - pushed[d]) * (noisy[d] - pushed[d]);
        const double dm = weighted_mean(lw) - mu;
        const double dv = weighted_variance(lw) - sigma_var;
        return l + options.lambda1 * dm * dm + options.lambda2 * dv * dv;
    };

    const double width = std::sqrt(std::max(sigma_var, 0.25));
    const double peak = static_cast<double>(std::max_element(noisy.begin(), noisy.end()) - noisy.begin());
    const std::array<std::vector<double>, 3> seeds{{
        pack(mu, width, 0.0, mu),
        pack(peak, std::sqrt(std::max(weighted_variance(noisy), 0.25)), 0.0, peak),
        pack(mu, width, 0.1, std::min(nn, mu + 2.0 * width)),
    }};
    SimplexResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& s : seeds) {
        SimplexResult r = nelder_mead(loss, s, 0.5, options.tolerance, options.max_iterations);
        if (r.value < best.value) best = std::move(r);
    }
    SimplexResult fin = nelder_mead(loss, best.x, 0.1, options.tolerance, options.max_iterations);
    if (fin.value > best.value) fin = best;
    const auto [d0, sigma, k, q] = unpack(fin.x);
    if (!fin.converged) {
        throw OptimizationError("Hamming deconvolution did not converge", {d0, sigma, k, q}, fin.value);
    }

    DeconvolutionResult out;
    out.trial = make_trial(n, d0, sigma, k, q);
    out.distribution = out.trial.probabilities();
    out.objective = fin.value;
    return out;
}

double unflipped_variance(double noisy_variance, std::size_t n, double p) {
    if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("unflipped_variance needs 0 <= p < 1/2");
    const double nn = static_cast<double>(n);
    return (noisy_variance - nn * p * (1.0 - p)) / ((1.0 - 2.0 * p) * (1.0 - 2.0 * p));
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

nlohmann::json offsets_to_json(const OffsetVector& o) {
    return {{"target_even", o.target_even},
            {"target_odd", o.target_odd},
            {"reference_even", o.reference_even},
            {"reference_odd", o.reference_odd}};
}

nlohmann::json chi_params_to_json(const ChiParams& c) {
    return {{"c1_target", c.c1_target},
            {"c2_target", c.c2_target},
            {"c1_reference", c.c1_reference},
            {"c2_reference", c.c2_reference}};
}

nlohmann::json trial_to_json(const TrialDistribution& t) {
    return {{"n", t.n}, {"d0", t.d0}, {"sigma", t.sigma}, {"k", t.k}, {"q", t.q}, {"norm", t.norm}};
}

}  // namespace dtc
