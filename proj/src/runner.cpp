#include "dtc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "dtc/rng.hpp"
#include "dtc/statevector.hpp"

namespace dtc {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::vector<double> number_list(const json& j) {
    if (j.is_number()) return {j.get<double>()};
    return j.get<std::vector<double>>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

json list_or_scalar(const std::vector<double>& v) { return v; }

}  // namespace

RunConfig config_from_json(const json& j) {
    reject_unknown(j,
                   {"lattice", "epsilon", "phi", "phi_pi", "cycles", "initial_state", "backend", "shots", "seed",
                    "noise", "recovery", "output_dir", "threads", "checkpoint"},
                   "config");
    RunConfig c;
    if (j.contains("lattice")) {
        reject_unknown(j.at("lattice"), {"rows", "cols"}, "lattice");
        c.rows = j.at("lattice").value("rows", c.rows);
        c.cols = j.at("lattice").value("cols", c.cols);
    }
    if (j.contains("epsilon")) c.epsilons = number_list(j.at("epsilon"));
    if (j.contains("phi") && j.contains("phi_pi")) throw std::invalid_argument("give either phi or phi_pi, not both");
    if (j.contains("phi")) c.phis = number_list(j.at("phi"));
    if (j.contains("phi_pi")) {
        c.phis = number_list(j.at("phi_pi"));
        for (auto& p : c.phis) p *= std::numbers::pi;
    }
    c.cycles = j.value("cycles", c.cycles);
    c.initial_state = j.value("initial_state", c.initial_state);
    if (j.contains("backend")) {
        const json& b = j.at("backend");
        const json obj = b.is_string() ? json{{"type", b}} : b;
        reject_unknown(obj, {"type", "chi_max", "cutoff"}, "backend");
        const std::string type = obj.value("type", std::string("mps"));
        if (type == "exact") c.backend.kind = BackendKind::Exact;
        else if (type == "mps") c.backend.kind = BackendKind::Mps;
        else throw std::invalid_argument("unknown backend '" + type + "'");
        c.backend.policy.chi_max = obj.value("chi_max", c.backend.policy.chi_max);
        c.backend.policy.cutoff = obj.value("cutoff", c.backend.policy.cutoff);
    }
    c.shots = j.value("shots", c.shots);
    c.seed = j.value("seed", c.seed);
    if (j.contains("noise") && !j.at("noise").is_null()) c.noise = noise_from_json(j.at("noise"));
    if (j.contains("recovery") && !j.at("recovery").is_null()) {
        const json& r = j.at("recovery");
        reject_unknown(r,
                       {"q", "lambda1", "lambda2", "small_lattice", "grid_half_width", "grid_points", "hamming",
                        "guard"},
                       "recovery");
        RecoveryConfig rc;
        rc.fit.ridge = r.value("q", rc.fit.ridge);
        rc.fit.grid_half_width = r.value("grid_half_width", rc.fit.grid_half_width);
        rc.fit.grid_points = r.value("grid_points", rc.fit.grid_points);
        rc.fit.guard = r.value("guard", rc.fit.guard);
        rc.deconvolution.lambda1 = r.value("lambda1", rc.deconvolution.lambda1);
        rc.deconvolution.lambda2 = r.value("lambda2", rc.deconvolution.lambda2);
        if (r.contains("small_lattice")) {
            rc.small_rows = r.at("small_lattice").value("rows", rc.small_rows);
            rc.small_cols = r.at("small_lattice").value("cols", rc.small_cols);
        }
        rc.hamming = r.value("hamming", rc.hamming);
        c.recovery = rc;
    }
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.threads = j.value("threads", c.threads);
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["lattice"] = {{"rows", c.rows}, {"cols", c.cols}};
    j["epsilon"] = list_or_scalar(c.epsilons);
    j["phi"] = list_or_scalar(c.phis);
    j["cycles"] = c.cycles;
    j["initial_state"] = c.initial_state;
    j["backend"] = {{"type", c.backend.kind == BackendKind::Exact ? "exact" : "mps"},
                    {"chi_max", c.backend.policy.chi_max},
                    {"cutoff", c.backend.policy.cutoff}};
    j["shots"] = c.shots;
    j["seed"] = c.seed;
    j["noise"] = c.noise ? noise_to_json(*c.noise) : json(nullptr);
    if (c.recovery) {
        const auto& r = *c.recovery;
        j["recovery"] = {{"q", r.fit.ridge},
                         {"lambda1", r.deconvolution.lambda1},
                         {"lambda2", r.deconvolution.lambda2},
                         {"small_lattice", {{"rows", r.small_rows}, {"cols", r.small_cols}}},
                         {"grid_half_width", r.fit.grid_half_width},
                         {"grid_points", r.fit.grid_points},
                         {"guard", r.fit.guard},
                         {"hamming", r.hamming}};
    } else {
        j["recovery"] = nullptr;
    }
    j["output_dir"] = c.output_dir.string();
    j["threads"] = c.threads;
    j["checkpoint"] = c.checkpoint;
    return j;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void validate(const RunConfig& c) {
    if (c.rows == 0 || c.cols == 0) throw std::invalid_argument("lattice rows and cols must be positive");
    if (c.cycles < 1) throw std::invalid_argument("cycles must be at least 1");
    if (c.shots < 1) throw std::invalid_argument("shots must be at least 1");
    if (c.epsilons.empty() || c.phis.empty()) throw std::invalid_argument("parameter grid is empty");
    for (double e : c.epsilons)
        for (double p : c.phis) validate(FloquetParams{e, p});
    if (c.backend.policy.chi_max == 0) throw std::invalid_argument("chi_max must be positive");
    const std::size_t n = heavy_hex_qubit_count(c.rows, c.cols);
    if (c.backend.kind == BackendKind::Exact && n > kMaxStateVectorQubits) {
        throw CapacityError("exact backend supports at most 24 qubits; lattice has " + std::to_string(n));
    }
    if (c.recovery && !c.noise) throw std::invalid_argument("recovery requires a noise model");
    if (c.recovery && (c.recovery->small_rows == 0 || c.recovery->small_cols == 0)) {
        throw std::invalid_argument("small_lattice rows and cols must be positive");
    }
}

ProductState initial_state(const RunConfig& c, const HeavyHexLattice& lattice) {
    if (c.initial_state == "neel") return neel_state(lattice);
    if (c.initial_state == "polarized") return polarized_state(lattice);
    ProductState s = product_state_from_bits(c.initial_state);
    if (s.size() != lattice.n_qubits) {
        throw std::invalid_argument("custom initial state has " + std::to_string(s.size()) + " bits, lattice has " +
                                    std::to_string(lattice.n_qubits));
    }
    return s;
}

std::vector<double> clifford_delta(double phi0, std::size_t cycles) {
    std::vector<double> d(cycles + 1, 1.0);
    if (phi0 > 0.0) {
        for (std::size_t t = 1; t <= cycles; t += 2) d[t] = -1.0;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Evolution

namespace {

// Seeds of the per-cycle sampling and bit-flip streams.
constexpr std::uint64_t kSampleStream = 1'000'000;
constexpr std::uint64_t kFlipStream = 2'000'000;

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t base, std::size_t t) {
    return substream_seed(seed, base + t);
}

class Evolver {
public:
    virtual ~Evolver() = default;
    virtual void step() = 0;
    [[nodiscard]] virtual std::vector<double> z() const = 0;
    [[nodiscard]] virtual std::vector<double> zz() const = 0;
    /// Exact distribution if the backend has one, else empty.
    [[nodiscard]] virtual std::vector<double> exact_hamming(const ProductState& s0) const = 0;
    [[nodiscard]] virtual std::vector<Bitstring> sample(std::size_t shots, std::uint64_t seed) const = 0;
    [[nodiscard]] virtual std::size_t max_bond() const { return 0; }
    [[nodiscard]] virtual double truncation_error() const { return 0.0; }
};

class ExactEvolver final : public Evolver {
public:
    ExactEvolver(const GateSequence& cycle, const ProductState& s0) : cycle_(cycle), sv_(init_product(s0)) {}
    void step() override { apply_cycle(sv_, cycle_); }
    std::vector<double> z() const override { return expect_z_all(sv_); }
    std::vector<double> zz() const override { return expect_zz_matrix(sv_); }
    std::vector<double> exact_hamming(const ProductState& s0) const override { return exact_hamming_distribution(sv_, s0); }
    std::vector<Bitstring> sample(std::size_t shots, std::uint64_t seed) const override {
        return sample_bits(sv_, shots, seed);
    }

private:
    GateSequence cycle_;
    StateVector sv_;
};

class MpsEvolver final : public Evolver {
public:
    MpsEvolver(const GateSequence& cycle, Mps mps) : cycle_(cycle, mps.order()), mps_(std::move(mps)) {}
    void step() override { cycle_.apply(mps_); }
    std::vector<double> z() const override { return mps_expect_z_all(mps_); }
    std::vector<double> zz() const override { return mps_expect_zz_matrix(mps_); }
    std::vector<double> exact_hamming(const ProductState&) const override { return {}; }
    std::vector<Bitstring> sample(std::size_t shots, std::uint64_t seed) const override {
        return mps_sample_bits(mps_, shots, seed);
    }
    std::size_t max_bond() const override { return mps_.max_bond(); }
    double truncation_error() const override { return mps_.truncation_error(); }
    [[nodiscard]] const Mps& state() const { return mps_; }

private:
    MpsCycle cycle_;
    Mps mps_;
};

/// What was measured at one cycle; everything else is derived from it.
struct Snapshot {
    std::vector<double> z;
    std::vector<double> zz;
    std::vector<double> hamming;
    std::vector<Bitstring> samples;
};

struct Job {
    std::size_t rows = 1;
    std::size_t cols = 1;
    FloquetParams params;
    std::size_t cycles = 1;
    std::string initial_state;
    BackendConfig backend;
    std::size_t shots = 1;
    std::uint64_t seed = 0;
    bool correlators = true;
    bool hamming = true;
    bool keep_samples = false;
    std::optional<fs::path> checkpoint_dir;
};

struct Evolution {
    HeavyHexLattice lattice;
    ProductState initial;
    std::vector<Snapshot> snapshots;
    std::size_t max_bond = 0;
    double truncation_error = 0.0;
};

Snapshot measure(const Evolver& ev, const Job& job, const ProductState& s0, std::size_t t) {
    Snapshot s;
    s.z = ev.z();
    if (job.correlators) s.zz = ev.zz();
    if (job.hamming) {
        s.hamming = ev.exact_hamming(s0);
        if (s.hamming.empty() || job.keep_samples) {
            auto samples = ev.sample(job.shots, stream_seed(job.seed, kSampleStream, t));
            if (s.hamming.empty()) s.hamming = hamming_distribution(samples, s0);
            if (job.keep_samples) s.samples = std::move(samples);
        }
    }
    return s;
}

std::string bits_to_string(const Bitstring& b) {
    std::string s(b.size(), '0');
    for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
    return s;
}

Bitstring string_to_bits(const std::string& s) {
    Bitstring b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) b[i] = s[i] == '1' ? 1 : 0;
    return b;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json checkpoint_identity(const Job& job) {
    return {{"rows", job.rows},
            {"cols", job.cols},
            {"epsilon", job.params.epsilon},
            {"phi", job.params.phi},
            {"initial_state", job.initial_state},
            {"seed", job.seed},
            {"shots", job.shots},
            {"chi_max", job.backend.policy.chi_max},
            {"cutoff", job.backend.policy.cutoff},
            {"correlators", job.correlators},
            {"hamming", job.hamming},
            {"keep_samples", job.keep_samples}};
}

json snapshot_to_json(const Snapshot& s) {
    json samples = json::array();
    for (const auto& b : s.samples) samples.push_back(bits_to_string(b));
    return {{"z", s.z}, {"zz", s.zz}, {"hamming", s.hamming}, {"samples", samples}};
}

Snapshot snapshot_from_json(const json& j) {
    Snapshot s;
    s.z = j.at("z").get<std::vector<double>>();
    s.zz = j.at("zz").get<std::vector<double>>();
    s.hamming = j.at("hamming").get<std::vector<double>>();
    for (const auto& b : j.at("samples")) s.samples.push_back(string_to_bits(b.get<std::string>()));
    return s;
}

void write_checkpoint(const fs::path& base, const json& identity, const MpsEvolver& ev,
                      const std::vector<Snapshot>& snapshots) {
    const fs::path tmp_mps = base.string() + ".mps.tmp";
    const fs::path tmp_json = base.string() + ".json.tmp";
    save_mps(ev.state(), tmp_mps);
    json j{{"identity", identity}, {"snapshots", json::array()}};
    for (const auto& s : snapshots) j["snapshots"].push_back(snapshot_to_json(s));
    {
        std::ofstream os(tmp_json);
        if (!os) throw std::runtime_error("cannot write checkpoint " + tmp_json.string());
        os << j.dump();
    }
    fs::rename(tmp_mps, base.string() + ".mps");
    fs::rename(tmp_json, base.string() + ".json");
}

Evolution evolve(const Job& job) {
    Evolution out;
    out.lattice = build_lattice(job.rows, job.cols);
    RunConfig tmp;
    tmp.initial_state = job.initial_state;
    out.initial = initial_state(tmp, out.lattice);
    const auto disorder = sample_disorder(out.lattice, job.seed);
    const GateSequence cycle = build_cycle(out.lattice, disorder, job.params);

    const bool exact = job.backend.kind == BackendKind::Exact;
    std::unique_ptr<Evolver> ev;
    MpsEvolver* mps_ev = nullptr;
    std::size_t start = 0;

    const json identity = checkpoint_identity(job);
    fs::path ckpt_base;
    if (!exact && job.checkpoint_dir) {
        fs::create_directories(*job.checkpoint_dir);
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%016llx", static_cast<unsigned long long>(fnv1a(identity.dump())));
        ckpt_base = *job.checkpoint_dir / name;
        const fs::path mps_file = ckpt_base.string() + ".mps";
        const fs::path json_file = ckpt_base.string() + ".json";
        if (fs::exists(mps_file) && fs::exists(json_file)) {
            std::ifstream is(json_file);
            json j = json::parse(is);
            if (j.at("identity") == identity) {
                for (const auto& s : j.at("snapshots")) out.snapshots.push_back(snapshot_from_json(s));
                auto owned = std::make_unique<MpsEvolver>(cycle, load_mps(mps_file));
                mps_ev = owned.get();
                ev = std::move(owned);
                start = out.snapshots.size() - 1;
            }
        }
    }
    if (!ev) {
        if (exact) {
            ev = std::make_unique<ExactEvolver>(cycle, out.initial);
        } else {
            auto owned = std::make_unique<MpsEvolver>(cycle, product_mps(out.initial, unroll(out.lattice), job.backend.policy));
            mps_ev = owned.get();
            ev = std::move(owned);
        }
        out.snapshots.push_back(measure(*ev, job, out.initial, 0));
    }

    for (std::size_t t = start + 1; t <= job.cycles; ++t) {
        ev->step();
        out.snapshots.push_back(measure(*ev, job, out.initial, t));
        if (mps_ev && !ckpt_base.empty() && t < job.cycles) write_checkpoint(ckpt_base, identity, *mps_ev, out.snapshots);
    }
    if (out.snapshots.size() > job.cycles + 1) out.snapshots.resize(job.cycles + 1);
    out.max_bond = ev->max_bond();
    out.truncation_error = ev->truncation_error();
    return out;
}

/// Observables of an evolution, optionally after corruption by `noise`.
TimeSeries derive_series(const Evolution& evo, const NoiseModel* noise, double epsilon, std::uint64_t seed) {
    const std::size_t n = evo.lattice.n_qubits;
    const auto pairs_all = all_pairs(n);
    TimeSeries ts;
    for (std::size_t t = 0; t < evo.snapshots.size(); ++t) {
        const Snapshot& s = evo.snapshots[t];
        const auto z = noise ? corrupt_expectations(s.z, *noise, t, evo.initial, epsilon) : s.z;
        ts.per_site_z.push_back(z);
        ts.delta.push_back(delta(z, evo.initial));
        if (!s.zz.empty()) {
            const auto zz = noise ? corrupt_correlators(s.zz, n, *noise, t, epsilon) : s.zz;
            ts.chi_nn.push_back(chi(evo.lattice.edges, zz, n));
            ts.chi_sg.push_back(chi(pairs_all, zz, n));
            ts.corr_nn.push_back(correlator_mean(evo.lattice.edges, zz, n));
            ts.qfi.push_back(qfi(z, zz, evo.initial));
        }
        if (!s.hamming.empty()) {
            std::vector<double> phi = s.hamming;
            if (noise) phi = hamming_distribution(corrupt_bits(s.samples, *noise, t, stream_seed(seed, kFlipStream, t)), evo.initial);
            ts.hamming_mean.push_back(distribution_mean(phi));
            ts.hamming_var.push_back(distribution_variance(phi));
            ts.hamming.push_back(std::move(phi));
        }
    }
    return ts;
}

Job base_job(const RunConfig& c, double epsilon, double phi) {
    Job job;
    job.rows = c.rows;
    job.cols = c.cols;
    job.params = {epsilon, phi};
    job.cycles = c.cycles;
    job.initial_state = c.initial_state;
    job.backend = c.backend;
    job.shots = c.shots;
    job.seed = c.seed;
    job.keep_samples = c.noise.has_value();
    return job;
}

/// The same job on another lattice; exact when it fits.
Job resized_job(Job job, std::size_t rows, std::size_t cols) {
    job.rows = rows;
    job.cols = cols;
    job.checkpoint_dir.reset();
    if (heavy_hex_qubit_count(rows, cols) <= kMaxStateVectorQubits) job.backend.kind = BackendKind::Exact;
    if (job.initial_state != "neel" && job.initial_state != "polarized" &&
        heavy_hex_qubit_count(rows, cols) != job.initial_state.size()) {
        throw std::invalid_argument("custom initial state cannot be transferred to the small lattice");
    }
    return job;
}

MeasuredChannels channels_of(const TimeSeries& ts) { return {ts.delta, ts.chi_nn, ts.corr_nn}; }

struct SmallSystem {
    MeasuredChannels noisy_target;
    MeasuredChannels noisy_reference;
    TimeSeries ideal_target;
    std::size_t n_qubits = 0;
};

SmallSystem simulate_small_system(const RunConfig& c, const Job& target_job, double phi0,
                                  const std::optional<MeasuredChannels>& measured_target,
                                  const std::optional<MeasuredChannels>& measured_reference) {
    const auto& rc = *c.recovery;
    Job small = resized_job(target_job, rc.small_rows, rc.small_cols);
    small.hamming = false;
    small.keep_samples = false;
    const Evolution evo = evolve(small);
    SmallSystem out;
    out.n_qubits = evo.lattice.n_qubits;
    out.ideal_target = derive_series(evo, nullptr, small.params.epsilon, c.seed);
    if (measured_target) {
        out.noisy_target = *measured_target;
    } else {
        if (!c.noise) throw std::invalid_argument("no noise model to synthesize small-system data");
        out.noisy_target = channels_of(derive_series(evo, &*c.noise, small.params.epsilon, c.seed));
    }
    if (measured_reference) {
        out.noisy_reference = *measured_reference;
    } else {
        if (!c.noise) throw std::invalid_argument("no noise model to synthesize small-system data");
        Job ref = small;
        ref.params = {0.0, phi0};
        out.noisy_reference = channels_of(derive_series(evolve(ref), &*c.noise, 0.0, c.seed));
    }
    return out;
}

void fit_and_apply(RecoveryReport& rep, const RunConfig& c, const SmallSystem& small, const MeasuredChannels& target,
                   const MeasuredChannels& reference, std::size_t n_qubits) {
    const auto& rc = *c.recovery;
    const auto exact_ref = clifford_delta(rep.reference_phi, target.delta.size() - 1);
    rep.offsets = learn_offsets(small.noisy_target.delta, small.noisy_reference.delta, exact_ref,
                                small.ideal_target.delta, rc.fit);
    rep.delta = renormalize_delta(target.delta, reference.delta, exact_ref, rep.offsets.offsets, rc.fit.guard);
    if (!target.chi_nn.empty() && !small.noisy_target.chi_nn.empty()) {
        rep.chi = learn_chi_params(small.noisy_target.chi_nn, small.noisy_target.corr_nn, small.noisy_reference.chi_nn,
                                   small.noisy_reference.corr_nn, small.ideal_target.chi_nn, small.n_qubits, rc.fit);
        rep.chi_nn = recover_chi(target.chi_nn, target.corr_nn, reference.chi_nn, reference.corr_nn, rep.chi.params,
                                 n_qubits, rc.fit.guard);
    }
}

void recover_hamming(RecoveryReport& rep, const RunConfig& c, const TimeSeries& noisy_target,
                     const TimeSeries& ideal_reference, const TimeSeries& noisy_reference, std::size_t n_qubits) {
    const auto& rc = *c.recovery;
    const std::size_t steps = noisy_target.hamming.size();
    rep.flip_probability.resize(steps);
    rep.hamming.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const auto& ideal = ideal_reference.hamming[t];
        const auto d_cliff = static_cast<std::size_t>(std::max_element(ideal.begin(), ideal.end()) - ideal.begin());
        const FlipFit fit = learn_flip_probability(noisy_reference.hamming[t], d_cliff);
        rep.flip_probability[t] = fit.p;
        if (rep.delta.flagged[t] || fit.p >= 0.5) continue;
        const double mu = hamming_mean_from_delta(rep.delta.values[t], n_qubits);
        const double var = std::max(0.0, unflipped_variance(noisy_target.hamming_var[t], n_qubits, fit.p));
        try {
            rep.hamming[t] = deconvolve_hamming(noisy_target.hamming[t], fit.p, mu, var, rc.deconvolution);
        } catch (const OptimizationError& e) {
            std::cerr << "warning: cycle " << t << ": " << e.what() << "\n";
        }
    }
}

}  // namespace

PointResult run_point(const RunConfig& c, double epsilon, double phi) {
    validate(c);
    validate(FloquetParams{epsilon, phi});
    Job job = base_job(c, epsilon, phi);
    if (c.checkpoint) job.checkpoint_dir = c.output_dir / "checkpoints";
    const Evolution evo = evolve(job);

    PointResult out;
    out.epsilon = epsilon;
    out.phi = phi;
    out.n_qubits = evo.lattice.n_qubits;
    out.max_bond = evo.max_bond;
    out.truncation_error = evo.truncation_error;
    out.ideal = derive_series(evo, nullptr, epsilon, c.seed);
    if (!c.noise) return out;
    out.noisy = derive_series(evo, &*c.noise, epsilon, c.seed);
    if (!c.recovery) return out;

    RecoveryReport rep;
    rep.reference_phi = clifford_reference(phi);
    Job ref_job = job;
    ref_job.params = {0.0, rep.reference_phi};
    ref_job.checkpoint_dir.reset();
    const Evolution ref = evolve(ref_job);
    const TimeSeries ref_ideal = derive_series(ref, nullptr, 0.0, c.seed);
    const TimeSeries ref_noisy = derive_series(ref, &*c.noise, 0.0, c.seed);
    const SmallSystem small = simulate_small_system(c, job, rep.reference_phi, std::nullopt, std::nullopt);
    fit_and_apply(rep, c, small, channels_of(*out.noisy), channels_of(ref_noisy), out.n_qubits);
    if (c.recovery->hamming) recover_hamming(rep, c, *out.noisy, ref_ideal, ref_noisy, out.n_qubits);
    out.recovery = std::move(rep);
    return out;
}

RecoveryReport recover_measured(const RunConfig& c, const MeasuredInputs& in) {
    validate(c);
    if (!c.recovery) throw std::invalid_argument("recover needs a recovery section in the config");
    const double epsilon = c.epsilons.front();
    const double phi = c.phis.front();
    const std::size_t steps = in.target.delta.size();
    if (steps < 2) throw std::invalid_argument("measured series needs at least two cycles");
    RunConfig cc = c;
    cc.cycles = steps - 1;

    RecoveryReport rep;
    rep.reference_phi = clifford_reference(phi);
    Job job = base_job(cc, epsilon, phi);
    job.hamming = false;
    job.keep_samples = false;

    MeasuredChannels reference;
    if (in.reference) {
        reference = *in.reference;
    } else {
        if (!c.noise) throw std::invalid_argument("no reference data and no noise model to synthesize it");
        Job ref_job = job;
        ref_job.params = {0.0, rep.reference_phi};
        reference = channels_of(derive_series(evolve(ref_job), &*c.noise, 0.0, c.seed));
    }
    if (reference.delta.size() != steps) throw std::invalid_argument("reference and target lengths differ");
    const SmallSystem small = simulate_small_system(cc, job, rep.reference_phi, in.small_target, in.small_reference);
    fit_and_apply(rep, cc, small, in.target, reference, heavy_hex_qubit_count(c.rows, c.cols));
    return rep;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json hamming_json(const std::vector<std::vector<double>>& h) {
    json j = json::object();
    for (std::size_t t = 0; t < h.size(); ++t) j[std::to_string(t)] = h[t];
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::string point_dir_name(double epsilon, double phi) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "eps_%.4f_phi_%.4fpi", epsilon, phi / std::numbers::pi);
    return buf;
}

}  // namespace

json recovery_to_json(const RecoveryReport& r) {
    json j;
    j["reference_phi"] = r.reference_phi;
    j["offsets"] = offsets_to_json(r.offsets.offsets);
    j["offsets_objective"] = r.offsets.objective;
    j["chi_params"] = chi_params_to_json(r.chi.params);
    j["chi_objective"] = r.chi.objective;
    json flags = json::array();
    for (std::size_t t = 0; t < r.delta.flagged.size(); ++t) {
        const bool chi_flag = t < r.chi_nn.flagged.size() && r.chi_nn.flagged[t];
        if (r.delta.flagged[t] || chi_flag) flags.push_back({{"t", t}, {"delta", bool(r.delta.flagged[t])}, {"chi", chi_flag}});
    }
    j["flagged"] = flags;
    j["flip_probability"] = r.flip_probability;
    json trials = json::object();
    for (std::size_t t = 0; t < r.hamming.size(); ++t) {
        if (r.hamming[t]) {
            trials[std::to_string(t)] = {{"trial", trial_to_json(r.hamming[t]->trial)},
                                         {"objective", r.hamming[t]->objective}};
        }
    }
    j["hamming_fits"] = trials;
    return j;
}

void write_point(const PointResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    const std::size_t steps = r.ideal.size();
    std::ofstream os(dir / "series.csv");
    if (!os) throw std::runtime_error("cannot write " + (dir / "series.csv").string());
    os << "t,delta,chi_nn,chi_sg,qfi,hamming_mean,hamming_var,corr_nn";
    if (r.noisy) os << ",delta_noisy,chi_nn_noisy,corr_nn_noisy,qfi_noisy,hamming_mean_noisy,hamming_var_noisy";
    if (r.recovery) os << ",delta_recovered,chi_recovered,flagged";
    os << "\n";
    auto at = [](const std::vector<double>& v, std::size_t t) { return t < v.size() ? fmt(v[t]) : std::string("nan"); };
    for (std::size_t t = 0; t < steps; ++t) {
        const auto& s = r.ideal;
        os << t << ',' << at(s.delta, t) << ',' << at(s.chi_nn, t) << ',' << at(s.chi_sg, t) << ',' << at(s.qfi, t)
           << ',' << at(s.hamming_mean, t) << ',' << at(s.hamming_var, t) << ',' << at(s.corr_nn, t);
        if (r.noisy) {
            const auto& n = *r.noisy;
            os << ',' << at(n.delta, t) << ',' << at(n.chi_nn, t) << ',' << at(n.corr_nn, t) << ',' << at(n.qfi, t)
               << ',' << at(n.hamming_mean, t) << ',' << at(n.hamming_var, t);
        }
        if (r.recovery) {
            const auto& rec = *r.recovery;
            const bool flag = rec.delta.flagged[t] || (t < rec.chi_nn.flagged.size() && rec.chi_nn.flagged[t]);
            os << ',' << at(rec.delta.values, t) << ',' << at(rec.chi_nn.values, t) << ',' << (flag ? 1 : 0);
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("failed writing series.csv");

    if (!r.ideal.hamming.empty()) write_json(dir / "hamming.json", hamming_json(r.ideal.hamming));
    if (r.noisy && !r.noisy->hamming.empty()) write_json(dir / "hamming_noisy.json", hamming_json(r.noisy->hamming));
    if (r.recovery) {
        write_json(dir / "recovery.json", recovery_to_json(*r.recovery));
        json rec = json::object();
        for (std::size_t t = 0; t < r.recovery->hamming.size(); ++t) {
            if (r.recovery->hamming[t]) rec[std::to_string(t)] = r.recovery->hamming[t]->distribution;
        }
        if (!rec.empty()) write_json(dir / "hamming_recovered.json", rec);
    }
    const PhasePoint pp = phase_order_params(r.ideal.delta, r.epsilon, r.phi);
    write_json(dir / "summary.json", {{"epsilon", r.epsilon},
                                      {"phi", r.phi},
                                      {"n_qubits", r.n_qubits},
                                      {"cycles", steps - 1},
                                      {"delta_mbl", pp.delta_mbl},
                                      {"delta_dtc", pp.delta_dtc},
                                      {"max_bond", r.max_bond},
                                      {"truncation_error", r.truncation_error}});
}

void run_simulate(const RunConfig& c) {
    validate(c);
    fs::create_directories(c.output_dir);
    write_json(c.output_dir / "config.resolved", config_to_json(c));
    for (double e : c.epsilons) {
        for (double p : c.phis) write_point(run_point(c, e, p), c.output_dir / point_dir_name(e, p));
    }
}

std::vector<PhasePoint> run_phase_diagram(const RunConfig& c) {
    validate(c);
    struct Cell {
        double epsilon;
        double phi;
    };
    std::vector<Cell> cells;
    for (double e : c.epsilons)
        for (double p : c.phis) cells.push_back({e, p});
    std::vector<PhasePoint> out(cells.size());

    std::size_t workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                Job job = base_job(c, cells[i].epsilon, cells[i].phi);
                job.correlators = false;
                job.hamming = false;
                job.keep_samples = false;
                const Evolution evo = evolve(job);
                std::vector<std::vector<double>> z;
                for (const auto& s : evo.snapshots) z.push_back(s.z);
                out[i] = phase_order_params(z, evo.initial, cells[i].epsilon, cells[i].phi);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cells.size();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

json phase_diagram_to_json(const std::vector<PhasePoint>& grid) {
    json j = json::array();
    for (const auto& p : grid) {
        j.push_back({{"eps", p.epsilon}, {"phi", p.phi}, {"delta_mbl", p.delta_mbl}, {"delta_dtc", p.delta_dtc}});
    }
    return j;
}

MeasuredChannels read_channels_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument(path.string() + ": empty CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    auto column = [&](const std::string& name) -> long {
        for (const std::string& candidate : {name + "_noisy", name}) {
            const auto it = std::find(header.begin(), header.end(), candidate);
            if (it != header.end()) return it - header.begin();
        }
        return -1;
    };
    const long cd = column("delta");
    const long cx = column("chi_nn");
    const long cc = column("corr_nn");
    if (cd < 0) throw std::invalid_argument(path.string() + ": no delta column");
    if ((cx < 0) != (cc < 0)) throw std::invalid_argument(path.string() + ": chi_nn and corr_nn must appear together");
    MeasuredChannels m;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        auto get = [&](long col) {
            if (col >= static_cast<long>(cells.size())) {
                throw std::invalid_argument(path.string() + ": row " + std::to_string(row) + " is short");
            }
            try {
                return std::stod(cells[static_cast<std::size_t>(col)]);
            } catch (const std::exception&) {
                throw std::invalid_argument(path.string() + ": row " + std::to_string(row) + ": bad number");
            }
        };
        m.delta.push_back(get(cd));
        if (cx >= 0) {
            m.chi_nn.push_back(get(cx));
            m.corr_nn.push_back(get(cc));
        }
    }
    return m;
}

}  // namespace dtc
