#include "dtc/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dtc/rng.hpp"

namespace dtc {

namespace {

std::size_t pow4(std::size_t k) { return std::size_t{1} << (2 * k); }

// Number of singular values to keep: at most `cap`, at least one, and only
// those above cutoff * ||s||.
Eigen::Index keep_count(const Eigen::VectorXd& s, std::size_t cap, double cutoff) {
    const double total = s.norm();
    Eigen::Index k = 0;
    while (k < s.size() && s(k) > cutoff * total) ++k;
    k = std::min<Eigen::Index>(k, static_cast<Eigen::Index>(cap));
    return std::max<Eigen::Index>(k, 1);
}

double discarded_weight(const Eigen::VectorXd& s, Eigen::Index kept) {
    const double total = s.squaredNorm();
    if (total == 0.0 || kept >= s.size()) return 0.0;
    return s.tail(s.size() - kept).squaredNorm() / total;
}

using Svd = Eigen::BDCSVD<CMatrix>;

Svd thin_svd(const CMatrix& m) { return Svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV); }

}  // namespace

// ---------------------------------------------------------------------------
// Mps

Mps::Mps(UnrollOrder order, std::vector<std::array<CMatrix, 2>> sites, TruncationPolicy policy)
    : order_(std::move(order)), sites_(std::move(sites)), policy_(policy) {
    if (order_.size() != sites_.size()) throw std::invalid_argument("order and site count differ");
    if (policy_.chi_max == 0) throw std::invalid_argument("chi_max must be positive");
}

std::vector<std::size_t> Mps::bond_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(sites_.size() + 1);
    for (const auto& s : sites_) dims.push_back(static_cast<std::size_t>(s[0].rows()));
    dims.push_back(sites_.empty() ? 1 : static_cast<std::size_t>(sites_.back()[0].cols()));
    return dims;
}

std::size_t Mps::max_bond() const {
    const auto d = bond_dims();
    return *std::max_element(d.begin(), d.end());
}

double Mps::norm() const {
    CMatrix env = CMatrix::Identity(1, 1);
    for (auto it = sites_.rbegin(); it != sites_.rend(); ++it) {
        env = (*it)[0] * env * (*it)[0].adjoint() + (*it)[1] * env * (*it)[1].adjoint();
    }
    return std::sqrt(std::abs(env(0, 0).real()));
}

double Mps::right_canonical_defect() const {
    double worst = 0.0;
    for (std::size_t p = 1; p < sites_.size(); ++p) {
        const auto& a = sites_[p];
        const CMatrix g = a[0] * a[0].adjoint() + a[1] * a[1].adjoint();
        worst = std::max(worst, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
    return worst;
}

Mps product_mps(const ProductState& state, const UnrollOrder& order, TruncationPolicy policy) {
    if (state.size() != order.size()) throw std::invalid_argument("state and order sizes differ");
    std::vector<std::array<CMatrix, 2>> sites(state.size());
    for (std::size_t p = 0; p < state.size(); ++p) {
        const int s = state.spins[order.qubit[p]];
        if (s != 1 && s != -1) throw std::invalid_argument("spins must be +1 or -1");
        sites[p][0] = CMatrix::Constant(1, 1, s == 1 ? 1.0 : 0.0);
        sites[p][1] = CMatrix::Constant(1, 1, s == 1 ? 0.0 : 1.0);
    }
    return Mps(order, std::move(sites), policy);
}

// ---------------------------------------------------------------------------
// Mpo

std::vector<std::size_t> Mpo::bond_dims() const {
    std::vector<std::size_t> dims;
    for (const auto& s : sites) dims.push_back(static_cast<std::size_t>(s[0].rows()));
    dims.push_back(sites.empty() ? 1 : static_cast<std::size_t>(sites.back()[0].cols()));
    return dims;
}

std::size_t Mpo::max_bond() const {
    const auto d = bond_dims();
    return *std::max_element(d.begin(), d.end());
}

Mpo identity_mpo(std::size_t n_sites) {
    Mpo mpo;
    mpo.sites.resize(n_sites);
    for (auto& w : mpo.sites) {
        w[0] = CMatrix::Ones(1, 1);
        w[1] = CMatrix::Zero(1, 1);
        w[2] = CMatrix::Zero(1, 1);
        w[3] = CMatrix::Ones(1, 1);
    }
    return mpo;
}

namespace {

// Left and right halves of a two-site operator: U = sum_k L_k (x) R_k with
// L_k[2*o+i] acting on the earlier chain site.
struct SplitGate {
    std::size_t left_site;
    std::size_t right_site;
    std::array<std::array<cplx, 4>, 4> left;   // [k][2*o+i]
    std::array<std::array<cplx, 4>, 4> right;  // [k][2*o+i]
};

SplitGate split_gate(const TwoQubitGate& g, const UnrollOrder& order) {
    std::size_t p = order.position.at(g.first);
    std::size_t q = order.position.at(g.second);
    Mat4 u = g.matrix;
    if (p > q) {
        // reorder the basis so the first tensor factor sits at the earlier site
        Eigen::Matrix4d swap = Eigen::Matrix4d::Zero();
        swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
        u = swap.cast<cplx>() * u * swap.cast<cplx>();
        std::swap(p, q);
    }
    // M[(o1 i1), (o2 i2)] = U[(o1 o2), (i1 i2)]
    Mat4 m;
    for (int o1 = 0; o1 < 2; ++o1)
        for (int o2 = 0; o2 < 2; ++o2)
            for (int i1 = 0; i1 < 2; ++i1)
                for (int i2 = 0; i2 < 2; ++i2) m(2 * o1 + i1, 2 * o2 + i2) = u(2 * o1 + o2, 2 * i1 + i2);
    Eigen::JacobiSVD<Mat4> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SplitGate out{p, q, {}, {}};
    for (int k = 0; k < 4; ++k) {
        const double root = std::sqrt(svd.singularValues()(k));
        for (int a = 0; a < 4; ++a) {
            out.left[k][a] = svd.matrixU()(a, k) * root;
            out.right[k][a] = std::conj(svd.matrixV()(a, k)) * root;
        }
    }
    return out;
}

}  // namespace

Mpo layer_to_mpo(const std::vector<TwoQubitGate>& gates, const UnrollOrder& order) {
    const std::size_t n = order.size();
    std::vector<bool> used(n, false);
    std::vector<SplitGate> split;
    for (const auto& g : gates) {
        if (g.first >= n || g.second >= n) throw std::out_of_range("gate qubit index out of range");
        if (used[g.first] || used[g.second] || g.first == g.second) {
            throw std::invalid_argument("gates within one layer must act on disjoint qubits");
        }
        used[g.first] = used[g.second] = true;
        split.push_back(split_gate(g, order));
    }

    // gates spanning cut c (between sites c-1 and c), in layer order
    std::vector<std::vector<std::size_t>> spanning(n + 1);
    for (std::size_t gi = 0; gi < split.size(); ++gi) {
        for (std::size_t c = split[gi].left_site + 1; c <= split[gi].right_site; ++c) spanning[c].push_back(gi);
    }
    for (const auto& s : spanning) {
        if (s.size() > 8) throw std::length_error("layer MPO bond dimension exceeds 4^8");
    }

    // gate acting on each site, if any
    std::vector<long> actor(n, -1);
    for (std::size_t gi = 0; gi < split.size(); ++gi) {
        actor[split[gi].left_site] = static_cast<long>(gi);
        actor[split[gi].right_site] = static_cast<long>(gi);
    }

    Mpo mpo;
    mpo.sites.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        const auto& lset = spanning[p];
        const auto& rset = spanning[p + 1];
        const auto wl = static_cast<Eigen::Index>(pow4(lset.size()));
        const auto wr = static_cast<Eigen::Index>(pow4(rset.size()));
        for (auto& m : mpo.sites[p]) m = CMatrix::Zero(wl, wr);

        // Bond digits are base-4, least significant digit = first gate of the set.
        auto digit_of = [](const std::vector<std::size_t>& set, std::size_t index, std::size_t gi) -> long {
            for (std::size_t k = 0; k < set.size(); ++k) {
                if (set[k] == gi) return static_cast<long>((index >> (2 * k)) & 3U);
            }
            return -1;
        };

        for (Eigen::Index l = 0; l < wl; ++l) {
            // Build the right index: pass-through digits copy over, a gate
            // starting here opens a new digit.
            std::size_t r_base = 0;
            long opening = -1;
            std::size_t opening_slot = 0;
            for (std::size_t k = 0; k < rset.size(); ++k) {
                const long d = digit_of(lset, static_cast<std::size_t>(l), rset[k]);
                if (d >= 0) {
                    r_base |= static_cast<std::size_t>(d) << (2 * k);
                } else {
                    opening = static_cast<long>(rset[k]);
                    opening_slot = k;
                }
            }
            const long act = actor[p];
            if (act < 0) {
                mpo.sites[p][0](l, static_cast<Eigen::Index>(r_base)) = 1.0;
                mpo.sites[p][3](l, static_cast<Eigen::Index>(r_base)) = 1.0;
            } else if (opening >= 0) {
                const auto& sg = split[static_cast<std::size_t>(opening)];
                for (std::size_t k = 0; k < 4; ++k) {
                    const auto r = static_cast<Eigen::Index>(r_base | (k << (2 * opening_slot)));
                    for (int a = 0; a < 4; ++a) mpo.sites[p][a](l, r) = sg.left[k][a];
                }
            } else {
                // gate closes here: its digit lives only on the left bond
                const long k = digit_of(lset, static_cast<std::size_t>(l), static_cast<std::size_t>(act));
                const auto& sg = split[static_cast<std::size_t>(act)];
                for (int a = 0; a < 4; ++a) {
                    mpo.sites[p][a](l, static_cast<Eigen::Index>(r_base)) = sg.right[static_cast<std::size_t>(k)][a];
                }
            }
        }
    }
    return mpo;
}

// ---------------------------------------------------------------------------
// MPO application

void apply_mpo(Mps& mps, const Mpo& mpo) {
    const std::size_t n = mps.size();
    if (mpo.size() != n) throw std::invalid_argument("MPO and MPS lengths differ");
    if (n == 0) return;
    const auto& policy = mps.policy();
    auto& sites = mps.sites();

    // Zip-up. `carry` has rows = new left bond and columns indexed by
    // (mpo bond b, old mps bond alpha) as b * chi_old + alpha.
    CMatrix carry = CMatrix::Ones(1, 1);
    double discarded = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const auto& a = sites[p];
        const auto& w = mpo.sites[p];
        const Eigen::Index chi_new = carry.rows();
        const Eigen::Index chi_old_l = a[0].rows();
        const Eigen::Index chi_old_r = a[0].cols();
        const Eigen::Index wl = w[0].rows();
        const Eigen::Index wr = w[0].cols();

        CMatrix t = CMatrix::Zero(2 * chi_new, wr * chi_old_r);
        for (Eigen::Index b = 0; b < wl; ++b) {
            const auto slice = carry.middleCols(b * chi_old_l, chi_old_l);
            for (int in = 0; in < 2; ++in) {
                CMatrix prod;
                bool have = false;
                for (int out = 0; out < 2; ++out) {
                    const auto& wm = w[2 * out + in];
                    for (Eigen::Index c = 0; c < wr; ++c) {
                        const cplx coef = wm(b, c);
                        if (coef == cplx{0.0, 0.0}) continue;
                        if (!have) {
                            prod = slice * a[in];
                            have = true;
                        }
                        t.block(out * chi_new, c * chi_old_r, chi_new, chi_old_r) += coef * prod;
                    }
                }
            }
        }

        if (p + 1 == n) {
            sites[p][0] = t.topRows(chi_new);
            sites[p][1] = t.bottomRows(chi_new);
            break;
        }
        // Zip-up singular values are not Schmidt values, so a cap can lose
        // weight the final sweep would have kept. Cap only at cuts where
        // chi_max is below the Hilbert-space bound and truncation is lossy
        // anyway; elsewhere a rank-revealing QR keeps everything.
        const std::size_t short_side = std::min(p + 1, n - p - 1);
        const bool exact_cut = short_side < 63 && (std::size_t{1} << short_side) <= policy.chi_max;
        if (exact_cut) {
            Eigen::ColPivHouseholderQR<CMatrix> qr(t);
            qr.setThreshold(policy.cutoff * 1e-2);
            const Eigen::Index k = std::max<Eigen::Index>(1, qr.rank());
            const CMatrix q = qr.householderQ() * CMatrix::Identity(t.rows(), k);
            sites[p][0] = q.topRows(chi_new);
            sites[p][1] = q.bottomRows(chi_new);
            const CMatrix r = qr.matrixR().topRows(k).template triangularView<Eigen::Upper>();
            carry = r * qr.colsPermutation().transpose();
            continue;
        }
        const Svd svd = thin_svd(t);
        const Eigen::VectorXd& s = svd.singularValues();
        const Eigen::Index k = keep_count(s, 2 * policy.chi_max, policy.cutoff);
        discarded += discarded_weight(s, k);
        const CMatrix u = svd.matrixU().leftCols(k);
        sites[p][0] = u.topRows(chi_new);
        sites[p][1] = u.bottomRows(chi_new);
        carry = s.head(k).asDiagonal() * svd.matrixV().leftCols(k).adjoint();
    }

    // Right-to-left sweep with exact Schmidt truncation.
    for (std::size_t p = n - 1; p >= 1; --p) {
        auto& a = sites[p];
        const Eigen::Index chi_l = a[0].rows();
        const Eigen::Index chi_r = a[0].cols();
        CMatrix m(chi_l, 2 * chi_r);
        m << a[0], a[1];
        const Svd svd = thin_svd(m);
        const Eigen::VectorXd& s = svd.singularValues();
        const Eigen::Index k = keep_count(s, policy.chi_max, policy.cutoff);
        discarded += discarded_weight(s, k);
        const CMatrix vh = svd.matrixV().leftCols(k).adjoint();
        a[0] = vh.leftCols(chi_r);
        a[1] = vh.rightCols(chi_r);
        const CMatrix us = svd.matrixU().leftCols(k) * s.head(k).asDiagonal();
        sites[p - 1][0] = sites[p - 1][0] * us;
        sites[p - 1][1] = sites[p - 1][1] * us;
    }
    const double nrm = std::sqrt(sites[0][0].squaredNorm() + sites[0][1].squaredNorm());
    if (nrm == 0.0) throw std::runtime_error("MPS collapsed to zero norm");
    sites[0][0] /= nrm;
    sites[0][1] /= nrm;
    mps.add_truncation_error(discarded);
}

void apply_local(Mps& mps, std::size_t qubit, const Mat2& gate) {
    const std::size_t p = mps.order().position.at(qubit);
    auto& a = mps.sites()[p];
    const CMatrix a0 = a[0];
    const CMatrix a1 = a[1];
    a[0] = gate(0, 0) * a0 + gate(0, 1) * a1;
    a[1] = gate(1, 0) * a0 + gate(1, 1) * a1;
}

MpsCycle::MpsCycle(const GateSequence& cycle, const UnrollOrder& order) : kicks_(cycle.kicks) {
    if (cycle.n_qubits != order.size()) throw std::invalid_argument("cycle and order sizes differ");
    for (std::size_t k = 0; k < 3; ++k) mpos_[k] = layer_to_mpo(cycle.layers[k], order);
}

void MpsCycle::apply(Mps& mps) const {
    for (const auto& g : kicks_) apply_local(mps, g.qubit, g.matrix);
    for (const auto& mpo : mpos_) apply_mpo(mps, mpo);
}

void evolve_cycle_mps(Mps& mps, const GateSequence& cycle) { MpsCycle(cycle, mps.order()).apply(mps); }

// ---------------------------------------------------------------------------
// Observables

namespace {

// right[p] = environment of sites p..N-1 (right[N] = 1)
std::vector<CMatrix> right_environments(const Mps& mps) {
    const auto& sites = mps.sites();
    std::vector<CMatrix> env(sites.size() + 1);
    env[sites.size()] = CMatrix::Ones(1, 1);
    for (std::size_t p = sites.size(); p-- > 0;) {
        env[p] = sites[p][0] * env[p + 1] * sites[p][0].adjoint() + sites[p][1] * env[p + 1] * sites[p][1].adjoint();
    }
    return env;
}

CMatrix transfer(const CMatrix& left, const std::array<CMatrix, 2>& a, double z0, double z1) {
    return z0 * (a[0].adjoint() * left * a[0]) + z1 * (a[1].adjoint() * left * a[1]);
}

double close(const CMatrix& left, const std::array<CMatrix, 2>& a, const CMatrix& right, double z0, double z1) {
    return (transfer(left, a, z0, z1) * right).trace().real();
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

std::vector<double> mps_expect_z_all(const Mps& mps) {
    const auto& sites = mps.sites();
    const auto right = right_environments(mps);
    const double nrm = right[0](0, 0).real();
    std::vector<double> z(sites.size());
    CMatrix left = CMatrix::Ones(1, 1);
    for (std::size_t p = 0; p < sites.size(); ++p) {
        z[mps.order().qubit[p]] = clamp_unit(close(left, sites[p], right[p + 1], 1.0, -1.0) / nrm);
        left = transfer(left, sites[p], 1.0, 1.0);
    }
    return z;
}

std::vector<double> mps_expect_zz_matrix(const Mps& mps) {
    const auto& sites = mps.sites();
    const std::size_t n = sites.size();
    const auto right = right_environments(mps);
    const double nrm = right[0](0, 0).real();
    const auto& qubit = mps.order().qubit;
    std::vector<double> zz(n * n, 0.0);
    CMatrix left = CMatrix::Ones(1, 1);
    for (std::size_t p = 0; p < n; ++p) {
        zz[qubit[p] * n + qubit[p]] = 1.0;
        CMatrix e = transfer(left, sites[p], 1.0, -1.0);
        for (std::size_t q = p + 1; q < n; ++q) {
            const double v = clamp_unit(close(e, sites[q], right[q + 1], 1.0, -1.0) / nrm);
            zz[qubit[p] * n + qubit[q]] = v;
            zz[qubit[q] * n + qubit[p]] = v;
            if (q + 1 < n) e = transfer(e, sites[q], 1.0, 1.0);
        }
        left = transfer(left, sites[p], 1.0, 1.0);
    }
    return zz;
}

double mps_expect_z(const Mps& mps, std::size_t qubit) {
    if (qubit >= mps.size()) throw std::out_of_range("qubit index out of range");
    return mps_expect_z_all(mps)[qubit];
}

double mps_expect_zz(const Mps& mps, std::size_t qubit_i, std::size_t qubit_j) {
    const std::size_t n = mps.size();
    if (qubit_i >= n || qubit_j >= n) throw std::out_of_range("qubit index out of range");
    if (qubit_i == qubit_j) return 1.0;
    std::size_t p = mps.order().position[qubit_i];
    std::size_t q = mps.order().position[qubit_j];
    if (p > q) std::swap(p, q);
    const auto& sites = mps.sites();
    const auto right = right_environments(mps);
    CMatrix e = CMatrix::Ones(1, 1);
    for (std::size_t m = 0; m < p; ++m) e = transfer(e, sites[m], 1.0, 1.0);
    e = transfer(e, sites[p], 1.0, -1.0);
    for (std::size_t m = p + 1; m < q; ++m) e = transfer(e, sites[m], 1.0, 1.0);
    return clamp_unit(close(e, sites[q], right[q + 1], 1.0, -1.0) / right[0](0, 0).real());
}

std::vector<Bitstring> mps_sample_bits(const Mps& mps, std::size_t shots, std::uint64_t seed) {
    if (shots == 0) throw std::invalid_argument("shots must be positive");
    const auto& sites = mps.sites();
    const std::size_t n = sites.size();
    const auto right = right_environments(mps);
    Rng rng(seed);
    std::vector<Bitstring> out;
    out.reserve(shots);
    for (std::size_t s = 0; s < shots; ++s) {
        Bitstring bits(n);
        CMatrix v = CMatrix::Ones(1, 1);
        for (std::size_t p = 0; p < n; ++p) {
            const CMatrix c0 = v * sites[p][0];
            const CMatrix c1 = v * sites[p][1];
            const double w0 = std::max(0.0, (c0 * right[p + 1] * c0.adjoint())(0, 0).real());
            const double w1 = std::max(0.0, (c1 * right[p + 1] * c1.adjoint())(0, 0).real());
            const bool one = rng.uniform() * (w0 + w1) >= w0;
            bits[mps.order().qubit[p]] = one ? 1 : 0;
            v = one ? CMatrix(c1 / std::sqrt(w1)) : CMatrix(c0 / std::sqrt(w0));
        }
        out.push_back(std::move(bits));
    }
    return out;
}

StateVector mps_to_statevector(const Mps& mps) {
    const std::size_t n = mps.size();
    StateVector sv(n);
    auto& amps = sv.amplitudes();
    const auto& sites = mps.sites();
    // contract left to right: rows = chain configurations so far
    CMatrix acc = CMatrix::Ones(1, 1);
    for (std::size_t p = 0; p < n; ++p) {
        CMatrix next(acc.rows() * 2, sites[p][0].cols());
        next.topRows(acc.rows()) = acc * sites[p][0];
        next.bottomRows(acc.rows()) = acc * sites[p][1];
        acc = std::move(next);
    }
    // row index r: bit p of r (from the top, p = n-1 most significant) is site p's value
    for (Eigen::Index r = 0; r < acc.rows(); ++r) {
        std::size_t index = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if ((static_cast<std::size_t>(r) >> p) & 1U) index |= std::size_t{1} << mps.order().qubit[p];
        }
        amps[index] = acc(r, 0);
    }
    return sv;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'D', 'T', 'C', 'M', 'P', 'S', '0', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated MPS checkpoint");
    return v;
}

}  // namespace

void save_mps(const Mps& mps, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os.write(kMagic, sizeof(kMagic));
    put<std::uint64_t>(os, mps.size());
    put<std::uint64_t>(os, mps.policy().chi_max);
    put<double>(os, mps.policy().cutoff);
    put<double>(os, mps.truncation_error());
    for (auto q : mps.order().qubit) put<std::uint64_t>(os, q);
    for (const auto& site : mps.sites()) {
        put<std::uint64_t>(os, static_cast<std::uint64_t>(site[0].rows()));
        put<std::uint64_t>(os, static_cast<std::uint64_t>(site[0].cols()));
        for (const auto& m : site) os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
    }
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

Mps load_mps(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("not an MPS checkpoint");
    const auto n = get<std::uint64_t>(is);
    TruncationPolicy policy;
    policy.chi_max = get<std::uint64_t>(is);
    policy.cutoff = get<double>(is);
    const double trunc = get<double>(is);
    std::vector<std::size_t> qubits(n);
    for (auto& q : qubits) q = get<std::uint64_t>(is);
    std::vector<std::array<CMatrix, 2>> sites(n);
    for (auto& site : sites) {
        const auto rows = static_cast<Eigen::Index>(get<std::uint64_t>(is));
        const auto cols = static_cast<Eigen::Index>(get<std::uint64_t>(is));
        for (auto& m : site) {
            m.resize(rows, cols);
            is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
        }
    }
    if (!is) throw std::runtime_error("truncated MPS checkpoint");
    Mps mps(make_unroll_order(std::move(qubits)), std::move(sites), policy);
    mps.add_truncation_error(trunc);
    return mps;
}

}  // namespace dtc
