#include "dtc/lattice.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace dtc {

std::size_t heavy_hex_qubit_count(std::size_t rows, std::size_t cols) {
    return 5 * rows * cols + 4 * rows + 4 * cols - 1;
}

std::vector<std::vector<std::size_t>> HeavyHexLattice::adjacency() const {
    std::vector<std::vector<std::size_t>> adj(n_qubits);
    for (const auto& [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    return adj;
}

std::size_t HeavyHexLattice::degree(std::size_t q) const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [q](const Edge& e) {
        return e.first == q || e.second == q;
    }));
}

std::vector<std::size_t> HeavyHexLattice::layer_edges(int k) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (layer_of_edge[e] == k) out.push_back(e);
    }
    return out;
}

std::size_t HeavyHexLattice::edge_index(std::size_t i, std::size_t j) const {
    const Edge key{std::min(i, j), std::max(i, j)};
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    if (it == edges.end() || *it != key) throw std::out_of_range("no such edge");
    return static_cast<std::size_t>(it - edges.begin());
}

HeavyHexLattice build_lattice(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("lattice needs at least one hexagon");

    const int r = static_cast<int>(rows);
    const int c = static_cast<int>(cols);
    auto row_offset = [](int k) { return k % 2; };

    // x-range of vertex line l
    auto line_range = [&](int l) -> std::pair<int, int> {
        int lo = 1 << 20;
        int hi = -1;
        for (int k : {l - 1, l}) {
            if (k < 0 || k >= r) continue;
            lo = std::min(lo, row_offset(k));
            hi = std::max(hi, row_offset(k) + 2 * c);
        }
        return {lo, hi};
    };

    HeavyHexLattice lat;
    lat.rows = rows;
    lat.cols = cols;

    // Qubits are numbered line by line: the vertices of a line interleaved
    // with its horizontal link qubits, then the vertical link qubits that
    // hang below that line.
    std::map<std::pair<int, int>, std::size_t> vertex_id;  // (line, x) -> qubit
    std::vector<Edge> edges;
    auto add_qubit = [&](SiteKind kind, int x2, int y2) {
        lat.positions.push_back({kind, x2, y2});
        lat.bipartition.push_back(kind == SiteKind::Vertex ? Sublattice::A : Sublattice::B);
        return lat.positions.size() - 1;
    };

    std::vector<std::vector<std::size_t>> pending_bridges(static_cast<std::size_t>(r));
    for (int l = 0; l <= r; ++l) {
        const auto [lo, hi] = line_range(l);
        std::size_t prev = 0;
        for (int x = lo; x <= hi; ++x) {
            if (x > lo) {
                const std::size_t link = add_qubit(SiteKind::HorizontalLink, 2 * x - 1, 2 * l);
                edges.emplace_back(prev, link);
                prev = link;
            }
            const std::size_t v = add_qubit(SiteKind::Vertex, 2 * x, 2 * l);
            vertex_id[{l, x}] = v;
            if (x > lo) edges.emplace_back(prev, v);
            prev = v;
        }
        if (l > 0) {
            // close the vertical links of hexagon row l-1 onto this line
            const int k = l - 1;
            std::size_t idx = 0;
            for (int j = 0; j <= c; ++j) {
                const int x = 2 * j + row_offset(k);
                edges.emplace_back(pending_bridges[k][idx++], vertex_id.at({l, x}));
            }
        }
        if (l < r) {
            for (int j = 0; j <= c; ++j) {
                const int x = 2 * j + row_offset(l);
                const std::size_t b = add_qubit(SiteKind::VerticalLink, 2 * x, 2 * l + 1);
                edges.emplace_back(vertex_id.at({l, x}), b);
                pending_bridges[l].push_back(b);
            }
        }
    }

    lat.n_qubits = lat.positions.size();
    for (auto& e : edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    lat.edges = std::move(edges);
    lat.layer_of_edge = color_layers(lat);
    return lat;
}

std::vector<int> color_layers(const HeavyHexLattice& lattice) {
    constexpr int n_colors = 3;
    const std::size_t n = lattice.n_qubits;
    // at[q][color] = edge index holding that color at q, or -1
    std::vector<std::array<long, n_colors>> at(n);
    for (auto& a : at) a.fill(-1);
    std::vector<int> color(lattice.edges.size(), -1);

    for (std::size_t q = 0; q < n; ++q) {
        if (lattice.degree(q) > n_colors) throw std::logic_error("lattice is not subcubic");
    }

    auto other_end = [&](std::size_t e, std::size_t q) {
        const auto& [i, j] = lattice.edges[e];
        return i == q ? j : i;
    };

    for (std::size_t e = 0; e < lattice.edges.size(); ++e) {
        const auto [u, v] = lattice.edges[e];
        int common = -1;
        for (int k = 0; k < n_colors && common < 0; ++k) {
            if (at[u][k] < 0 && at[v][k] < 0) common = k;
        }
        if (common < 0) {
            int a = -1;
            int b = -1;
            for (int k = 0; k < n_colors; ++k) {
                if (a < 0 && at[u][k] < 0) a = k;
                if (b < 0 && at[v][k] < 0) b = k;
            }
            if (a < 0 || b < 0) throw std::logic_error("no free color at an edge endpoint");
            // Swap colors a and b along the a/b path starting at v with color a.
            std::vector<std::size_t> path;
            std::size_t q = v;
            int want = a;
            while (at[q][want] >= 0) {
                const auto pe = static_cast<std::size_t>(at[q][want]);
                path.push_back(pe);
                q = other_end(pe, q);
                if (q == u) throw std::logic_error("alternating path closed on the edge; graph not bipartite");
                want = (want == a) ? b : a;
            }
            for (std::size_t pe : path) {
                const auto [i, j] = lattice.edges[pe];
                at[i][color[pe]] = -1;
                at[j][color[pe]] = -1;
            }
            for (std::size_t pe : path) {
                color[pe] = (color[pe] == a) ? b : a;
                const auto [i, j] = lattice.edges[pe];
                at[i][color[pe]] = static_cast<long>(pe);
                at[j][color[pe]] = static_cast<long>(pe);
            }
            if (at[u][a] >= 0 || at[v][a] >= 0) throw std::logic_error("edge-coloring repair failed");
            common = a;
        }
        color[e] = common;
        at[u][common] = static_cast<long>(e);
        at[v][common] = static_cast<long>(e);
    }

    std::vector<int> layer(color.size());
    std::transform(color.begin(), color.end(), layer.begin(), [](int k) { return k + 1; });
    return layer;
}

UnrollOrder make_unroll_order(std::vector<std::size_t> qubit_at_position) {
    UnrollOrder order;
    order.qubit = std::move(qubit_at_position);
    order.position.assign(order.qubit.size(), order.qubit.size());
    for (std::size_t p = 0; p < order.qubit.size(); ++p) {
        const std::size_t q = order.qubit[p];
        if (q >= order.qubit.size() || order.position[q] != order.qubit.size()) {
            throw std::invalid_argument("unroll order is not a permutation");
        }
        order.position[q] = p;
    }
    return order;
}

std::size_t max_cut_overlap(const HeavyHexLattice& lattice, const UnrollOrder& order) {
    std::size_t worst = 0;
    for (int k = 1; k <= 3; ++k) {
        std::vector<int> crossing(lattice.n_qubits + 1, 0);
        for (std::size_t e : lattice.layer_edges(k)) {
            auto p = order.position[lattice.edges[e].first];
            auto q = order.position[lattice.edges[e].second];
            if (p > q) std::swap(p, q);
            // cut c lies between sites c-1 and c
            for (std::size_t cut = p + 1; cut <= q; ++cut) ++crossing[cut];
        }
        worst = std::max(worst, static_cast<std::size_t>(*std::max_element(crossing.begin(), crossing.end())));
    }
    return worst;
}

std::size_t max_edge_span(const HeavyHexLattice& lattice, const UnrollOrder& order) {
    std::size_t worst = 0;
    for (const auto& [i, j] : lattice.edges) {
        const auto p = order.position[i];
        const auto q = order.position[j];
        worst = std::max(worst, p > q ? p - q : q - p);
    }
    return worst;
}

namespace {

// Sort qubits into stripes by `major`, reversing `minor` on odd stripes.
UnrollOrder snake(const HeavyHexLattice& lattice, bool by_column) {
    std::vector<std::size_t> qubits(lattice.n_qubits);
    std::iota(qubits.begin(), qubits.end(), std::size_t{0});
    auto key = [&](std::size_t q) {
        const auto& p = lattice.positions[q];
        const int major = by_column ? p.x2 : p.y2;
        const int minor = by_column ? p.y2 : p.x2;
        return std::make_pair(major, (major % 2 == 0) ? minor : -minor);
    };
    std::stable_sort(qubits.begin(), qubits.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    return make_unroll_order(std::move(qubits));
}

}  // namespace

UnrollOrder row_snake_order(const HeavyHexLattice& lattice) { return snake(lattice, false); }

UnrollOrder column_snake_order(const HeavyHexLattice& lattice) { return snake(lattice, true); }

UnrollOrder unroll(const HeavyHexLattice& lattice) {
    UnrollOrder by_row = row_snake_order(lattice);
    UnrollOrder by_col = column_snake_order(lattice);
    auto score = [&](const UnrollOrder& o) {
        return std::make_pair(max_cut_overlap(lattice, o), max_edge_span(lattice, o));
    };
    return score(by_col) < score(by_row) ? by_col : by_row;
}

nlohmann::json lattice_to_json(const HeavyHexLattice& lattice) {
    nlohmann::json j;
    j["rows"] = lattice.rows;
    j["cols"] = lattice.cols;
    j["n_qubits"] = lattice.n_qubits;
    auto edges = nlohmann::json::array();
    for (std::size_t e = 0; e < lattice.edges.size(); ++e) {
        edges.push_back({lattice.edges[e].first, lattice.edges[e].second, lattice.layer_of_edge[e]});
    }
    j["edges"] = std::move(edges);
    auto bip = nlohmann::json::array();
    for (auto s : lattice.bipartition) bip.push_back(static_cast<int>(s));
    j["bipartition"] = std::move(bip);
    return j;
}

}  // namespace dtc
