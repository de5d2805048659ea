#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace dtc {

using Edge = std::pair<std::size_t, std::size_t>;

enum class Sublattice : int { A = 0, B = 1 };

/// Where a qubit sits in the decorated brick-wall embedding.
enum class SiteKind { Vertex, HorizontalLink, VerticalLink };

/// Doubled integer coordinates: vertices sit at even (x2, y2), link qubits
/// at the midpoint of the bond they decorate.
struct SitePosition {
    SiteKind kind;
    int x2;
    int y2;
};

/// Heavy-hexagonal lattice of `rows` x `cols` hexagons.
///
/// The hexagonal lattice is laid out as a brick wall: hexagon row k spans
/// vertex lines k and k+1, and odd rows are shifted by one vertex. Every
/// bond of the hexagonal lattice carries one extra link qubit, so the qubit
/// count is 5*rows*cols + 4*rows + 4*cols - 1. Vertex qubits form
/// sublattice A and link qubits sublattice B.
///
/// Edges are stored in canonical order (lexicographic by (min, max)) and
/// `layer_of_edge[e]` in {1, 2, 3} gives the gate layer of edge e.
struct HeavyHexLattice {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t n_qubits = 0;
    std::vector<Edge> edges;
    std::vector<int> layer_of_edge;
    std::vector<Sublattice> bipartition;
    std::vector<SitePosition> positions;

    [[nodiscard]] std::vector<std::vector<std::size_t>> adjacency() const;
    [[nodiscard]] std::size_t degree(std::size_t q) const;
    /// Edge indices of layer k (1-based), in canonical order.
    [[nodiscard]] std::vector<std::size_t> layer_edges(int k) const;
    [[nodiscard]] std::size_t edge_index(std::size_t i, std::size_t j) const;
};

/// Number of qubits of a rows x cols heavy-hex patch.
[[nodiscard]] std::size_t heavy_hex_qubit_count(std::size_t rows, std::size_t cols);

/// Builds the lattice, including its three-layer gate coloring.
[[nodiscard]] HeavyHexLattice build_lattice(std::size_t rows, std::size_t cols);

/// Proper edge coloring with three colors. Edges are visited in canonical
/// order and take the lowest color free at both ends; when none is free an
/// alternating two-color path is swapped (always possible on a bipartite
/// graph of maximum degree 3). Throws std::logic_error if the graph is not
/// subcubic or the repair fails.
[[nodiscard]] std::vector<int> color_layers(const HeavyHexLattice& lattice);

/// Chain placement of the qubits for MPS simulation.
/// `position[q]` is the chain site of lattice qubit q; `qubit[p]` the inverse.
struct UnrollOrder {
    std::vector<std::size_t> position;
    std::vector<std::size_t> qubit;

    [[nodiscard]] std::size_t size() const { return position.size(); }
};

[[nodiscard]] UnrollOrder make_unroll_order(std::vector<std::size_t> qubit_at_position);

/// Number of gates of each layer that straddle each chain cut, maximized
/// over layers and cuts. The per-layer MPO bond dimension is 4 to this power.
[[nodiscard]] std::size_t max_cut_overlap(const HeavyHexLattice& lattice, const UnrollOrder& order);

/// Largest chain distance |pos(i) - pos(j)| over lattice edges.
[[nodiscard]] std::size_t max_edge_span(const HeavyHexLattice& lattice, const UnrollOrder& order);

/// Snake ordering that sweeps across the short direction of the brick
/// wall. Both the column-wise and the row-wise snakes are generated and the
/// one with the smaller cut overlap (then smaller edge span) is returned.
[[nodiscard]] UnrollOrder unroll(const HeavyHexLattice& lattice);

[[nodiscard]] UnrollOrder row_snake_order(const HeavyHexLattice& lattice);
[[nodiscard]] UnrollOrder column_snake_order(const HeavyHexLattice& lattice);

/// {"rows", "cols", "n_qubits", "edges": [[i, j, layer], ...], "bipartition": [0/1, ...]}
[[nodiscard]] nlohmann::json lattice_to_json(const HeavyHexLattice& lattice);

}  // namespace dtc
