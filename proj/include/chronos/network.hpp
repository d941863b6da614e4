#pragma once

#include <utility>
#include <vector>

#include "chronos/numerics.hpp"

namespace chronos {

/// One directed edge in canonical order: the state slice measured at `at`
/// describing neighbor `of` (phase/frequency of `of` relative to `at`).
struct DirectedEdge {
    int at = 0;
    int of = 0;
};

/// Ensemble graph plus GNSS attachments with every derived interconnection
/// matrix populated at construction. Indices are 0-based internally.
///
/// Directed edges are ordered node by node, neighbors ascending; all stacked
/// objects (V rows, measurement noise R, edge-state vectors) follow this
/// canonical order.
struct Topology {
    int n = 0; // ensemble clocks
    int g = 0; // GNSS receivers

    std::vector<std::pair<int, int>> edges;       // undirected, first < second
    std::vector<std::pair<int, int>> attachments; // (gac, mac)

    std::vector<std::vector<int>> neighbors; // ascending per node
    std::vector<DirectedEdge> directed;      // canonical order, size |E|
    std::vector<int> reverse_edge;           // index of (of, at) for each directed edge

    Mat adjacency;  // n x n
    Mat degree;     // n x n diagonal
    Mat laplacian;  // n x n
    std::vector<Mat> V_i; // per-node edge matrices, |N_i| x n
    Mat V;          // |E| x n
    Mat V_G;        // g x (n+g)
    Mat Vdagger;    // n x |E| pseudoinverse of V
    Vec q;          // (1/n) 1_n
    Vec q_G;        // (1/g) 1_g
    Vec q_A;        // receiver-adjacency indicator
    Mat Pi;         // I_n - 1_n q^T

    int edge_count() const { return static_cast<int>(directed.size()); }

    /// Row of V holding the edge measured at `at` describing `of`.
    int edge_index(int at, int of) const;
};

/// Laplacian D - A of a symmetric 0/1 adjacency with zero diagonal.
Mat laplacian(const Mat& adjacency);

/// Builds and fully validates a topology. `edges` are undirected clock
/// pairs, `attachments` map each receiver to its adjacent clock. Throws
/// BadIndex, TooManyReceivers or Disconnected.
Topology build_topology(int n, int g, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<std::pair<int, int>>& attachments);

} // namespace chronos
