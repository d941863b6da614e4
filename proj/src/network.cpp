#include "chronos/network.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

namespace chronos {

int Topology::edge_index(int at, int of) const {
    for (int e = 0; e < edge_count(); ++e)
        if (directed[e].at == at && directed[e].of == of) return e;
    throw BadIndex("edge_index: no such directed edge");
}

Mat laplacian(const Mat& adjacency) {
    Mat deg = Mat::Zero(adjacency.rows(), adjacency.cols());
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
        deg(i, i) = adjacency.row(i).sum();
    return deg - adjacency;
}

Topology build_topology(int n, int g, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<std::pair<int, int>>& attachments) {
    if (n < 2) throw BadIndex("build_topology: need at least two ensemble clocks");
    if (g >= n) throw TooManyReceivers("build_topology: receiver count must be below clock count");
    if (static_cast<int>(attachments.size()) != g)
        throw BadIndex("build_topology: need exactly one attachment per receiver");

    Topology t;
    t.n = n;
    t.g = g;

    t.adjacency = Mat::Zero(n, n);
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b)
            throw BadIndex("build_topology: edge endpoint out of range");
        auto norm = std::minmax(a, b);
        if (!seen.insert({norm.first, norm.second}).second)
            throw BadIndex("build_topology: duplicate edge");
        t.edges.emplace_back(norm.first, norm.second);
        t.adjacency(a, b) = 1.0;
        t.adjacency(b, a) = 1.0;
    }
    std::sort(t.edges.begin(), t.edges.end());

    std::set<int> gacs_seen, macs_seen;
    for (auto [gac, mac] : attachments) {
        if (gac < 0 || gac >= g || mac < 0 || mac >= n)
            throw BadIndex("build_topology: attachment index out of range");
        if (!gacs_seen.insert(gac).second)
            throw BadIndex("build_topology: receiver attached twice");
        if (!macs_seen.insert(mac).second)
            throw BadIndex("build_topology: clock hosts more than one receiver");
    }
    t.attachments = attachments;
    std::sort(t.attachments.begin(), t.attachments.end());

    t.degree = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) t.degree(i, i) = t.adjacency.row(i).sum();
    t.laplacian = t.degree - t.adjacency;

    // connectivity via the Fiedler value
    Eigen::SelfAdjointEigenSolver<Mat> es(t.laplacian);
    if (es.eigenvalues()(1) <= 1e-9)
        throw Disconnected("build_topology: ensemble graph is not connected");

    t.neighbors.assign(n, {});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (t.adjacency(i, j) > 0.5) t.neighbors[i].push_back(j);

    for (int i = 0; i < n; ++i)
        for (int j : t.neighbors[i]) t.directed.push_back({i, j});
    const int m = t.edge_count();

    t.V_i.resize(n);
    t.V = Mat::Zero(m, n);
    {
        int row = 0;
        for (int i = 0; i < n; ++i) {
            const int mi = static_cast<int>(t.neighbors[i].size());
            t.V_i[i] = Mat::Zero(mi, n);
            for (int r = 0; r < mi; ++r) {
                const int j = t.neighbors[i][r];
                t.V_i[i](r, j) = 1.0;
                t.V_i[i](r, i) = -1.0;
            }
            t.V.block(row, 0, mi, n) = t.V_i[i];
            row += mi;
        }
    }

    t.reverse_edge.resize(m);
    for (int e = 0; e < m; ++e)
        t.reverse_edge[e] = t.edge_index(t.directed[e].of, t.directed[e].at);

    t.V_G = Mat::Zero(g, n + g);
    for (auto [gac, mac] : t.attachments) {
        t.V_G(gac, mac) = -1.0;
        t.V_G(gac, n + gac) = 1.0;
    }

    t.q = Vec::Constant(n, 1.0 / n);
    t.q_G = g > 0 ? Vec::Constant(g, 1.0 / g) : Vec();
    t.q_A = Vec::Zero(n);
    for (auto [gac, mac] : t.attachments) t.q_A(mac) = 1.0;
    t.Pi = Mat::Identity(n, n) - Vec::Ones(n) * t.q.transpose();
    t.Vdagger = pinv(t.V);

    return t;
}

} // namespace chronos
