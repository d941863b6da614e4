#include <doctest.h>

#include <random>

#include "chronos/network.hpp"

using namespace chronos;

namespace {

// path 1-2-3 with receivers on clocks 1 and 3
Topology example_topology() {
    return build_topology(3, 2, {{0, 1}, {1, 2}}, {{0, 0}, {1, 2}});
}

Topology random_connected(std::mt19937& gen, int n) {
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        edges.emplace_back(parent(gen), i); // random spanning tree
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(gen) && std::find(edges.begin(), edges.end(), std::make_pair(i, j)) ==
                                 edges.end())
                edges.emplace_back(i, j);
    return build_topology(n, 1, edges, {{0, 0}});
}

} // namespace

TEST_CASE("example network matrices") {
    const Topology t = example_topology();

    Mat v_expected(4, 3);
    v_expected << -1, 1, 0, 1, -1, 0, 0, -1, 1, 0, 1, -1;
    CHECK(t.V.isApprox(v_expected));

    Mat vg_expected(2, 5);
    vg_expected << -1, 0, 0, 1, 0, 0, 0, -1, 0, 1;
    CHECK(t.V_G.isApprox(vg_expected));

    CHECK(t.q_A.isApprox(Eigen::Vector3d(1, 0, 1)));
    CHECK(t.q.isApprox(Eigen::Vector3d::Constant(1.0 / 3.0)));
    CHECK(t.q_G.isApprox(Eigen::Vector2d::Constant(0.5)));

    CHECK(t.directed.size() == 4);
    CHECK(t.edge_index(0, 1) == 0);
    CHECK(t.edge_index(1, 0) == 1);
    CHECK(t.edge_index(1, 2) == 2);
    CHECK(t.edge_index(2, 1) == 3);
    CHECK(t.reverse_edge == std::vector<int>({1, 0, 3, 2}));
}

TEST_CASE("laplacian") {
    Mat path(3, 3);
    path << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    Mat expected(3, 3);
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK(laplacian(path).isApprox(expected));

    Mat complete = Mat::Ones(3, 3) - Mat::Identity(3, 3);
    CHECK(laplacian(complete).isApprox(3.0 * Mat::Identity(3, 3) - Mat::Ones(3, 3)));

    CHECK(laplacian(Mat::Zero(4, 4)).isZero());
}

TEST_CASE("topology invariants") {
    const Topology t = example_topology();

    CHECK((t.laplacian * Vec::Ones(3)).norm() < 1e-14);
    CHECK(t.q.sum() == doctest::Approx(1.0));
    for (int i = 0; i < t.n; ++i) CHECK(t.V_i[i].rowwise().sum().norm() < 1e-14);
    CHECK((t.q.transpose() * t.Vdagger).norm() < 1e-9);

    // every receiver row: one -1 in the clock block, one +1 in the receiver block
    for (int j = 0; j < t.g; ++j) {
        CHECK(t.V_G.row(j).head(t.n).sum() == doctest::Approx(-1.0));
        CHECK(t.V_G.row(j).head(t.n).cwiseAbs().sum() == doctest::Approx(1.0));
        CHECK(t.V_G.row(j).tail(t.g).sum() == doctest::Approx(1.0));
        CHECK(t.V_G.row(j).tail(t.g).cwiseAbs().sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("V-dagger V equals the centering projector on random connected graphs") {
    std::mt19937 gen(2024);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> size(2, 10);
        const Topology t = random_connected(gen, size(gen));
        const Mat pi = Mat::Identity(t.n, t.n) -
                       Mat::Constant(t.n, t.n, 1.0 / static_cast<double>(t.n));
        CHECK((t.Vdagger * t.V - pi).cwiseAbs().maxCoeff() < 1e-9);

        Eigen::SelfAdjointEigenSolver<Mat> es(t.laplacian);
        CHECK(es.eigenvalues()(1) > 1e-9); // Fiedler value
    }
}

TEST_CASE("build_topology rejects bad inputs") {
    CHECK_THROWS_AS(build_topology(4, 1, {{0, 1}, {2, 3}}, {{0, 0}}), Disconnected);
    CHECK_THROWS_AS(build_topology(2, 2, {{0, 1}}, {{0, 0}, {1, 1}}), TooManyReceivers);
    CHECK_THROWS_AS(build_topology(3, 1, {{0, 3}, {1, 2}}, {{0, 0}}), BadIndex);
    CHECK_THROWS_AS(build_topology(3, 1, {{0, 1}, {1, 2}}, {{0, 5}}), BadIndex);
    CHECK_THROWS_AS(build_topology(3, 2, {{0, 1}, {1, 2}}, {{0, 0}, {1, 0}}), BadIndex);
}
