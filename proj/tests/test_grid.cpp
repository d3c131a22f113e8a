#include <doctest.h>

#include "voxmc/grid.hpp"

using namespace voxmc;

TEST_CASE("grid construction and counts") {
    const SpatialGrid g = build_grid(5, 5, 5, 1.0 / 3.0);
    CHECK(g.voxel_count() == 125);
    CHECK(g.voxel_volume() == doctest::Approx(1.0 / 27.0));

    // single voxel: no neighbors
    CHECK(build_grid(1, 1, 1, 1.0).directed_neighbor_pairs().empty());

    // 3x1x1 line: two internal faces, four directed pairs
    CHECK(build_grid(3, 1, 1, 1.0).directed_neighbor_pairs().size() == 4);

    // 5x5x5: 3 axes x 4x5x5 internal faces, two directions each
    CHECK(g.directed_neighbor_pairs().size() == 2 * 3 * 4 * 5 * 5);
}

TEST_CASE("grid rejects bad input") {
    CHECK_THROWS(build_grid(0, 1, 1, 1.0));
    CHECK_THROWS(build_grid(1, -2, 1, 1.0));
    CHECK_THROWS(build_grid(1, 1, 1, 0.0));
    CHECK_THROWS(build_grid(1, 1, 1, -1.0));
}

TEST_CASE("index round trip, 1-based voxels") {
    const SpatialGrid g = build_grid(4, 3, 2, 0.5);
    for (int i = 0; i < g.voxel_count(); ++i) CHECK(g.index_of(g.voxel_at(i)) == i);
    CHECK(g.contains({1, 1, 1}));
    CHECK(g.contains({4, 3, 2}));
    CHECK(!g.contains({5, 1, 1}));
    CHECK(!g.contains({0, 1, 1}));
}

TEST_CASE("exposed faces") {
    const SpatialGrid g = build_grid(5, 5, 5, 1.0);
    CHECK(g.exposed_faces(g.index_of({1, 1, 1})) == 3); // corner
    CHECK(g.exposed_faces(g.index_of({2, 1, 1})) == 2); // edge
    CHECK(g.exposed_faces(g.index_of({2, 2, 1})) == 1); // face
    CHECK(g.exposed_faces(g.index_of({3, 3, 3})) == 0); // interior

    // a single voxel is exposed on all six faces
    CHECK(build_grid(1, 1, 1, 1.0).exposed_faces(0) == 6);
    // a 1-thick slab is exposed on both sides of the thin axis
    CHECK(build_grid(3, 1, 1, 1.0).exposed_faces(1) == 4);
}

TEST_CASE("adjacency") {
    const SpatialGrid g = build_grid(5, 5, 5, 1.0);
    CHECK(g.adjacent({4, 5, 5}, {5, 5, 5}));
    CHECK(!g.adjacent({4, 5, 5}, {4, 5, 5}));
    CHECK(!g.adjacent({1, 1, 1}, {2, 2, 1}));
}
