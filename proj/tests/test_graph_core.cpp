#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "tdrw/geometry.hpp"

using namespace tdrw;

TEST_CASE("line: neighbors, degree, containment") {
    Geometry g = Geometry::line();
    auto nb = g.neighbors({5, 0, 0});
    REQUIRE(nb.size() == 2);
    std::set<int64_t> xs;
    for (const auto& v : nb) xs.insert(v.x);
    CHECK(xs == std::set<int64_t>{4, 6});
    CHECK(g.max_degree() == 2);
    CHECK(g.contains({-1000000000, 0, 0}));
    CHECK(!g.contains({0, 1, 0}));
    CHECK(g.adjacent({3, 0, 0}, {4, 0, 0}));
    CHECK(!g.adjacent({3, 0, 0}, {5, 0, 0}));
    CHECK(!g.adjacent({3, 0, 0}, {3, 0, 0}));
}

TEST_CASE("cycle: wraparound neighbors and canonical range") {
    Geometry g = Geometry::cycle(5);
    auto nb = g.neighbors({0, 0, 0});
    std::set<int64_t> xs;
    for (const auto& v : nb) xs.insert(v.x);
    CHECK(xs == std::set<int64_t>{1, 4});
    CHECK(g.adjacent({4, 0, 0}, {0, 0, 0}));
    CHECK(g.contains({4, 0, 0}));
    CHECK(!g.contains({5, 0, 0}));
    CHECK(!g.contains({-1, 0, 0}));
    CHECK_THROWS_AS(Geometry::cycle(2), std::invalid_argument);
}

TEST_CASE("halfspace: floor has no down edge") {
    Geometry g = Geometry::halfspace();
    CHECK(g.neighbors({0, 0, 3}).size() == 6);
    auto floor_nb = g.neighbors({2, -1, 0});
    CHECK(floor_nb.size() == 5);
    for (const auto& v : floor_nb) CHECK(v.z >= 0);
    CHECK(g.contains({7, -9, 0}));
    CHECK(!g.contains({0, 0, -1}));
    CHECK(g.max_degree() == 6);
}

TEST_CASE("adjacency is symmetric") {
    for (const Geometry& g : {Geometry::line(), Geometry::halfspace(), Geometry::cycle(7)}) {
        Vertex c = g.kind == GeometryKind::cycle ? Vertex{3, 0, 0} : Vertex{0, 0, 0};
        for (const auto& n : g.neighbors(c)) {
            CHECK(g.adjacent(c, n));
            CHECK(g.adjacent(n, c));
        }
    }
}

TEST_CASE("ball volumes on the line: nu(B(r)) = 2r+1") {
    Geometry g = Geometry::line();
    for (int r : {0, 1, 4, 16}) {
        Ball b = ball(g, {0, 0, 0}, r);
        CHECK(b.volume() == (size_t)(2 * r + 1));
    }
}

TEST_CASE("ball volumes in the halfspace: nu(B(r)) = (r+1)(2r^2+4r+3)/3") {
    Geometry g = Geometry::halfspace();
    for (int64_t r : {0, 1, 2, 8, 16}) {
        Ball b = ball(g, {0, 0, 0}, (int)r);
        CHECK((int64_t)b.volume() == (r + 1) * (2 * r * r + 4 * r + 3) / 3);
    }
    // off-floor center: full L1 ball until it hits the floor
    CHECK(ball(g, {0, 0, 5}, 2).volume() == 25);
}

TEST_CASE("ball members are unique and within distance r") {
    Geometry g = Geometry::halfspace();
    Ball b = ball(g, {1, 2, 1}, 3);
    std::unordered_set<Vertex, VertexHash> seen(b.members.begin(), b.members.end());
    CHECK(seen.size() == b.members.size());
    for (const auto& v : b.members) {
        int64_t d = std::abs(v.x - 1) + std::abs(v.y - 2) + std::abs(v.z - 1);
        CHECK(d <= 3);
        CHECK(g.contains(v));
    }
    CHECK(b.members.front() == Vertex{1, 2, 1});
}

TEST_CASE("cycle ball saturates at the whole cycle") {
    Geometry g = Geometry::cycle(9);
    CHECK(ball(g, {0, 0, 0}, 3).volume() == 7);
    CHECK(ball(g, {0, 0, 0}, 4).volume() == 9);
    CHECK(ball(g, {0, 0, 0}, 50).volume() == 9);
}

TEST_CASE("ball rejects bad input") {
    CHECK_THROWS_AS(ball(Geometry::line(), {0, 1, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(ball(Geometry::line(), {0, 0, 0}, -1), std::invalid_argument);
}

TEST_CASE("vertex hash spreads over a box") {
    VertexHash h;
    std::set<size_t> vals;
    for (int64_t x = -8; x <= 8; ++x)
        for (int64_t z = 0; z <= 8; ++z) vals.insert(h(Vertex{x, 0, z}));
    CHECK(vals.size() == 17u * 9u);  // no collisions on a small grid
}
