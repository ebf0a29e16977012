#pragma once
// Vertex geometries: the integer line, the half-space Z^2 x Z_{>=0}, and a
// finite cycle (used for exact small-instance checks). Geometries are implicit
// coordinate rules; nothing is materialized except balls.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdrw {

struct Vertex {
    int64_t x = 0, y = 0, z = 0;  // y,z ignored on line/cycle
    bool operator==(const Vertex&) const = default;
};

struct VertexHash {
    size_t operator()(const Vertex& v) const {
        uint64_t h = (uint64_t)v.x * 0x9E3779B97F4A7C15ull;
        h ^= (uint64_t)v.y + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h ^= (uint64_t)v.z + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        return (size_t)h;
    }
};

enum class GeometryKind { line, halfspace3d, cycle };

struct Geometry {
    GeometryKind kind = GeometryKind::line;
    int cycle_n = 0;  // vertices on the cycle, kind==cycle only

    static Geometry line() { return {GeometryKind::line, 0}; }
    static Geometry halfspace() { return {GeometryKind::halfspace3d, 0}; }
    static Geometry cycle(int n) {
        if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
        return {GeometryKind::cycle, n};
    }

    bool contains(const Vertex& v) const {
        if (kind == GeometryKind::halfspace3d) return v.z >= 0;
        if (kind == GeometryKind::cycle) return v.x >= 0 && v.x < cycle_n && v.y == 0 && v.z == 0;
        return v.y == 0 && v.z == 0;
    }

    // lattice neighbours within the geometry (excludes the vertex itself)
    std::vector<Vertex> neighbors(const Vertex& v) const;
    // allocation-free variant for hot loops
    void neighbors_into(const Vertex& v, std::vector<Vertex>& out) const;

    bool adjacent(const Vertex& a, const Vertex& b) const;

    int max_degree() const { return kind == GeometryKind::halfspace3d ? 6 : 2; }

    std::string name() const {
        switch (kind) {
            case GeometryKind::line: return "line";
            case GeometryKind::halfspace3d: return "halfspace3d";
            case GeometryKind::cycle: return "cycle";
        }
        return "?";
    }
};

struct Ball {
    Vertex center;
    int radius = 0;
    std::vector<Vertex> members;
    size_t volume() const { return members.size(); }
};

// graph-distance ball; BFS on the implicit geometry
Ball ball(const Geometry& g, const Vertex& x0, int r);

}  // namespace tdrw
