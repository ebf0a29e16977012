#include "tdrw/geometry.hpp"

#include <unordered_set>

namespace tdrw {

std::vector<Vertex> Geometry::neighbors(const Vertex& v) const {
    std::vector<Vertex> out;
    neighbors_into(v, out);
    return out;
}

void Geometry::neighbors_into(const Vertex& v, std::vector<Vertex>& out) const {
    out.clear();
    switch (kind) {
        case GeometryKind::line:
            out.push_back({v.x - 1, 0, 0});
            out.push_back({v.x + 1, 0, 0});
            break;
        case GeometryKind::cycle: {
            int64_t n = cycle_n;
            out.push_back({(v.x + n - 1) % n, 0, 0});
            out.push_back({(v.x + 1) % n, 0, 0});
            break;
        }
        case GeometryKind::halfspace3d:
            out.push_back({v.x - 1, v.y, v.z});
            out.push_back({v.x + 1, v.y, v.z});
            out.push_back({v.x, v.y - 1, v.z});
            out.push_back({v.x, v.y + 1, v.z});
            out.push_back({v.x, v.y, v.z + 1});
            if (v.z > 0) out.push_back({v.x, v.y, v.z - 1});
            break;
    }
}

bool Geometry::adjacent(const Vertex& a, const Vertex& b) const {
    for (const auto& n : neighbors(a))
        if (n == b) return true;
    return false;
}

Ball ball(const Geometry& g, const Vertex& x0, int r) {
    if (r < 0) throw std::invalid_argument("ball: negative radius");
    if (!g.contains(x0)) throw std::invalid_argument("ball: center outside geometry");
    Ball b;
    b.center = x0;
    b.radius = r;
    std::unordered_set<Vertex, VertexHash> seen;
    seen.insert(x0);
    std::vector<Vertex> frontier{x0};
    b.members.push_back(x0);
    for (int d = 0; d < r && !frontier.empty(); ++d) {
        std::vector<Vertex> next;
        for (const auto& v : frontier) {
            for (const auto& n : g.neighbors(v)) {
                if (seen.insert(n).second) {
                    next.push_back(n);
                    b.members.push_back(n);
                }
            }
        }
        frontier = std::move(next);
    }
    return b;
}

}  // namespace tdrw
