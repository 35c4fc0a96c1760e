#include "depthforge/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace depthforge {

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;
}

Mesh make_box(double hx, double hy, double hz) {
    Mesh m;
    for (int i = 0; i < 8; ++i) {
        m.vertices.push_back({(i & 1) ? hx : -hx, (i & 2) ? hy : -hy, (i & 4) ? hz : -hz});
    }
    const int quads[6][4] = {
        {0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1}, {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3},
    };
    for (const auto& q : quads) {
        m.triangles.push_back({q[0], q[1], q[2]});
        m.triangles.push_back({q[0], q[2], q[3]});
    }
    return m;
}

Mesh make_icosphere(int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    Mesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : m.vertices) v = normalized(v);
    m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
                   {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
                   {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
                   {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(m.vertices.size());
            m.vertices.push_back(normalized((m.vertices[a] + m.vertices[b]) * 0.5));
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& tri : m.triangles) {
            const int ab = mid(tri[0], tri[1]);
            const int bc = mid(tri[1], tri[2]);
            const int ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    return m;
}

Mesh make_cone(double radius, double height, int segments) {
    Mesh m;
    const double zb = -height / 2, zt = height / 2;
    m.vertices.push_back({0, 0, zt});  // apex
    m.vertices.push_back({0, 0, zb});  // base center
    for (int i = 0; i < segments; ++i) {
        const double a = kTau * i / segments;
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), zb});
    }
    for (int i = 0; i < segments; ++i) {
        const int a = 2 + i, b = 2 + (i + 1) % segments;
        m.triangles.push_back({0, a, b});  // side
        m.triangles.push_back({1, b, a});  // base cap
    }
    return m;
}

Mesh make_cylinder(double radius, double height, int segments) {
    Mesh m;
    const double zb = -height / 2, zt = height / 2;
    m.vertices.push_back({0, 0, zb});
    m.vertices.push_back({0, 0, zt});
    for (int i = 0; i < segments; ++i) {
        const double a = kTau * i / segments;
        const double x = radius * std::cos(a), y = radius * std::sin(a);
        m.vertices.push_back({x, y, zb});
        m.vertices.push_back({x, y, zt});
    }
    for (int i = 0; i < segments; ++i) {
        const int b0 = 2 + 2 * i, t0 = b0 + 1;
        const int b1 = 2 + 2 * ((i + 1) % segments), t1 = b1 + 1;
        m.triangles.push_back({b0, b1, t1});
        m.triangles.push_back({b0, t1, t0});
        m.triangles.push_back({0, b1, b0});  // bottom cap
        m.triangles.push_back({1, t0, t1});  // top cap
    }
    return m;
}

Mesh make_torus(double major_radius, double minor_radius, int segments_major, int segments_minor) {
    Mesh m;
    for (int i = 0; i < segments_major; ++i) {
        const double u = kTau * i / segments_major;
        const double cu = std::cos(u), su = std::sin(u);
        for (int j = 0; j < segments_minor; ++j) {
            const double v = kTau * j / segments_minor;
            const double r = major_radius + minor_radius * std::cos(v);
            m.vertices.push_back({r * cu, r * su, minor_radius * std::sin(v)});
        }
    }
    auto at = [&](int i, int j) {
        return (i % segments_major) * segments_minor + (j % segments_minor);
    };
    for (int i = 0; i < segments_major; ++i) {
        for (int j = 0; j < segments_minor; ++j) {
            const int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
            m.triangles.push_back({a, b, c});
            m.triangles.push_back({a, c, d});
        }
    }
    return m;
}

}  // namespace depthforge
