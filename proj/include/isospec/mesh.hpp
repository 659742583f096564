#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "isospec/error.hpp"
#include "isospec/geom.hpp"

namespace isospec {

using Triangle = std::array<int, 3>;

/// Conforming triangulation. Triangles are counterclockwise; boundary_nodes
/// is sorted and holds every node lying on the domain boundary.
struct Mesh {
    std::vector<Point> nodes;
    std::vector<Triangle> triangles;
    std::vector<int> boundary_nodes;
    double h = 0.0;  // maximum edge length
    int hole_count = 0;

    std::vector<std::uint8_t> boundary_mask() const {
        std::vector<std::uint8_t> mask(nodes.size(), 0);
        for (int b : boundary_nodes) mask[static_cast<std::size_t>(b)] = 1;
        return mask;
    }
};

struct MeshOptions {
    std::size_t max_nodes = 4'000'000;
};

/// Undirected edge (a < b) with its one or two incident triangles.
struct MeshEdge {
    int a = 0;
    int b = 0;
    int tri0 = -1;
    int tri1 = -1;
    bool on_boundary() const noexcept { return tri1 < 0; }
};

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

inline double tri_signed_area(const std::vector<Point>& nodes, const Triangle& t) {
    const Point a = nodes[static_cast<std::size_t>(t[0])];
    const Point b = nodes[static_cast<std::size_t>(t[1])];
    const Point c = nodes[static_cast<std::size_t>(t[2])];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

}  // namespace detail

/// Edges in first-encounter order (triangle index ascending, local edge order).
inline std::vector<MeshEdge> mesh_edges(const Mesh& mesh) {
    std::vector<MeshEdge> edges;
    edges.reserve(mesh.triangles.size() * 3 / 2 + 8);
    std::unordered_map<std::uint64_t, int> index;
    index.reserve(mesh.triangles.size() * 2);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[static_cast<std::size_t>(k)];
            const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
            const auto [it, inserted] = index.try_emplace(detail::edge_key(a, b), static_cast<int>(edges.size()));
            if (inserted) {
                edges.push_back({std::min(a, b), std::max(a, b), static_cast<int>(t), -1});
            } else {
                MeshEdge& e = edges[static_cast<std::size_t>(it->second)];
                if (e.tri1 >= 0) throw MeshError("edge shared by more than two triangles");
                e.tri1 = static_cast<int>(t);
            }
        }
    }
    return edges;
}

inline double max_edge_length(const Mesh& mesh) {
    double h = 0.0;
    for (const Triangle& t : mesh.triangles)
        for (int k = 0; k < 3; ++k)
            h = std::max(h, distance(mesh.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])],
                                     mesh.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])]));
    return h;
}

inline double mesh_area(const Mesh& mesh) {
    double a = 0.0;
    for (const Triangle& t : mesh.triangles) a += detail::tri_signed_area(mesh.nodes, t);
    return a;
}

/// Smallest interior angle over all triangles, in degrees.
inline double min_angle_degrees(const Mesh& mesh) {
    double best = 180.0;
    for (const Triangle& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const Point p = mesh.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
            const Point q = mesh.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])];
            const Point r = mesh.nodes[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 2) % 3)])];
            const Point u = q - p;
            const Point v = r - p;
            const double ang = std::atan2(std::abs(u.x * v.y - u.y * v.x), dot(u, v));
            best = std::min(best, ang * 180.0 / std::numbers::pi);
        }
    }
    return best;
}

/// V - E + F with F counting the triangles plus the unbounded face; equals
/// 2 - (number of holes) for a valid mesh of a connected domain.
inline long euler_characteristic(const Mesh& mesh) {
    const long v = static_cast<long>(mesh.nodes.size());
    const long e = static_cast<long>(mesh_edges(mesh).size());
    const long f = static_cast<long>(mesh.triangles.size()) + 1;
    return v - e + f;
}

/// Scans all Mesh invariants; throws MeshError on the first violation.
inline void validate(const Mesh& mesh) {
    if (mesh.triangles.empty()) throw MeshError("mesh has no triangles");
    const auto n = static_cast<int>(mesh.nodes.size());
    for (const Triangle& t : mesh.triangles) {
        for (int v : t)
            if (v < 0 || v >= n) throw MeshError("triangle references a missing node");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw MeshError("degenerate triangle");
        if (!(detail::tri_signed_area(mesh.nodes, t) > 0.0))
            throw MeshError("triangle with non-positive signed area");
    }
    const std::vector<MeshEdge> edges = mesh_edges(mesh);
    const std::vector<std::uint8_t> mask = mesh.boundary_mask();
    for (const MeshEdge& e : edges)
        if (e.on_boundary() && (!mask[static_cast<std::size_t>(e.a)] || !mask[static_cast<std::size_t>(e.b)]))
            throw MeshError("boundary edge endpoint missing from boundary_nodes");
    // Orientation-consistent neighbours: a shared edge is traversed in
    // opposite directions by its two triangles.
    for (const MeshEdge& e : edges) {
        if (e.on_boundary()) continue;
        auto dir = [&](int tri) {
            const Triangle& t = mesh.triangles[static_cast<std::size_t>(tri)];
            for (int k = 0; k < 3; ++k)
                if (t[static_cast<std::size_t>(k)] == e.a && t[static_cast<std::size_t>((k + 1) % 3)] == e.b) return 1;
            return -1;
        };
        if (dir(e.tri0) == dir(e.tri1)) throw MeshError("inconsistently oriented neighbours");
    }
    const long expected = 2 - mesh.hole_count;
    if (euler_characteristic(mesh) != expected)
        throw MeshError("Euler relation violated: V - E + F = " + std::to_string(euler_characteristic(mesh)) +
                        ", expected " + std::to_string(expected));
}

/// Splits every triangle into four through its edge midpoints.
inline Mesh refine(const Mesh& mesh) {
    Mesh out;
    out.hole_count = mesh.hole_count;
    out.nodes = mesh.nodes;
    out.triangles.reserve(mesh.triangles.size() * 4);
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh.triangles.size() * 2);
    auto mid = [&](int a, int b) {
        const auto [it, inserted] = midpoint.try_emplace(detail::edge_key(a, b), static_cast<int>(out.nodes.size()));
        if (inserted) {
            const Point p = mesh.nodes[static_cast<std::size_t>(a)];
            const Point q = mesh.nodes[static_cast<std::size_t>(b)];
            out.nodes.push_back({0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
        }
        return it->second;
    };
    for (const Triangle& t : mesh.triangles) {
        const int ab = mid(t[0], t[1]);
        const int bc = mid(t[1], t[2]);
        const int ca = mid(t[2], t[0]);
        out.triangles.push_back({t[0], ab, ca});
        out.triangles.push_back({ab, t[1], bc});
        out.triangles.push_back({ca, bc, t[2]});
        out.triangles.push_back({ab, bc, ca});
    }
    out.boundary_nodes = mesh.boundary_nodes;
    for (const MeshEdge& e : mesh_edges(mesh))
        if (e.on_boundary()) out.boundary_nodes.push_back(midpoint.at(detail::edge_key(e.a, e.b)));
    std::sort(out.boundary_nodes.begin(), out.boundary_nodes.end());
    out.h = max_edge_length(out);
    return out;
}

namespace detail {

// Minimum distance between two segments.
inline double segment_distance(Point a1, Point a2, Point b1, Point b2) {
    if (segments_intersect(a1, a2, b1, b2)) return 0.0;
    auto point_seg = [](Point p, Point s, Point t) {
        const Point d = t - s;
        const double len2 = dot(d, d);
        double u = len2 > 0.0 ? dot(p - s, d) / len2 : 0.0;
        u = std::clamp(u, 0.0, 1.0);
        return distance(p, s + u * d);
    };
    return std::min({point_seg(a1, b1, b2), point_seg(a2, b1, b2), point_seg(b1, a1, a2), point_seg(b2, a1, a2)});
}

// Smallest edge length or distance between non-adjacent boundary edges.
inline double feature_size(const std::vector<Loop>& loops) {
    struct Seg {
        Point p, q;
        std::size_t loop, idx, n;
    };
    std::vector<Seg> segs;
    for (std::size_t l = 0; l < loops.size(); ++l)
        for (std::size_t i = 0; i < loops[l].size(); ++i)
            segs.push_back({loops[l][i], loops[l][(i + 1) % loops[l].size()], l, i, loops[l].size()});
    double best = std::numeric_limits<double>::infinity();
    for (const Seg& s : segs) best = std::min(best, distance(s.p, s.q));
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            const Seg& s = segs[i];
            const Seg& t = segs[j];
            if (s.loop == t.loop && ((s.idx + 1) % s.n == t.idx || (t.idx + 1) % t.n == s.idx)) continue;
            best = std::min(best, segment_distance(s.p, s.q, t.p, t.q));
        }
    }
    return best;
}

// Interior of a CCW-traversed chain prev -> v -> next lies to the left;
// true iff target is strictly inside the interior wedge at v.
inline bool locally_inside(Point prev, Point v, Point next, Point target) {
    if (orient2d(prev, v, next) > 0) return orient2d(v, next, target) > 0 && orient2d(prev, v, target) > 0;
    return orient2d(v, next, target) > 0 || orient2d(prev, v, target) > 0;
}

class PolygonTriangulator {
public:
    PolygonTriangulator(const std::vector<Point>& nodes, std::vector<int> ring,
                        const std::vector<std::vector<int>>& holes)
        : nodes_(nodes), ring_(std::move(ring)) {
        std::vector<std::size_t> order(holes.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::vector<std::size_t> leftmost(holes.size());
        for (std::size_t h = 0; h < holes.size(); ++h) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < holes[h].size(); ++i) {
                const Point p = at(holes[h][i]);
                const Point b = at(holes[h][best]);
                if (p.x < b.x || (p.x == b.x && p.y < b.y)) best = i;
            }
            leftmost[h] = best;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return at(holes[a][leftmost[a]]).x < at(holes[b][leftmost[b]]).x;
        });
        std::vector<std::uint8_t> merged(holes.size(), 0);
        for (std::size_t h : order) {
            bridge(holes, merged, h, leftmost[h]);
            merged[h] = 1;
        }
    }

    // Ear clipping of the (weakly simple) bridged ring.
    std::vector<Triangle> clip() {
        const std::size_t n = ring_.size();
        std::vector<std::size_t> prev(n), next(n);
        for (std::size_t i = 0; i < n; ++i) {
            prev[i] = (i + n - 1) % n;
            next[i] = (i + 1) % n;
        }
        std::vector<Triangle> tris;
        tris.reserve(n);
        std::size_t remaining = n;
        std::size_t cur = 0;
        std::size_t misses = 0;
        while (remaining > 3) {
            if (is_ear(prev[cur], cur, next[cur], next)) {
                tris.push_back({ring_[prev[cur]], ring_[cur], ring_[next[cur]]});
                next[prev[cur]] = next[cur];
                prev[next[cur]] = prev[cur];
                --remaining;
                cur = next[cur];
                misses = 0;
                continue;
            }
            cur = next[cur];
            if (++misses > remaining) throw MeshError("ear clipping found no ear");
        }
        if (orient2d(at(ring_[prev[cur]]), at(ring_[cur]), at(ring_[next[cur]])) <= 0)
            throw MeshError("ear clipping left a degenerate triangle");
        tris.push_back({ring_[prev[cur]], ring_[cur], ring_[next[cur]]});
        return tris;
    }

private:
    Point at(int node) const { return nodes_[static_cast<std::size_t>(node)]; }

    bool is_ear(std::size_t ip, std::size_t ib, std::size_t in, const std::vector<std::size_t>& next) const {
        const int a = ring_[ip];
        const int b = ring_[ib];
        const int c = ring_[in];
        const Point pa = at(a), pb = at(b), pc = at(c);
        if (orient2d(pa, pb, pc) <= 0) return false;
        for (std::size_t k = next[in]; k != ip; k = next[k]) {
            const int v = ring_[k];
            if (v == a || v == b || v == c) continue;
            const Point p = at(v);
            if (orient2d(pa, pb, p) >= 0 && orient2d(pb, pc, p) >= 0 && orient2d(pc, pa, p) >= 0) return false;
        }
        return true;
    }

    // Segment m-v crosses or touches an edge (c, d) other than at the shared node.
    bool blocked_by(int m, int v, int c, int d) const {
        const Point pm = at(m), pv = at(v), pc = at(c), pd = at(d);
        const bool share_m = c == m || d == m;
        const bool share_v = c == v || d == v;
        if (share_m && share_v) return true;  // same segment
        if (share_m) return adjacent_edges_overlap(pv, pm, c == m ? pd : pc);
        if (share_v) return adjacent_edges_overlap(pm, pv, c == v ? pd : pc);
        return segments_intersect(pm, pv, pc, pd);
    }

    void bridge(const std::vector<std::vector<int>>& holes, const std::vector<std::uint8_t>& merged, std::size_t h,
                std::size_t mi) {
        const std::vector<int>& hole = holes[h];
        const std::size_t hn = hole.size();
        const int m = hole[mi];
        const Point pm = at(m);
        const Point hole_prev = at(hole[(mi + hn - 1) % hn]);
        const Point hole_next = at(hole[(mi + 1) % hn]);

        std::vector<std::size_t> candidates(ring_.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
        std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            return distance(pm, at(ring_[a])) < distance(pm, at(ring_[b]));
        });
        const std::size_t rn = ring_.size();
        for (std::size_t pos : candidates) {
            const int v = ring_[pos];
            const Point pv = at(v);
            if (!locally_inside(at(ring_[(pos + rn - 1) % rn]), pv, at(ring_[(pos + 1) % rn]), pm)) continue;
            if (!locally_inside(hole_prev, pm, hole_next, pv)) continue;
            bool ok = true;
            for (std::size_t i = 0; i < rn && ok; ++i)
                if (blocked_by(m, v, ring_[i], ring_[(i + 1) % rn])) ok = false;
            for (std::size_t g = 0; g < holes.size() && ok; ++g) {
                if (merged[g]) continue;
                const std::vector<int>& loop = holes[g];
                for (std::size_t i = 0; i < loop.size() && ok; ++i)
                    if (blocked_by(m, v, loop[i], loop[(i + 1) % loop.size()])) ok = false;
            }
            if (!ok) continue;
            std::vector<int> spliced;
            spliced.reserve(rn + hn + 2);
            spliced.insert(spliced.end(), ring_.begin(), ring_.begin() + static_cast<std::ptrdiff_t>(pos + 1));
            for (std::size_t k = 0; k <= hn; ++k) spliced.push_back(hole[(mi + k) % hn]);
            spliced.push_back(v);
            spliced.insert(spliced.end(), ring_.begin() + static_cast<std::ptrdiff_t>(pos + 1), ring_.end());
            ring_ = std::move(spliced);
            return;
        }
        throw MeshError("no visible bridge vertex for hole");
    }

    const std::vector<Point>& nodes_;
    std::vector<int> ring_;
};

// >0 iff d lies strictly inside the circumcircle of the CCW triangle (a, b, c).
inline double incircle(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

// Lawson flips toward the constrained Delaunay triangulation; constrained
// edges are never flipped.
inline void delaunay_flips(const std::vector<Point>& nodes, std::vector<Triangle>& tris,
                           const std::vector<std::uint64_t>& constrained_keys) {
    std::vector<std::uint64_t> constrained = constrained_keys;
    std::sort(constrained.begin(), constrained.end());
    auto is_constrained = [&](int a, int b) {
        return std::binary_search(constrained.begin(), constrained.end(), edge_key(a, b));
    };
    const std::size_t max_passes = 4 * tris.size() + 16;
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        std::unordered_map<std::uint64_t, std::pair<int, int>> owner;  // key -> (tri, tri)
        owner.reserve(tris.size() * 2);
        for (std::size_t t = 0; t < tris.size(); ++t)
            for (int k = 0; k < 3; ++k) {
                const std::uint64_t key = edge_key(tris[t][static_cast<std::size_t>(k)], tris[t][static_cast<std::size_t>((k + 1) % 3)]);
                auto [it, inserted] = owner.try_emplace(key, static_cast<int>(t), -1);
                if (!inserted) it->second.second = static_cast<int>(t);
            }
        std::vector<std::uint8_t> touched(tris.size(), 0);
        bool flipped = false;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (touched[t]) continue;
            for (int k = 0; k < 3; ++k) {
                const int p = tris[t][static_cast<std::size_t>(k)];
                const int q = tris[t][static_cast<std::size_t>((k + 1) % 3)];
                const int r = tris[t][static_cast<std::size_t>((k + 2) % 3)];
                if (is_constrained(p, q)) continue;
                const auto& pr = owner.at(edge_key(p, q));
                const int u = pr.first == static_cast<int>(t) ? pr.second : pr.first;
                if (u < 0 || touched[static_cast<std::size_t>(u)]) continue;
                const Triangle& other = tris[static_cast<std::size_t>(u)];
                int s = -1;
                for (int v : other)
                    if (v != p && v != q) s = v;
                const Point pp = nodes[static_cast<std::size_t>(p)], pq = nodes[static_cast<std::size_t>(q)];
                const Point prr = nodes[static_cast<std::size_t>(r)], ps = nodes[static_cast<std::size_t>(s)];
                const double scale = std::max({dot(pp - ps, pp - ps), dot(pq - ps, pq - ps), dot(prr - ps, prr - ps)});
                if (!(incircle(pp, pq, prr, ps) > 1e-10 * scale * scale)) continue;
                if (orient2d(prr, pp, ps) <= 0 || orient2d(prr, ps, pq) <= 0) continue;
                tris[t] = {r, p, s};
                tris[static_cast<std::size_t>(u)] = {r, s, q};
                touched[t] = 1;
                touched[static_cast<std::size_t>(u)] = 1;
                flipped = true;
                break;
            }
        }
        if (!flipped) return;
    }
}

}  // namespace detail

/// Triangulates the domain: boundary edges are subdivided to the local
/// feature size, holes are bridged into one weakly simple ring, the ring is
/// ear-clipped, Delaunay flips improve the result, and uniform refinement
/// continues until the maximum edge length is at most h_target.
inline Mesh triangulate(const PlanarDomain& domain, double h_target, const MeshOptions& opts = {}) {
    if (!(h_target > 0.0)) throw ParameterError("h_target must be positive");
    validate(domain);

    std::vector<Loop> loops;
    loops.push_back(domain.outer);
    for (const Loop& h : domain.holes) loops.push_back(h);

    const double diam = diameter(domain);
    const double spacing = std::max(detail::feature_size(loops), diam / 64.0);

    Mesh mesh;
    mesh.hole_count = static_cast<int>(domain.holes.size());
    // Domain vertices first, bit-for-bit.
    for (const Loop& l : loops)
        for (const Point& p : l) mesh.nodes.push_back(p);

    std::vector<std::vector<int>> rings;
    std::vector<std::uint64_t> constrained;
    int base = 0;
    for (const Loop& l : loops) {
        std::vector<int> ring;
        const int n = static_cast<int>(l.size());
        for (int i = 0; i < n; ++i) {
            const Point p = l[static_cast<std::size_t>(i)];
            const Point q = l[static_cast<std::size_t>((i + 1) % n)];
            ring.push_back(base + i);
            const int pieces = std::max(1, static_cast<int>(std::ceil(distance(p, q) / spacing - 1e-9)));
            for (int k = 1; k < pieces; ++k) {
                const double t = static_cast<double>(k) / pieces;
                ring.push_back(static_cast<int>(mesh.nodes.size()));
                mesh.nodes.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
            }
        }
        for (std::size_t i = 0; i < ring.size(); ++i)
            constrained.push_back(detail::edge_key(ring[i], ring[(i + 1) % ring.size()]));
        rings.push_back(std::move(ring));
        base += n;
    }
    if (mesh.nodes.size() > opts.max_nodes) throw ResourceError("boundary seeding exceeds the node cap");

    std::vector<std::vector<int>> hole_rings(rings.begin() + 1, rings.end());
    detail::PolygonTriangulator tri(mesh.nodes, rings.front(), hole_rings);
    mesh.triangles = tri.clip();
    detail::delaunay_flips(mesh.nodes, mesh.triangles, constrained);

    mesh.boundary_nodes.resize(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) mesh.boundary_nodes[i] = static_cast<int>(i);
    mesh.h = max_edge_length(mesh);

    while (mesh.h > h_target) {
        const std::size_t predicted = mesh.nodes.size() + mesh.triangles.size() * 3 / 2 + mesh.boundary_nodes.size();
        if (predicted > opts.max_nodes)
            throw ResourceError("refinement to h_target would exceed the node cap (" +
                                std::to_string(opts.max_nodes) + ")");
        mesh = refine(mesh);
    }
    return mesh;
}

}  // namespace isospec
