#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "isospec/error.hpp"
#include "isospec/rng.hpp"

namespace isospec {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

using Loop = std::vector<Point>;

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

namespace detail {

using boost::multiprecision::cpp_int;

// v == mantissa * 2^exponent with a 53-bit integer mantissa (exponent ignored for 0).
struct Dyadic {
    std::int64_t mantissa = 0;
    int exponent = 0;
};

inline Dyadic to_dyadic(double v) {
    if (v == 0.0) return {};
    int e = 0;
    const double f = std::frexp(v, &e);
    return {static_cast<std::int64_t>(std::ldexp(f, 53)), e - 53};
}

inline int orient2d_exact(Point a, Point b, Point c) {
    const double coords[6] = {a.x, a.y, b.x, b.y, c.x, c.y};
    Dyadic d[6];
    int emin = 0;
    bool any = false;
    for (int i = 0; i < 6; ++i) {
        d[i] = to_dyadic(coords[i]);
        if (d[i].mantissa != 0) {
            emin = any ? std::min(emin, d[i].exponent) : d[i].exponent;
            any = true;
        }
    }
    if (!any) return 0;
    cpp_int v[6];
    for (int i = 0; i < 6; ++i) {
        v[i] = d[i].mantissa;
        if (d[i].mantissa != 0) v[i] <<= (d[i].exponent - emin);
    }
    const cpp_int det = (v[2] - v[0]) * (v[5] - v[1]) - (v[3] - v[1]) * (v[4] - v[0]);
    return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

}  // namespace detail

/// Sign of the signed area of (a, b, c): +1 counterclockwise, -1 clockwise,
/// 0 collinear. Exact for all finite double inputs: a floating-point filter
/// decides clear cases and an integer evaluation settles the rest.
inline int orient2d(Point a, Point b, Point c) {
    const double left = (b.x - a.x) * (c.y - a.y);
    const double right = (b.y - a.y) * (c.x - a.x);
    const double det = left - right;
    const double bound = 1e-15 * (std::abs(left) + std::abs(right));
    if (det > bound) return 1;
    if (det < -bound) return -1;
    return detail::orient2d_exact(a, b, c);
}

// r is collinear with p,q; true iff r lies within their bounding box.
inline bool within_box(Point p, Point q, Point r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
}

/// True iff the closed segments [a1,a2] and [b1,b2] share at least one point.
inline bool segments_intersect(Point a1, Point a2, Point b1, Point b2) {
    const int o1 = orient2d(a1, a2, b1);
    const int o2 = orient2d(a1, a2, b2);
    const int o3 = orient2d(b1, b2, a1);
    const int o4 = orient2d(b1, b2, a2);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && within_box(a1, a2, b1)) return true;
    if (o2 == 0 && within_box(a1, a2, b2)) return true;
    if (o3 == 0 && within_box(b1, b2, a1)) return true;
    if (o4 == 0 && within_box(b1, b2, a2)) return true;
    return false;
}

/// Edges (p, s) and (s, q) share the endpoint s; true iff they overlap along
/// a segment of positive length (a zero-angle spike).
inline bool adjacent_edges_overlap(Point p, Point s, Point q) {
    return orient2d(p, s, q) == 0 && dot(p - s, q - s) > 0.0;
}

inline double signed_area(const Loop& loop) {
    const std::size_t n = loop.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = loop[i];
        const Point& q = loop[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

inline double loop_length(const Loop& loop) {
    const std::size_t n = loop.size();
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) len += distance(loop[i], loop[(i + 1) % n]);
    return len;
}

/// True iff the loop has no self-intersections (exhaustive pairwise check).
inline bool is_simple(const Loop& loop) {
    const std::size_t n = loop.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (loop[i] == loop[j]) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a1 = loop[i];
        const Point a2 = loop[(i + 1) % n];
        // consecutive edges meet at a2
        if (adjacent_edges_overlap(a1, a2, loop[(i + 2) % n])) return false;
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // wrap-around neighbours
            if (segments_intersect(a1, a2, loop[j], loop[(j + 1) % n])) return false;
        }
    }
    return true;
}

/// +1 strictly inside, 0 on the boundary, -1 strictly outside.
inline int point_in_loop(const Loop& loop, Point p) {
    const std::size_t n = loop.size();
    int winding = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = loop[i];
        const Point b = loop[(i + 1) % n];
        const int o = orient2d(a, b, p);
        if (o == 0 && within_box(a, b, p)) return 0;
        if (a.y <= p.y) {
            if (b.y > p.y && o > 0) ++winding;
        } else if (b.y <= p.y && o < 0) {
            --winding;
        }
    }
    return winding != 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// PlanarDomain
// ---------------------------------------------------------------------------

struct Provenance {
    std::string generator;
    std::vector<double> params;
    std::optional<std::uint64_t> seed;
};

/// Polygon with optional polygonal holes. Outer loop counterclockwise, holes
/// clockwise, strictly inside the outer loop and pairwise disjoint.
struct PlanarDomain {
    Loop outer;
    std::vector<Loop> holes;
    std::string label;
    Provenance provenance;
};

/// Checks every PlanarDomain invariant; throws InvalidDomain naming the first
/// violation.
inline void validate(const PlanarDomain& d) {
    if (d.outer.size() < 3) throw InvalidDomain("outer loop has fewer than 3 vertices");
    for (const Point& p : d.outer)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidDomain("non-finite vertex coordinate");
    if (!(signed_area(d.outer) > 0.0))
        throw InvalidDomain("outer loop is not counterclockwise (signed area <= 0)");
    if (!is_simple(d.outer)) throw InvalidDomain("outer loop is not simple");
    for (std::size_t h = 0; h < d.holes.size(); ++h) {
        const Loop& hole = d.holes[h];
        if (hole.size() < 3) throw InvalidDomain("hole has fewer than 3 vertices");
        for (const Point& p : hole)
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw InvalidDomain("non-finite vertex coordinate");
        if (!(signed_area(hole) < 0.0))
            throw InvalidDomain("hole " + std::to_string(h) + " is not clockwise");
        if (!is_simple(hole)) throw InvalidDomain("hole " + std::to_string(h) + " is not simple");
        for (const Point& p : hole)
            if (point_in_loop(d.outer, p) != 1)
                throw InvalidDomain("hole " + std::to_string(h) + " is not strictly inside the outer loop");
    }
    // Loop boundaries must not touch each other.
    auto loops_touch = [](const Loop& a, const Loop& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
                    return true;
        return false;
    };
    for (std::size_t h = 0; h < d.holes.size(); ++h) {
        if (loops_touch(d.outer, d.holes[h]))
            throw InvalidDomain("hole " + std::to_string(h) + " touches the outer loop");
        for (std::size_t g = h + 1; g < d.holes.size(); ++g) {
            if (loops_touch(d.holes[h], d.holes[g]) ||
                point_in_loop(d.holes[g], d.holes[h].front()) != -1 ||
                point_in_loop(d.holes[h], d.holes[g].front()) != -1)
                throw InvalidDomain("holes " + std::to_string(h) + " and " + std::to_string(g) +
                                    " are not disjoint");
        }
    }
}

/// Shoelace area of the outer loop minus the hole areas.
inline double area(const PlanarDomain& d) {
    const double outer = signed_area(d.outer);
    if (!(outer > 0.0)) throw InvalidDomain("degenerate outer loop (signed area <= 0)");
    double a = outer;
    for (const Loop& h : d.holes) a -= std::abs(signed_area(h));
    if (!(a > 0.0)) throw InvalidDomain("domain area is not positive");
    return a;
}

inline double perimeter(const PlanarDomain& d) {
    double p = loop_length(d.outer);
    for (const Loop& h : d.holes) p += loop_length(h);
    if (!(p > 0.0)) throw InvalidDomain("domain perimeter is not positive");
    return p;
}

/// perimeter^2 / area.
inline double isoperimetric_ratio(const PlanarDomain& d) {
    const double p = perimeter(d);
    return p * p / area(d);
}

inline double diameter(const PlanarDomain& d) {
    double best = 0.0;
    for (std::size_t i = 0; i < d.outer.size(); ++i)
        for (std::size_t j = i + 1; j < d.outer.size(); ++j)
            best = std::max(best, distance(d.outer[i], d.outer[j]));
    return best;
}

inline std::size_t vertex_count(const PlanarDomain& d) {
    std::size_t n = d.outer.size();
    for (const Loop& h : d.holes) n += h.size();
    return n;
}

/// Copy with every coordinate multiplied by c > 0.
inline PlanarDomain scaled(const PlanarDomain& d, double c) {
    if (!(c > 0.0)) throw ParameterError("scale factor must be positive");
    PlanarDomain out = d;
    for (Point& p : out.outer) p = c * p;
    for (Loop& h : out.holes)
        for (Point& p : h) p = c * p;
    return out;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_param(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Loop square_loop(double x0, double y0, double side, bool ccw) {
    Loop l{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
    if (!ccw) std::reverse(l.begin(), l.end());
    return l;
}

}  // namespace detail

/// [0, ell] x [0, 1]. Any ell > 0 is accepted; ell < 1 is the same shape as 1/ell
/// up to scaling and rotation.
inline PlanarDomain make_rectangle(double ell) {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ParameterError("rectangle length must be positive");
    PlanarDomain d;
    d.outer = {{0.0, 0.0}, {ell, 0.0}, {ell, 1.0}, {0.0, 1.0}};
    d.label = "rectangle(" + detail::format_param(ell) + ")";
    d.provenance = {"rectangle", {ell}, std::nullopt};
    return d;
}

/// m teeth of size 1x2 at x in [2i, 2i+1], joined along the base by m-1 unit
/// squares. Area 3m-1, perimeter 6m, 4m vertices.
inline PlanarDomain make_comb(int m) {
    if (m < 1) throw ParameterError("comb needs at least one tooth");
    const double width = 2.0 * m - 1.0;
    PlanarDomain d;
    d.outer.push_back({0.0, 0.0});
    d.outer.push_back({width, 0.0});
    for (int i = m - 1; i >= 0; --i) {
        d.outer.push_back({2.0 * i + 1.0, 2.0});
        d.outer.push_back({2.0 * i, 2.0});
        if (i > 0) {
            d.outer.push_back({2.0 * i, 1.0});
            d.outer.push_back({2.0 * i - 1.0, 1.0});
        }
    }
    d.label = "comb(" + std::to_string(m) + ")";
    d.provenance = {"comb", {static_cast<double>(m)}, std::nullopt};
    return d;
}

/// Square of side 2m+1 with m^2 unit-square holes [2i-1,2i] x [2j-1,2j].
inline PlanarDomain make_waffle(int m) {
    if (m < 1) throw ParameterError("waffle parameter must be >= 1");
    PlanarDomain d;
    d.outer = detail::square_loop(0.0, 0.0, 2.0 * m + 1.0, true);
    for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= m; ++i)
            d.holes.push_back(detail::square_loop(2.0 * i - 1.0, 2.0 * j - 1.0, 1.0, false));
    d.label = "waffle(" + std::to_string(m) + ")";
    d.provenance = {"waffle", {static_cast<double>(m)}, std::nullopt};
    return d;
}

/// m vertices on the unit circle, the first at angle 0.
inline PlanarDomain make_regular_polygon(int m) {
    if (m < 3) throw ParameterError("regular polygon needs at least 3 sides");
    PlanarDomain d;
    d.outer.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * k / m;
        d.outer.push_back({std::cos(t), std::sin(t)});
    }
    d.label = "regular(" + std::to_string(m) + ")";
    d.provenance = {"regular", {static_cast<double>(m)}, std::nullopt};
    return d;
}

/// Unit square with a concentric square hole of side s in (0, 1).
inline PlanarDomain make_square_annulus(double s) {
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("annulus hole side must lie in (0, 1)");
    PlanarDomain d;
    d.outer = detail::square_loop(0.0, 0.0, 1.0, true);
    const double lo = 0.5 - 0.5 * s;
    const double hi = 0.5 + 0.5 * s;
    d.holes.push_back({{lo, lo}, {lo, hi}, {hi, hi}, {hi, lo}});
    d.label = "annulus(" + detail::format_param(s) + ")";
    d.provenance = {"annulus", {s}, std::nullopt};
    return d;
}

/// Incremental random simple polygon in the unit square. Starts from a CCW
/// triangle of three distinct points; each insertion samples a point and a
/// start index, then walks the edges cyclically until splitting one of them
/// keeps the polygon simple. A point that fits nowhere is discarded.
class RandomPolygonState {
public:
    static constexpr double min_separation = 1e-6;
    static constexpr std::uint64_t max_candidates = 1'000'000;

    RandomPolygonState(std::uint64_t seed, int target_count)
        : rng_(seed), target_(target_count) {
        if (target_count < 3) throw ParameterError("random polygon needs at least 3 vertices");
        while (vertices_.size() < 3) {
            vertices_.clear();
            while (vertices_.size() < 3) {
                const Point p = sample();
                if (is_distinct(p)) vertices_.push_back(p);
            }
            const int o = orient2d(vertices_[0], vertices_[1], vertices_[2]);
            if (o == 0) {
                vertices_.clear();
                continue;
            }
            if (o < 0) std::swap(vertices_[1], vertices_[2]);
        }
    }

    const Loop& vertices() const noexcept { return vertices_; }
    int target_count() const noexcept { return target_; }
    bool done() const noexcept { return static_cast<int>(vertices_.size()) >= target_; }
    std::uint64_t candidates_used() const noexcept { return candidates_; }

    /// Adds one vertex. Throws GenerationFailure once the candidate budget is spent.
    void add_vertex() {
        const std::size_t m = vertices_.size();
        while (true) {
            if (candidates_ >= max_candidates)
                throw GenerationFailure("random polygon: candidate point budget exhausted");
            const Point p = sample();
            if (!is_distinct(p)) continue;
            ++candidates_;
            const std::size_t start = static_cast<std::size_t>(rng_.below(m));
            for (std::size_t t = 0; t < m; ++t) {
                const std::size_t i = (start + t) % m;
                if (can_insert(p, i)) {
                    vertices_.insert(vertices_.begin() + static_cast<std::ptrdiff_t>(i + 1), p);
                    return;
                }
            }
        }
    }

    /// True iff the polygon stays simple when p is placed between v_i and v_{i+1}.
    bool can_insert(Point p, std::size_t i) const {
        const std::size_t m = vertices_.size();
        const Point a = vertices_[i];
        const Point b = vertices_[(i + 1) % m];
        if (orient2d(a, p, b) == 0) return false;
        // A simple result can still wrap the old loop and reverse its orientation.
        const double delta = 0.5 * (a.x * p.y - p.x * a.y + p.x * b.y - b.x * p.y - (a.x * b.y - b.x * a.y));
        if (!(signed_area(vertices_) + delta > 0.0)) return false;
        if (adjacent_edges_overlap(vertices_[(i + m - 1) % m], a, p)) return false;
        if (adjacent_edges_overlap(p, b, vertices_[(i + 2) % m])) return false;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;  // edge (a, b) is replaced
            const Point c = vertices_[j];
            const Point d = vertices_[(j + 1) % m];
            const bool touches_a = (j + 1) % m == i;  // edge ends at a
            const bool touches_b = j == (i + 1) % m;  // edge starts at b
            if (!touches_a && segments_intersect(a, p, c, d)) return false;
            if (!touches_b && segments_intersect(p, b, c, d)) return false;
        }
        return true;
    }

private:
    Point sample() { return {rng_.uniform(), rng_.uniform()}; }

    bool is_distinct(Point p) const {
        for (const Point& v : vertices_)
            if (distance(v, p) < min_separation) return false;
        return true;
    }

    SplitMix64 rng_;
    int target_;
    Loop vertices_;
    std::uint64_t candidates_ = 0;
};

inline PlanarDomain make_random_polygon(int n_vertices, std::uint64_t seed) {
    RandomPolygonState state(seed, n_vertices);
    while (!state.done()) state.add_vertex();
    PlanarDomain d;
    d.outer = state.vertices();
    d.label = "random(" + std::to_string(n_vertices) + ",seed=" + std::to_string(seed) + ")";
    d.provenance = {"random", {static_cast<double>(n_vertices)}, seed};
    return d;
}

}  // namespace isospec
