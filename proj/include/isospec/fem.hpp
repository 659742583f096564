#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "isospec/error.hpp"
#include "isospec/mesh.hpp"

namespace isospec {

enum class BoundaryCondition { Dirichlet, Neumann };

inline const char* to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Stiffness/mass pair for K x = lambda M x. Dirichlet conditions are imposed
/// by eliminating the boundary degrees of freedom.
struct OperatorPair {
    SparseMatrix K;
    SparseMatrix M;
    int n_dof = 0;
    BoundaryCondition bc = BoundaryCondition::Neumann;
    int degree = 1;
    // Unconstrained index of each retained degree of freedom (nodes first,
    // then edge midpoints for degree 2).
    std::vector<int> dof_map;
};

template <std::size_t N>
using ElementMatrix = std::array<std::array<double, N>, N>;

/// P1 stiffness on the triangle (p0, p1, p2): area * grad(l_i) . grad(l_j).
inline ElementMatrix<3> p1_element_stiffness(Point p0, Point p1, Point p2) {
    const Point p[3] = {p0, p1, p2};
    const double twice_area = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    // twice_area * grad(l_i)
    double gx[3], gy[3];
    for (int i = 0; i < 3; ++i) {
        const Point& a = p[(i + 1) % 3];
        const Point& b = p[(i + 2) % 3];
        gx[i] = a.y - b.y;
        gy[i] = b.x - a.x;
    }
    ElementMatrix<3> k{};
    const double scale = 1.0 / (2.0 * twice_area);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (gx[i] * gx[j] + gy[i] * gy[j]) * scale;
    return k;
}

/// P1 consistent mass: (area / 12) * (1 + delta_ij).
inline ElementMatrix<3> p1_element_mass(Point p0, Point p1, Point p2) {
    const double area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x));
    ElementMatrix<3> m{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    return m;
}

namespace detail {

// Quadratic Lagrange basis as symmetric forms in the barycentric coordinates:
// phi = sum_ij Q_ij l_i l_j. Order: vertices 0..2, then edges 01, 12, 20.
inline const std::array<std::array<std::array<double, 3>, 3>, 6>& p2_forms() {
    static const auto forms = [] {
        std::array<std::array<std::array<double, 3>, 3>, 6> q{};
        for (std::size_t i = 0; i < 3; ++i) {
            // l_i (2 l_i - 1) = 2 l_i^2 - l_i (l_0 + l_1 + l_2)
            for (std::size_t j = 0; j < 3; ++j) q[i][i][j] = q[i][j][i] = -0.5;
            q[i][i][i] = 1.0;
        }
        const std::size_t ends[3][2] = {{0, 1}, {1, 2}, {2, 0}};
        for (std::size_t e = 0; e < 3; ++e) {
            q[3 + e][ends[e][0]][ends[e][1]] = 2.0;
            q[3 + e][ends[e][1]][ends[e][0]] = 2.0;
        }
        return q;
    }();
    return forms;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Integral over the triangle of l_0^a0 l_1^a1 l_2^a2.
inline double barycentric_moment(double area, const std::array<int, 3>& powers) {
    const int total = powers[0] + powers[1] + powers[2];
    return 2.0 * area * factorial(powers[0]) * factorial(powers[1]) * factorial(powers[2]) / factorial(total + 2);
}

}  // namespace detail

inline ElementMatrix<6> p2_element_stiffness(Point p0, Point p1, Point p2) {
    const Point p[3] = {p0, p1, p2};
    const double twice_area = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    const double area = 0.5 * twice_area;
    Point grad[3];
    for (int i = 0; i < 3; ++i) {
        const Point& a = p[(i + 1) % 3];
        const Point& b = p[(i + 2) % 3];
        grad[i] = {(a.y - b.y) / twice_area, (b.x - a.x) / twice_area};
    }
    const auto& q = detail::p2_forms();
    // grad(phi) = sum_i l_i g_i with g_i = 2 sum_j Q_ij grad(l_j)
    std::array<std::array<Point, 3>, 6> g{};
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t i = 0; i < 3; ++i) {
            Point s{};
            for (std::size_t j = 0; j < 3; ++j) s = s + (2.0 * q[a][i][j]) * grad[j];
            g[a][i] = s;
        }
    ElementMatrix<6> k{};
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            double v = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) v += dot(g[a][i], g[b][j]) * area * (i == j ? 2.0 : 1.0) / 12.0;
            k[a][b] = v;
        }
    return k;
}

inline ElementMatrix<6> p2_element_mass(Point p0, Point p1, Point p2) {
    const double area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x));
    const auto& q = detail::p2_forms();
    double quartic[3][3][3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    std::array<int, 3> pw{0, 0, 0};
                    ++pw[static_cast<std::size_t>(i)];
                    ++pw[static_cast<std::size_t>(j)];
                    ++pw[static_cast<std::size_t>(k)];
                    ++pw[static_cast<std::size_t>(l)];
                    quartic[i][j][k][l] = detail::barycentric_moment(area, pw);
                }
    ElementMatrix<6> m{};
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) {
            double v = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) {
                    if (q[a][i][j] == 0.0) continue;
                    for (std::size_t k = 0; k < 3; ++k)
                        for (std::size_t l = 0; l < 3; ++l)
                            v += q[a][i][j] * q[b][k][l] * quartic[i][j][k][l];
                }
            m[a][b] = v;
        }
    return m;
}

/// Assembles the stiffness and mass matrices. Triangles are visited in index
/// order, so the matrices are bitwise reproducible for a given mesh.
inline OperatorPair assemble(const Mesh& mesh, BoundaryCondition bc, int degree = 1) {
    if (mesh.triangles.empty()) throw MeshError("cannot assemble on an empty mesh");
    if (degree != 1 && degree != 2) throw ParameterError("element degree must be 1 or 2");

    const int n_nodes = static_cast<int>(mesh.nodes.size());
    std::vector<std::uint8_t> constrained(static_cast<std::size_t>(n_nodes), 0);
    std::vector<std::array<int, 3>> tri_edge_dofs;
    int n_total = n_nodes;
    if (bc == BoundaryCondition::Dirichlet)
        for (int b : mesh.boundary_nodes) constrained[static_cast<std::size_t>(b)] = 1;

    if (degree == 2) {
        const std::vector<MeshEdge> edges = mesh_edges(mesh);
        std::unordered_map<std::uint64_t, int> edge_dof;
        edge_dof.reserve(edges.size() * 2);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            edge_dof.emplace(detail::edge_key(edges[e].a, edges[e].b), n_nodes + static_cast<int>(e));
            constrained.push_back(bc == BoundaryCondition::Dirichlet && edges[e].on_boundary() ? 1 : 0);
        }
        n_total += static_cast<int>(edges.size());
        tri_edge_dofs.reserve(mesh.triangles.size());
        for (const Triangle& t : mesh.triangles)
            tri_edge_dofs.push_back({edge_dof.at(detail::edge_key(t[0], t[1])), edge_dof.at(detail::edge_key(t[1], t[2])),
                                     edge_dof.at(detail::edge_key(t[2], t[0]))});
    }

    OperatorPair pair;
    pair.bc = bc;
    pair.degree = degree;
    std::vector<int> dof_of(static_cast<std::size_t>(n_total), -1);
    for (int i = 0; i < n_total; ++i)
        if (!constrained[static_cast<std::size_t>(i)]) {
            dof_of[static_cast<std::size_t>(i)] = static_cast<int>(pair.dof_map.size());
            pair.dof_map.push_back(i);
        }
    pair.n_dof = static_cast<int>(pair.dof_map.size());
    if (pair.n_dof == 0) throw MeshError("mesh has no free degrees of freedom");

    std::vector<Eigen::Triplet<double, int>> kt, mt;
    const std::size_t per = degree == 1 ? 9 : 36;
    kt.reserve(mesh.triangles.size() * per);
    mt.reserve(mesh.triangles.size() * per);
    auto scatter = [&](const auto& ke, const auto& me, const auto& dofs) {
        const std::size_t n = dofs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const int gi = dof_of[static_cast<std::size_t>(dofs[i])];
            if (gi < 0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const int gj = dof_of[static_cast<std::size_t>(dofs[j])];
                if (gj < 0) continue;
                kt.emplace_back(gi, gj, ke[i][j]);
                mt.emplace_back(gi, gj, me[i][j]);
            }
        }
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        const Point p0 = mesh.nodes[static_cast<std::size_t>(tri[0])];
        const Point p1 = mesh.nodes[static_cast<std::size_t>(tri[1])];
        const Point p2 = mesh.nodes[static_cast<std::size_t>(tri[2])];
        if (degree == 1) {
            scatter(p1_element_stiffness(p0, p1, p2), p1_element_mass(p0, p1, p2), tri);
        } else {
            const std::array<int, 6> dofs{tri[0], tri[1], tri[2], tri_edge_dofs[t][0], tri_edge_dofs[t][1],
                                          tri_edge_dofs[t][2]};
            scatter(p2_element_stiffness(p0, p1, p2), p2_element_mass(p0, p1, p2), dofs);
        }
    }
    pair.K.resize(pair.n_dof, pair.n_dof);
    pair.M.resize(pair.n_dof, pair.n_dof);
    pair.K.setFromTriplets(kt.begin(), kt.end());
    pair.M.setFromTriplets(mt.begin(), mt.end());
    pair.K.makeCompressed();
    pair.M.makeCompressed();
    return pair;
}

}  // namespace isospec
