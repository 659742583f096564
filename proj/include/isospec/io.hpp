#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "isospec/counting.hpp"
#include "isospec/error.hpp"
#include "isospec/fem.hpp"
#include "isospec/geom.hpp"
#include "isospec/mesh.hpp"

namespace isospec {

using Json = nlohmann::json;

namespace detail {

inline Json loop_to_json(const Loop& loop) {
    Json a = Json::array();
    for (const Point& p : loop) a.push_back({p.x, p.y});
    return a;
}

inline Loop loop_from_json(const Json& j, const char* what) {
    if (!j.is_array()) throw ParameterError(std::string(what) + " must be an array of [x, y] pairs");
    Loop loop;
    for (const Json& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ParameterError(std::string(what) + " must be an array of [x, y] pairs");
        loop.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return loop;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

}  // namespace detail

inline Json to_json(const Provenance& p) {
    Json j{{"generator", p.generator}, {"params", p.params}};
    j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
    return j;
}

inline Json domain_to_json(const PlanarDomain& d) {
    Json holes = Json::array();
    for (const Loop& h : d.holes) holes.push_back(detail::loop_to_json(h));
    return {{"label", d.label}, {"provenance", to_json(d.provenance)}, {"outer", detail::loop_to_json(d.outer)},
            {"holes", holes}};
}

/// Parses and validates a domain document; malformed input is a ParameterError
/// and geometric violations an InvalidDomain.
inline PlanarDomain domain_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("domain document must be a JSON object");
    if (!j.contains("outer")) throw ParameterError("domain document lacks 'outer'");
    PlanarDomain d;
    d.outer = detail::loop_from_json(j.at("outer"), "outer");
    if (j.contains("holes")) {
        if (!j.at("holes").is_array()) throw ParameterError("'holes' must be an array of loops");
        for (const Json& h : j.at("holes")) d.holes.push_back(detail::loop_from_json(h, "hole"));
    }
    if (j.contains("label") && j.at("label").is_string()) d.label = j.at("label").get<std::string>();
    d.provenance.generator = "file";
    if (j.contains("provenance") && j.at("provenance").is_object()) {
        const Json& p = j.at("provenance");
        if (p.contains("generator") && p.at("generator").is_string()) d.provenance.generator = p.at("generator");
        if (p.contains("params") && p.at("params").is_array())
            for (const Json& v : p.at("params"))
                if (v.is_number()) d.provenance.params.push_back(v.get<double>());
        if (p.contains("seed") && p.at("seed").is_number_unsigned()) d.provenance.seed = p.at("seed").get<std::uint64_t>();
    }
    validate(d);
    return d;
}

inline PlanarDomain read_domain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open domain file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParameterError("malformed domain JSON in '" + path + "': " + e.what());
    }
    return domain_from_json(j);
}

inline Json mesh_to_json(const Mesh& m) {
    Json nodes = Json::array(), tris = Json::array();
    for (const Point& p : m.nodes) nodes.push_back({p.x, p.y});
    for (const Triangle& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
    return {{"nodes", nodes}, {"triangles", tris}, {"boundary_nodes", m.boundary_nodes}};
}

/// Coordinate-format Matrix Market dump (lower triangle, symmetric).
inline void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
    std::size_t nnz = 0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            if (it.row() >= it.col()) ++nnz;
    os << "%%MatrixMarket matrix coordinate real symmetric\n" << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
    char buf[64];
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            if (it.row() >= it.col()) {
                std::snprintf(buf, sizeof buf, "%.17g", it.value());
                os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
            }
}

// ---------------------------------------------------------------------------
// Reports

inline std::string options_fingerprint(const CountingOptions& o) {
    std::ostringstream s;
    s << "h0=" << detail::fmt(o.h0) << ";max_levels=" << o.max_levels << ";tie_rel_tol=" << detail::fmt(o.tie_rel_tol)
      << ";max_dof=" << o.max_dof << ";window=" << o.window << ";degree=" << o.degree
      << ";residual_tol=" << detail::fmt(o.eig.residual_tol);
    return s.str();
}

/// FNV-1a of the canonical option string, as 16 hex digits.
inline std::string options_hash(const CountingOptions& o) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : options_fingerprint(o)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline const char* csv_header() { return "family,param,seed,I,N,lambda1,threshold_gap,h_final,n_dof_final,converged"; }

inline std::string csv_row(const SweepRow& row) {
    std::ostringstream s;
    s << row.item.family << ',' << row.item.param << ',';
    if (row.item.seed) s << *row.item.seed;
    s << ',';
    if (row.report) {
        const SpectralReport& r = *row.report;
        s << detail::fmt(r.I) << ',' << r.N << ',' << detail::fmt(r.lambda1) << ',' << detail::fmt(r.threshold_gap) << ','
          << detail::fmt(r.h_final()) << ',' << r.n_dof_final() << ',' << (r.converged ? "true" : "false");
    } else {
        // Failed row: keep I when the domain itself is constructible.
        try {
            s << detail::fmt(isoperimetric_ratio(make_domain(row.item.family, row.item.param, row.item.seed)));
        } catch (const std::exception&) {
        }
        s << ",,,,,,false";
    }
    return s.str();
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << csv_header() << '\n';
    for (const SweepRow& r : rows) os << csv_row(r) << '\n';
}

inline Json report_to_json(const SpectralReport& r) {
    Json levels = Json::array();
    for (const LevelRecord& l : r.levels) {
        Json window = Json::array();
        for (const RankedValue& v : l.window) window.push_back({{"rank", v.rank}, {"mu", v.mu}});
        levels.push_back({{"h", l.h},
                          {"n_dof", l.n_dof},
                          {"lambda1_h", l.lambda1_h},
                          {"lambda1_residual", l.lambda1_residual},
                          {"tau", l.tau},
                          {"N_h", l.N_h},
                          {"N_adjusted", l.N_adjusted},
                          {"ties", l.ties},
                          {"window", window}});
    }
    return {{"label", r.label},
            {"provenance", to_json(r.provenance)},
            {"I", r.I},
            {"N", r.N},
            {"lambda1", r.lambda1},
            {"threshold_gap", r.threshold_gap},
            {"ties", r.ties},
            {"tie_suspect", r.tie_suspect},
            {"converged", r.converged},
            {"flags", r.flags},
            {"levels", levels}};
}

inline Json rows_to_json(const std::vector<SweepRow>& rows, const CountingOptions& opts) {
    Json out = Json::array();
    for (const SweepRow& row : rows) {
        Json j{{"family", row.item.family}, {"param", row.item.param}};
        j["seed"] = row.item.seed ? Json(*row.item.seed) : Json(nullptr);
        j["options_hash"] = options_hash(opts);
        if (row.report) {
            j["report"] = report_to_json(*row.report);
        } else {
            j["error"] = row.error;
        }
        out.push_back(j);
    }
    return out;
}

}  // namespace isospec
