#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "isospec/eig.hpp"
#include "isospec/error.hpp"
#include "isospec/fem.hpp"
#include "isospec/geom.hpp"
#include "isospec/mesh.hpp"

namespace isospec {

struct CountingOptions {
    double h0 = 0.0;  // initial target edge length; 0 selects diameter / 8
    int max_levels = 6;
    double tie_rel_tol = 1e-8;
    std::size_t max_dof = 300'000;
    int window = 6;        // Neumann eigenvalues examined around the threshold
    int max_window = 96;
    int degree = 1;
    int shift_retries = 3;
    std::size_t min_interior_nodes = 16;
    EigenOptions eig{};
};

/// Neumann eigenvalue near the threshold, tagged with its global index in the
/// ascending discrete spectrum (0 is the constant mode).
struct RankedValue {
    long rank = 0;
    double mu = 0.0;
};

struct LevelRecord {
    double h = 0.0;
    int n_dof = 0;  // Neumann degrees of freedom
    double lambda1_h = 0.0;
    double lambda1_residual = 0.0;
    double tau = 0.0;  // shift actually used for the count
    long N_h = 0;      // raw inertia count below tau
    long N_adjusted = 0;
    int ties = 0;
    std::vector<RankedValue> window;
};

struct SpectralReport {
    std::string label;
    Provenance provenance;
    double I = 0.0;
    double lambda1 = 0.0;
    long N = 0;
    double threshold_gap = 0.0;
    int ties = 0;
    bool converged = false;
    bool tie_suspect = false;
    std::vector<LevelRecord> levels;
    std::vector<std::string> flags;

    double h_final() const { return levels.empty() ? 0.0 : levels.back().h; }
    int n_dof_final() const { return levels.empty() ? 0 : levels.back().n_dof; }
};

namespace detail {

struct LevelSolve {
    OperatorPair neumann;
    std::optional<ShiftedOperator> op;
    LevelRecord record;
};

inline std::vector<RankedValue> ranked_window(const ShiftedOperator& op, long count, int size,
                                              const EigenOptions& eo) {
    const int w = std::min(size, op.pair().n_dof);
    const Eigenpairs near = nearest_eigenpairs(op, w, eo);
    std::vector<double> below, above;
    for (double v : near.values) (v < op.shift() ? below : above).push_back(v);
    std::sort(below.begin(), below.end(), std::greater<>());
    std::sort(above.begin(), above.end());
    std::vector<RankedValue> out;
    for (std::size_t i = below.size(); i-- > 0;) out.push_back({count - 1 - static_cast<long>(i), below[i]});
    for (std::size_t i = 0; i < above.size(); ++i) out.push_back({count + static_cast<long>(i), above[i]});
    return out;
}

inline void solve_level(LevelSolve& s, const Mesh& mesh, const CountingOptions& opts, int window) {
    const OperatorPair dir = assemble(mesh, BoundaryCondition::Dirichlet, opts.degree);
    const EigenValueResult l1 = smallest_eigenvalue(dir, opts.eig);
    s.neumann = assemble(mesh, BoundaryCondition::Neumann, opts.degree);
    LevelRecord& r = s.record;
    r.h = mesh.h;
    r.n_dof = s.neumann.n_dof;
    r.lambda1_h = l1.value;
    r.lambda1_residual = l1.residual;
    double tau = l1.value * (1.0 + opts.tie_rel_tol);
    for (int attempt = 0;; ++attempt) {
        try {
            r.N_h = static_cast<long>(count_leq(s.neumann, tau, opts.eig).n_below);
            s.op.emplace(s.neumann, tau, opts.eig);
            break;
        } catch (const ShiftOnEigenvalue&) {
            if (attempt >= opts.shift_retries)
                throw SolverError("threshold shift lands on a Neumann eigenvalue after " +
                                  std::to_string(opts.shift_retries) + " perturbations");
            tau *= 1.0 + 1e-10;
        }
    }
    r.tau = tau;
    r.window = ranked_window(*s.op, r.N_h, window, opts.eig);
}

struct Classification {
    double lambda_ext = 0.0;
    double delta = 0.0;  // relative extrapolation increment
    double gap = std::numeric_limits<double>::infinity();
    int ties = 0;
    long n_fine = 0;
    long n_coarse = 0;
    bool all_classified = true;
    bool window_short = false;
    bool converged = false;
};

// Compares the threshold windows of two consecutive levels. A window member is
// separated when its relative distance from lambda1 exceeds ten extrapolation
// increments, and a tie when it lies within one increment and the distance
// shrinks at least threefold under refinement. Ties count as included.
inline Classification classify(const LevelRecord& coarse, const LevelRecord& fine, int degree, double tie_rel_tol) {
    Classification c;
    const double factor = std::pow(2.0, 2 * degree);
    c.lambda_ext = (factor * fine.lambda1_h - coarse.lambda1_h) / (factor - 1.0);
    c.delta = std::abs(c.lambda_ext - fine.lambda1_h) / c.lambda_ext;
    std::vector<long> tie_ranks;
    double farthest = 0.0;
    for (const RankedValue& v : fine.window) {
        const double df = std::abs(v.mu - fine.lambda1_h) / fine.lambda1_h;
        farthest = std::max(farthest, df);
        if (df > 10.0 * c.delta) {
            c.gap = std::min(c.gap, df);
            continue;
        }
        // Within tie_rel_tol the discrete spectra coincide outright.
        bool tie = df <= tie_rel_tol;
        if (!tie && df <= c.delta) {
            for (const RankedValue& w : coarse.window)
                if (w.rank == v.rank) {
                    const double dc = std::abs(w.mu - coarse.lambda1_h) / coarse.lambda1_h;
                    tie = dc >= 3.0 * df;
                }
        }
        if (tie) {
            tie_ranks.push_back(v.rank);
        } else {
            c.all_classified = false;
        }
    }
    const auto window_complete = static_cast<long>(fine.window.size()) >= fine.n_dof;
    c.window_short = !window_complete && farthest <= 10.0 * c.delta;
    c.ties = static_cast<int>(tie_ranks.size());
    c.n_fine = fine.N_h;
    c.n_coarse = coarse.N_h;
    for (long r : tie_ranks) {
        if (r >= fine.N_h) ++c.n_fine;
        if (r >= coarse.N_h) ++c.n_coarse;
    }
    c.converged = c.all_classified && !c.window_short && c.n_fine == c.n_coarse;
    return c;
}

// Node count of refine(mesh) for P1; the Euler relation gives the edge count.
inline std::size_t refined_node_count(const Mesh& mesh) {
    return 2 * mesh.nodes.size() + mesh.triangles.size() - 1 + static_cast<std::size_t>(mesh.hole_count);
}

}  // namespace detail

/// Counts Neumann eigenvalues <= lambda1 on a sequence of uniformly refined
/// meshes until the count is certified stable, or the level/dof budget runs out.
inline SpectralReport compute_N(const PlanarDomain& domain, const CountingOptions& opts = {}) {
    validate(domain);
    if (opts.max_levels < 2) throw ParameterError("max_levels must be at least 2");
    if (!(opts.tie_rel_tol >= 0.0)) throw ParameterError("tie_rel_tol must be non-negative");
    if (opts.window < 1) throw ParameterError("window must be positive");
    SpectralReport rep;
    rep.label = domain.label;
    rep.provenance = domain.provenance;
    rep.I = isoperimetric_ratio(domain);

    const double h0 = opts.h0 > 0.0 ? opts.h0 : diameter(domain) / 8.0;
    Mesh mesh = triangulate(domain, h0);
    // Thin domains can mesh with every node on the boundary; the first level
    // needs a few interior nodes for the Dirichlet problem to be meaningful.
    while (mesh.nodes.size() - mesh.boundary_nodes.size() < opts.min_interior_nodes) {
        if (detail::refined_node_count(mesh) > opts.max_dof) throw ResourceError("initial mesh exceeds the dof cap");
        mesh = refine(mesh);
    }
    std::optional<detail::Classification> last;
    for (int level = 0; level < opts.max_levels; ++level) {
        if (level > 0) {
            const std::size_t next = opts.degree == 1 ? detail::refined_node_count(mesh)
                                                      : 4 * detail::refined_node_count(mesh);
            if (next > opts.max_dof) {
                rep.flags.push_back("dof-cap");
                break;
            }
            mesh = refine(mesh);
        }
        int window = opts.window;
        detail::LevelSolve s;
        detail::solve_level(s, mesh, opts, window);
        if (rep.levels.empty()) {
            s.record.N_adjusted = s.record.N_h;
            rep.levels.push_back(std::move(s.record));
            continue;
        }
        const LevelRecord& coarse = rep.levels.back();
        detail::Classification c = detail::classify(coarse, s.record, opts.degree, opts.tie_rel_tol);
        while (c.window_short && window < opts.max_window) {
            window = std::min(2 * window, opts.max_window);
            s.record.window = detail::ranked_window(*s.op, s.record.N_h, window, opts.eig);
            c = detail::classify(coarse, s.record, opts.degree, opts.tie_rel_tol);
        }
        s.record.N_adjusted = c.n_fine;
        s.record.ties = c.ties;
        rep.levels.push_back(std::move(s.record));
        last = c;
        if (c.converged) {
            rep.converged = true;
            break;
        }
    }

    const LevelRecord& fin = rep.levels.back();
    if (last) {
        rep.lambda1 = last->lambda_ext;
        rep.N = last->n_fine;
        rep.ties = last->ties;
        rep.threshold_gap = last->gap;
    } else {
        rep.lambda1 = fin.lambda1_h;
        rep.N = fin.N_h;
    }
    if (!std::isfinite(rep.threshold_gap)) {
        // No separated window member: fall back to the nearest raw distance.
        rep.threshold_gap = std::numeric_limits<double>::infinity();
        for (const RankedValue& v : fin.window)
            rep.threshold_gap = std::min(rep.threshold_gap, std::abs(v.mu - fin.lambda1_h) / fin.lambda1_h);
    }
    rep.tie_suspect = rep.ties > 0 || rep.threshold_gap < 1e-4;
    if (rep.tie_suspect) rep.flags.push_back("tie-suspect");
    if (!rep.converged) rep.flags.push_back("not-converged");
    if (rep.N < 2) rep.flags.push_back("friedlander-violation");
    return rep;
}

// ---------------------------------------------------------------------------
// Families and sweeps

inline const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names{"rectangle", "comb", "waffle", "regular", "annulus", "random"};
    return names;
}

inline bool is_family(const std::string& name) {
    const auto& f = family_names();
    return std::find(f.begin(), f.end(), name) != f.end();
}

namespace detail {

inline double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParameterError("not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ParameterError("not a number: '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s) {
    const double v = parse_real(s);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ParameterError("expected an integer, got '" + s + "'");
    return static_cast<int>(v);
}

}  // namespace detail

/// Builds a family member from its textual parameter. `seed` is used (and
/// required) by the random family only.
inline PlanarDomain make_domain(const std::string& family, const std::string& param,
                                std::optional<std::uint64_t> seed = std::nullopt) {
    if (family == "rectangle") return make_rectangle(detail::parse_real(param));
    if (family == "comb") return make_comb(detail::parse_int(param));
    if (family == "waffle") return make_waffle(detail::parse_int(param));
    if (family == "regular") return make_regular_polygon(detail::parse_int(param));
    if (family == "annulus") return make_square_annulus(detail::parse_real(param));
    if (family == "random") {
        if (!seed) throw ParameterError("the random family requires a seed");
        return make_random_polygon(detail::parse_int(param), *seed);
    }
    throw ParameterError("unknown family '" + family + "'");
}

struct SweepItem {
    std::string family;
    std::string param;
    std::optional<std::uint64_t> seed;
};

struct SweepRow {
    SweepItem item;
    std::optional<SpectralReport> report;
    std::string error;  // set when the row failed
    bool solver_failure = false;
};

/// Worker count from ISOSPEC_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("ISOSPEC_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 256L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates every item independently on a bounded pool. Rows come back in
/// input order; a failing item is recorded and the sweep continues.
inline std::vector<SweepRow> sweep(const std::vector<SweepItem>& items, const CountingOptions& opts = {},
                                   unsigned workers = 0) {
    std::vector<SweepRow> rows(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) rows[i].item = items[i];
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            SweepRow& row = rows[i];
            try {
                row.report = compute_N(make_domain(row.item.family, row.item.param, row.item.seed), opts);
            } catch (const SolverError& e) {
                row.error = e.what();
                row.solver_failure = true;
            } catch (const ResourceError& e) {
                row.error = e.what();
                row.solver_failure = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    if (workers == 0) workers = worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, items.size())));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

inline std::vector<SweepRow> sweep(const std::string& family, const std::vector<std::string>& params,
                                   const CountingOptions& opts = {},
                                   const std::vector<std::uint64_t>& seeds = {}, unsigned workers = 0) {
    if (!is_family(family)) throw ParameterError("unknown family '" + family + "'");
    std::vector<SweepItem> items;
    for (const std::string& p : params) {
        if (family == "random") {
            for (std::uint64_t s : seeds) items.push_back({family, p, s});
        } else {
            items.push_back({family, p, std::nullopt});
        }
    }
    return sweep(items, opts, workers);
}

/// The combined suite: rectangles, combs, waffles, square annuli, regular
/// polygons and twelve random polygons.
inline std::vector<SweepItem> default_suite() {
    std::vector<SweepItem> items;
    for (const char* l : {"1", "1.5", "2", "3", "4", "5", "6", "8", "10"}) items.push_back({"rectangle", l, {}});
    for (int m = 1; m <= 6; ++m) items.push_back({"comb", std::to_string(m), {}});
    for (int m = 1; m <= 4; ++m) items.push_back({"waffle", std::to_string(m), {}});
    for (const char* s : {"0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"})
        items.push_back({"annulus", s, {}});
    for (int m : {3, 4, 5, 6, 8, 12, 24}) items.push_back({"regular", std::to_string(m), {}});
    for (int n : {5, 10, 15, 20, 25, 30})
        for (std::uint64_t s = 1; s <= 2; ++s) items.push_back({"random", std::to_string(n), s});
    return items;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("spearman needs two equal-length samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace isospec
