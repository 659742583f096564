#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isospec/analytic.hpp"
#include "isospec/counting.hpp"
#include "isospec/eig.hpp"
#include "isospec/error.hpp"
#include "isospec/fem.hpp"
#include "isospec/geom.hpp"
#include "isospec/io.hpp"
#include "isospec/mesh.hpp"
#include "isospec/specfun.hpp"

namespace isospec::cli {

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kSolver = 3 };

/// Decimal rendering of a rational with a terminating expansion.
inline std::string format_decimal(const Rational& v) {
    const bool negative = v < 0;
    const Rational a = negative ? Rational(-v) : v;
    BigInt scale = 1;
    int digits = 0;
    while (boost::multiprecision::denominator(Rational(a * scale)) != 1) {
        if (++digits > 40) throw ParameterError("value has no short decimal expansion");
        scale *= 10;
    }
    std::string s = boost::multiprecision::numerator(Rational(a * scale)).str();
    if (digits > 0) {
        if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits + 1 - static_cast<int>(s.size())), '0');
        s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    }
    return negative ? "-" + s : s;
}

/// Expands "lo:hi[:step]" (inclusive, exact decimal arithmetic) and
/// comma-separated lists into parameter strings.
inline std::vector<std::string> expand_params(const std::string& spec) {
    std::vector<std::string> out;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) throw ParameterError("empty entry in parameter list '" + spec + "'");
        if (token.find(':') == std::string::npos) {
            parse_decimal(token);
            out.push_back(token);
            continue;
        }
        std::vector<std::string> parts;
        std::stringstream ts(token);
        std::string p;
        while (std::getline(ts, p, ':')) parts.push_back(p);
        if (parts.size() < 2 || parts.size() > 3) throw ParameterError("range must be lo:hi or lo:hi:step, got '" + token + "'");
        const Rational lo = parse_decimal(parts[0]);
        const Rational hi = parse_decimal(parts[1]);
        const Rational step = parts.size() == 3 ? parse_decimal(parts[2]) : Rational(1);
        if (step <= 0) throw ParameterError("range step must be positive");
        if (hi < lo) throw ParameterError("range '" + token + "' is empty");
        const Rational span = (hi - lo) / step;
        const BigInt count = boost::multiprecision::numerator(span) / boost::multiprecision::denominator(span) + 1;
        if (count > 100000) throw ParameterError("range '" + token + "' has too many values");
        for (BigInt k = 0; k < count; ++k) out.push_back(format_decimal(lo + Rational(k) * step));
    }
    if (out.empty()) throw ParameterError("parameter list is empty");
    return out;
}

namespace detail {

inline void add_solver_options(CLI::App* cmd, CountingOptions& o) {
    cmd->add_option("--h0", o.h0, "initial target edge length (default: diameter / 8)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-levels", o.max_levels, "refinement levels")->check(CLI::Range(2, 12));
    cmd->add_option("--tie-rel-tol", o.tie_rel_tol, "relative tolerance counting ties as included")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-dof", o.max_dof, "degree-of-freedom cap per level");
    cmd->add_option("--degree", o.degree, "element degree")->check(CLI::IsMember({1, 2}));
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

// Writes to the named file, or to `out` when the name is empty.
inline void emit(const std::string& path, std::ostream& out, const std::string& text) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot open output file '" + path + "'");
    f << text;
}

inline std::string fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Invariant suite behind `check`

struct CheckResult {
    std::string name;
    bool ok = false;
    std::string detail;
};

inline std::vector<CheckResult> run_checks() {
    std::vector<CheckResult> results;
    auto check = [&](const std::string& name, const std::function<std::string()>& body) {
        CheckResult r{name, false, {}};
        try {
            r.detail = body();
            r.ok = r.detail.empty();
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        results.push_back(r);
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };

    check("closed-form isoperimetric ratios", [&]() -> std::string {
        for (int m = 1; m <= 8; ++m)
            if (rel(isoperimetric_ratio(make_comb(m)), 36.0 * m * m / (3.0 * m - 1.0)) > 1e-10) return "comb " + std::to_string(m);
        for (int m : {3, 4, 5, 6, 8, 12, 96})
            if (rel(isoperimetric_ratio(make_regular_polygon(m)), 4.0 * m * std::tan(std::numbers::pi / m)) > 1e-10)
                return "regular " + std::to_string(m);
        for (double l : {1.0, 2.0, 3.5, 10.0})
            if (rel(isoperimetric_ratio(make_rectangle(l)), 4.0 * (1 + l) * (1 + l) / l) > 1e-10) return "rectangle";
        return {};
    });
    check("random polygons are simple", [&]() -> std::string {
        for (std::uint64_t s = 1; s <= 20; ++s) {
            const PlanarDomain d = make_random_polygon(20, s);
            if (!is_simple(d.outer) || !(signed_area(d.outer) > 0.0)) return "seed " + std::to_string(s);
        }
        return {};
    });
    check("mesh invariants under refinement", [&]() -> std::string {
        for (const PlanarDomain& d : {make_rectangle(2.0), make_comb(3), make_waffle(2), make_square_annulus(0.5),
                                      make_regular_polygon(7), make_random_polygon(15, 3)}) {
            Mesh m = triangulate(d, diameter(d) / 6.0);
            validate(m);
            const double a = mesh_area(m);
            m = refine(m);
            validate(m);
            if (rel(mesh_area(m), a) > 1e-12 || rel(a, area(d)) > 1e-12) return "area drift on " + d.label;
        }
        return {};
    });
    check("assembly kernel and patch test", [&]() -> std::string {
        const Mesh m = refine(triangulate(make_square_annulus(0.4), 0.3));
        const OperatorPair n = assemble(m, BoundaryCondition::Neumann);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(n.n_dof);
        if ((n.K * one).norm() > 1e-10 * n.K.norm()) return "K 1 != 0";
        if (rel(one.dot(n.M * one), 0.84) > 1e-10) return "1'M1 != area";
        return {};
    });
    check("inertia matches dense oracle", [&]() -> std::string {
        const Mesh m = triangulate(make_comb(2), 0.5);
        const OperatorPair n = assemble(m, BoundaryCondition::Neumann);
        const std::vector<double> spec = dense_spectrum(n);
        for (double tau : {0.5, 5.0, 12.0, 30.0}) {
            const auto expect = static_cast<std::size_t>(std::count_if(spec.begin(), spec.end(), [&](double v) { return v < tau; }));
            if (count_leq(n, tau).n_below != expect) return "tau " + std::to_string(tau);
        }
        return {};
    });
    check("unit square and pentagon counts", [&]() -> std::string {
        const SpectralReport sq = compute_N(make_rectangle(1.0));
        if (sq.N != 4 || !sq.converged) return "square N = " + std::to_string(sq.N);
        const SpectralReport pe = compute_N(make_regular_polygon(5));
        if (pe.N != 3 || !pe.converged) return "pentagon N = " + std::to_string(pe.N);
        return {};
    });
    check("Lorch-Szego enclosure and interlacing", [&]() -> std::string {
        for (int nu = 1; nu <= 8; ++nu)
            for (int ell = 1; ell <= 6; ++ell) {
                const double p = bessel_zero_p(nu, ell, 1).value;
                const double lo = 2.0 * ell * (nu + ell) * (nu + ell + 1.0) / (nu + 2.0 * ell + 1.0);
                if (!(lo < p * p && p * p < 2.0 * ell * (nu + ell))) return "nu " + std::to_string(nu);
                const double j = bessel_zero_j(nu + ell - 1.0, 1).value;
                if (!(p < j && j < bessel_zero_p(nu, ell, 2).value)) return "interlacing nu " + std::to_string(nu);
            }
        return {};
    });
    check("rectangle oracles agree", [&]() -> std::string {
        for (int i = 0; i < 200; ++i) {
            const Rational l = 1 + Rational(49 * i, 199);
            const long closed = rectangle_N_2d(l);
            const auto exact = static_cast<long>(rectangle_N_exact(RectangleSpec{{Rational(1), l}}));
            if (closed != exact) return "l = " + l.str();
        }
        SplitMix64 rng(20240601);
        for (int n = 2; n <= 4; ++n)
            for (int t = 0; t < 20; ++t) {
                std::vector<double> ls;
                for (int k = 0; k < n; ++k) ls.push_back(0.2 + 19.8 * rng.uniform());
                const SandwichResult s = rectangle_sandwich_check(RectangleSpec::from_doubles(ls));
                if (!s.lower_ok || !s.upper_ok) return "sandwich n = " + std::to_string(n);
            }
        return {};
    });
    check("ball counts", [&]() -> std::string {
        if (ball_N(2).N != 3) return "disc";
        if (ball_N(3).N != 4) return "ball in 3d";
        for (int n = 4; n <= 12; ++n)
            if (ball_N(n).N <= n + 1) return "n = " + std::to_string(n);
        return {};
    });
    return results;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"isospec: Neumann eigenvalue counts below the first Dirichlet eigenvalue"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "expanded help");

    CountingOptions opts;
    std::string family, param, domain_file, output, format = "csv", params_spec, sides_spec;
    std::uint64_t seed = 0, seed_count = 0;
    unsigned workers = 0;
    bool suite = false;

    CLI::App* compute = app.add_subcommand("compute", "compute N and I for one domain");
    compute->add_option("--family", family, "generator family")->check(CLI::IsMember(family_names()));
    compute->add_option("--param", param, "generator parameter");
    CLI::Option* compute_seed = compute->add_option("--seed", seed, "seed for the random family");
    compute->add_option("--domain", domain_file, "domain JSON file")->excludes("--family");
    compute->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    compute->add_option("--output,-o", output, "output path (default: stdout)");
    detail::add_solver_options(compute, opts);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "compute N and I over a family or the default suite");
    sweep_cmd->add_option("--family", family, "generator family")->check(CLI::IsMember(family_names()));
    sweep_cmd->add_option("--params", params_spec, "lo:hi[:step] ranges or comma lists");
    sweep_cmd->add_option("--sides", sides_spec, "vertex counts for the random family");
    CLI::Option* seeds_opt = sweep_cmd->add_option("--seeds", seed_count, "random family: use seeds 1..K");
    sweep_cmd->add_flag("--suite", suite, "run the combined default suite")->excludes("--family");
    sweep_cmd->add_option("--workers", workers, "parallel workers (default: ISOSPEC_WORKERS or all cores)");
    sweep_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--output,-o", output, "output path (default: stdout)");
    detail::add_solver_options(sweep_cmd, opts);

    CLI::App* table_cmd = app.add_subcommand("table1", "first zeros p^(1..3) against j_{n/2-1,1}, n = 2..7");
    std::string table_format = "text";
    table_cmd->add_option("--format", table_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    CLI::App* ball_cmd = app.add_subcommand("ball", "unit-ball counts N(B^n)");
    int n_max = 7, growth = 0;
    std::string ball_format = "text";
    ball_cmd->add_option("n_max", n_max, "largest dimension")->check(CLI::PositiveNumber);
    ball_cmd->add_option("--growth", growth, "also report first n with N >= n^l for l = 1..L");
    ball_cmd->add_option("--format", ball_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    CLI::App* rect_cmd = app.add_subcommand("rect", "lattice count, I and bound ratios for a box");
    std::vector<std::string> lengths;
    std::string rect_format = "text";
    rect_cmd->add_option("lengths", lengths, "side lengths (exact decimals)")->required();
    rect_cmd->add_option("--format", rect_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    CLI::App* check_cmd = app.add_subcommand("check", "run the invariant suite");

    CLI::App* domain_cmd = app.add_subcommand("domain", "emit a generated domain (or its mesh) as JSON");
    double mesh_h = 0.0;
    std::string matrix, bc_name = "neumann";
    domain_cmd->add_option("--family", family, "generator family")->required()->check(CLI::IsMember(family_names()));
    domain_cmd->add_option("--param", param, "generator parameter")->required();
    CLI::Option* domain_seed = domain_cmd->add_option("--seed", seed, "seed for the random family");
    domain_cmd->add_option("--mesh", mesh_h, "emit the triangulation at this target edge length")
        ->check(CLI::PositiveNumber);
    domain_cmd->add_option("--matrix", matrix, "with --mesh: emit stiffness or mass in Matrix Market form")
        ->check(CLI::IsMember({"stiffness", "mass"}))
        ->needs("--mesh");
    domain_cmd->add_option("--bc", bc_name, "boundary condition for --matrix")->check(CLI::IsMember({"dirichlet", "neumann"}));
    domain_cmd->add_option("--output,-o", output, "output path (default: stdout)");

    std::vector<std::string> argv_store = args;
    std::vector<char*> argv;
    for (std::string& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (compute->parsed()) {
            if (family.empty() == domain_file.empty()) throw ParameterError("give exactly one of --family or --domain");
            SweepRow row;
            PlanarDomain d;
            if (!domain_file.empty()) {
                d = read_domain_file(domain_file);
                row.item = {"file", detail::csv_escape(domain_file), std::nullopt};
            } else {
                if (param.empty()) throw ParameterError("--family needs --param");
                if (family == "random" && !compute_seed->count()) throw ParameterError("the random family needs --seed");
                std::optional<std::uint64_t> s;
                if (family == "random") s = seed;
                d = make_domain(family, param, s);
                row.item = {family, param, s};
            }
            try {
                row.report = compute_N(d, opts);
            } catch (const SolverError& e) {
                err << "solver failure: " << e.what() << '\n';
                return kSolver;
            } catch (const ResourceError& e) {
                err << "resource limit: " << e.what() << '\n';
                return kSolver;
            }
            err << "options " << options_hash(opts) << " (" << options_fingerprint(opts) << ")\n";
            std::ostringstream text;
            if (format == "json") {
                text << rows_to_json({row}, opts).at(0).dump(2) << '\n';
            } else {
                write_csv(text, {row});
            }
            detail::emit(output, out, text.str());
            if (!row.report->converged) {
                err << "not converged within " << row.report->levels.size() << " levels\n";
                return kSolver;
            }
            return kOk;
        }

        if (sweep_cmd->parsed()) {
            std::vector<SweepItem> items;
            if (suite) {
                items = default_suite();
            } else {
                if (family.empty()) throw ParameterError("sweep needs --family or --suite");
                if (family == "random") {
                    if (sides_spec.empty() && params_spec.empty()) throw ParameterError("random sweeps need --sides");
                    if (!seeds_opt->count() || seed_count == 0) throw ParameterError("random sweeps need --seeds K");
                    for (const std::string& n : expand_params(sides_spec.empty() ? params_spec : sides_spec))
                        for (std::uint64_t s = 1; s <= seed_count; ++s) items.push_back({family, n, s});
                } else {
                    if (params_spec.empty()) throw ParameterError("sweep needs --params");
                    for (const std::string& p : expand_params(params_spec)) items.push_back({family, p, std::nullopt});
                }
                for (const SweepItem& it : items) make_domain(it.family, it.param, it.seed);  // reject bad params up front
            }
            const std::vector<SweepRow> rows = sweep(items, opts, workers);
            err << "options " << options_hash(opts) << " (" << options_fingerprint(opts) << ")\n";
            for (const SweepRow& r : rows)
                if (!r.report) err << r.item.family << ' ' << r.item.param << ": " << r.error << '\n';
            std::ostringstream text;
            if (format == "json") {
                text << rows_to_json(rows, opts).dump(2) << '\n';
            } else {
                write_csv(text, rows);
            }
            detail::emit(output, out, text.str());
            return kOk;
        }

        if (table_cmd->parsed()) {
            const std::vector<Table1Row> rows = table1();
            if (table_format == "csv") {
                out << "n,p1,p2,p3,j\n";
                for (const Table1Row& r : rows)
                    out << r.n << ',' << detail::fixed(r.p[0], 10) << ',' << detail::fixed(r.p[1], 10) << ','
                        << detail::fixed(r.p[2], 10) << ',' << detail::fixed(r.j, 10) << '\n';
            } else {
                out << " n   p(1)   p(2)   p(3)   j(n/2-1,1)\n";
                for (const Table1Row& r : rows)
                    out << ' ' << r.n << "   " << detail::fixed(r.p[0], 2) << "   " << detail::fixed(r.p[1], 2) << "   "
                        << detail::fixed(r.p[2], 2) << "   " << detail::fixed(r.j, 2) << '\n';
            }
            return kOk;
        }

        if (ball_cmd->parsed()) {
            if (n_max < 2 || n_max > 64) throw ParameterError("n_max must lie in [2, 64]");
            if (growth < 0 || growth > 16) throw ParameterError("--growth must lie in [0, 16]");
            if (ball_format == "csv") {
                out << "n,lambda1,N,I\n";
            } else {
                out << "  n        lambda1                    N              I(B^n)\n";
            }
            for (int n = 2; n <= n_max; ++n) {
                const BallCount b = ball_N(n);
                char line[256];
                if (ball_format == "csv") {
                    std::snprintf(line, sizeof line, "%d,%.12g,%s,%.12g\n", n, b.lambda1, b.N.str().c_str(),
                                  ball_isoperimetric(n));
                } else {
                    std::snprintf(line, sizeof line, "%3d  %13.6f  %19s  %18.6g\n", n, b.lambda1, b.N.str().c_str(),
                                  ball_isoperimetric(n));
                }
                out << line;
            }
            for (int l = 1; l <= growth; ++l) {
                const GrowthResult g = ball_growth_check(l, n_max);
                out << "growth l=" << l << ": first n with N >= n^l: "
                    << (g.first_n ? std::to_string(*g.first_n) : "none up to " + std::to_string(g.cap))
                    << "; holds from n = " << (g.holds_from ? std::to_string(*g.holds_from) : "-") << " through "
                    << g.cap << '\n';
            }
            return kOk;
        }

        if (rect_cmd->parsed()) {
            const RectangleSpec spec = RectangleSpec::from_strings(lengths);
            const SandwichResult s = rectangle_sandwich_check(spec);
            if (rect_format == "csv") {
                out << "N,I,ratio_lower,ratio_upper,lower_ok,upper_ok\n"
                    << s.N << ',' << isospec::detail::fmt(s.I) << ',' << isospec::detail::fmt(s.ratio_lower) << ','
                    << isospec::detail::fmt(s.ratio_upper) << ',' << (s.lower_ok ? "true" : "false") << ','
                    << (s.upper_ok ? "true" : "false") << '\n';
            } else {
                out << "N = " << s.N << "\nI = " << isospec::detail::fmt(s.I) << "\nN / (lower constant * I) = "
                    << isospec::detail::fmt(s.ratio_lower) << "\nN / (upper constant * I) = "
                    << isospec::detail::fmt(s.ratio_upper) << "\nlower bounds hold: " << (s.lower_ok ? "yes" : "no")
                    << "\nupper bounds hold: " << (s.upper_ok ? "yes" : "no") << '\n';
            }
            return kOk;
        }

        if (check_cmd->parsed()) {
            int failed = 0;
            for (const CheckResult& r : run_checks()) {
                out << (r.ok ? "ok   " : "FAIL ") << r.name << (r.ok ? "" : ": " + r.detail) << '\n';
                failed += r.ok ? 0 : 1;
            }
            return failed ? kCheckFailed : kOk;
        }

        if (domain_cmd->parsed()) {
            if (family == "random" && !domain_seed->count()) throw ParameterError("the random family needs --seed");
            std::optional<std::uint64_t> s;
            if (family == "random") s = seed;
            const PlanarDomain d = make_domain(family, param, s);
            std::ostringstream text;
            if (mesh_h > 0.0) {
                const Mesh m = triangulate(d, mesh_h);
                if (!matrix.empty()) {
                    const OperatorPair p =
                        assemble(m, bc_name == "dirichlet" ? BoundaryCondition::Dirichlet : BoundaryCondition::Neumann);
                    write_matrix_market(text, matrix == "stiffness" ? p.K : p.M);
                } else {
                    text << mesh_to_json(m).dump() << '\n';
                }
            } else {
                text << domain_to_json(d).dump(2) << '\n';
            }
            detail::emit(output, out, text.str());
            return kOk;
        }
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, out, err);
}

}  // namespace isospec::cli
