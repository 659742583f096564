#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "isospec/counting.hpp"

using namespace isospec;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void expect_report_consistent(const SpectralReport& r) {
    ASSERT_FALSE(r.levels.empty());
    EXPECT_EQ(r.h_final(), r.levels.back().h);
    for (std::size_t i = 1; i < r.levels.size(); ++i) {
        EXPECT_LT(r.levels[i].h, r.levels[i - 1].h);
        EXPECT_GT(r.levels[i].n_dof, r.levels[i - 1].n_dof);
        EXPECT_LE(r.levels[i].lambda1_h, r.levels[i - 1].lambda1_h * (1 + 1e-9));
    }
    for (const LevelRecord& l : r.levels) EXPECT_LE(l.lambda1_residual, 1e-8);
    if (r.converged) {
        ASSERT_GE(r.levels.size(), 2u);
        EXPECT_EQ(r.levels.back().N_adjusted, r.levels[r.levels.size() - 2].N_adjusted);
        EXPECT_EQ(r.N, r.levels.back().N_adjusted);
        EXPECT_GE(r.N, 2);  // first positive Neumann eigenvalue lies below lambda_1
    }
}

}  // namespace

TEST(ComputeN, UnitSquare) {
    const SpectralReport r = compute_N(make_rectangle(1.0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.N, 4);
    EXPECT_DOUBLE_EQ(r.I, 16.0);
    EXPECT_LT(rel(r.lambda1, 2 * kPi2), 1e-3);
    expect_report_consistent(r);
}

TEST(ComputeN, RectangleThree) {
    const SpectralReport r = compute_N(make_rectangle(3.0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.N, 6);
    EXPECT_LT(rel(r.I, 64.0 / 3.0), 1e-12);
    EXPECT_LT(rel(r.lambda1, kPi2 * (1.0 + 1.0 / 9.0)), 1e-3);
    expect_report_consistent(r);
}

TEST(ComputeN, RegularPentagon) {
    const SpectralReport r = compute_N(make_regular_polygon(5));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.N, 3);
    expect_report_consistent(r);
}

TEST(ComputeN, DiscProxy) {
    const SpectralReport r = compute_N(make_regular_polygon(96));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.N, 3);
    // j_{0,1}^2 on the unit disc; the inscribed 96-gon is slightly smaller.
    EXPECT_LT(rel(r.lambda1, 2.404825557695773 * 2.404825557695773), 2e-3);
}

TEST(ComputeN, ScaleInvariance) {
    for (const PlanarDomain& d : {make_rectangle(2.0), make_comb(2), make_square_annulus(0.5)}) {
        const SpectralReport base = compute_N(d);
        ASSERT_TRUE(base.converged) << d.label;
        for (double c : {0.1, 7.0}) {
            const SpectralReport s = compute_N(scaled(d, c));
            EXPECT_TRUE(s.converged);
            EXPECT_EQ(s.N, base.N) << d.label << " c=" << c;
            EXPECT_LT(rel(s.lambda1, base.lambda1 / (c * c)), 1e-3);
            EXPECT_LT(rel(s.I, base.I), 1e-10);
        }
    }
}

TEST(ComputeN, ConvexAtLeastThree) {
    for (const PlanarDomain& d : {make_rectangle(1.5), make_rectangle(5.0), make_regular_polygon(3),
                                  make_regular_polygon(6), make_regular_polygon(12)}) {
        const SpectralReport r = compute_N(d);
        if (!r.converged) continue;
        EXPECT_GE(r.N, 3) << d.label;
        expect_report_consistent(r);
    }
}

TEST(ComputeN, EquilateralTriangleExactTie) {
    // mu_4 = lambda_1 exactly on the equilateral triangle; the tie is counted.
    const SpectralReport r = compute_N(make_regular_polygon(3));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.N, 4);
    EXPECT_GE(r.ties, 1);
}

TEST(ComputeN, ThinDomainsHaveFreeDofs) {
    const SpectralReport r = compute_N(make_square_annulus(0.9));
    expect_report_consistent(r);
    EXPECT_GE(r.N, 2);
}

TEST(ComputeN, LevelCap) {
    CountingOptions o;
    o.max_levels = 1;
    EXPECT_THROW(compute_N(make_rectangle(2.0), o), ParameterError);
    o.max_levels = 2;
    const SpectralReport r = compute_N(make_random_polygon(30, 1), o);
    EXPECT_LE(r.levels.size(), 2u);
    const bool flagged = std::find(r.flags.begin(), r.flags.end(), "not-converged") != r.flags.end();
    EXPECT_EQ(flagged, !r.converged);
}

TEST(ComputeN, DofCapStopsRefinement) {
    CountingOptions o;
    o.max_dof = 3000;
    const SpectralReport r = compute_N(make_comb(4), o);
    for (const LevelRecord& l : r.levels) EXPECT_LE(static_cast<std::size_t>(l.n_dof), 3000u);
    if (!r.converged) {
        EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "dof-cap"), r.flags.end());
    }
}

TEST(ComputeN, Deterministic) {
    const SpectralReport a = compute_N(make_random_polygon(10, 1)), b = compute_N(make_random_polygon(10, 1));
    EXPECT_EQ(a.N, b.N);
    EXPECT_EQ(a.lambda1, b.lambda1);
    EXPECT_EQ(a.threshold_gap, b.threshold_gap);
}

TEST(Spearman, KnownValues) {
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
    // Average ranks for ties: x ranks 1,2.5,2.5,4 against 1,2,3,4.
    EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
    EXPECT_THROW(spearman({1}, {1}), ParameterError);
}

TEST(Sweep, OrderAndFailures) {
    CountingOptions o;
    o.max_levels = 2;
    std::vector<SweepItem> items{{"rectangle", "3", {}}, {"comb", "0", {}}, {"rectangle", "1", {}},
                                 {"random", "5", 2}, {"regular", "5", {}}};
    const std::vector<SweepRow> rows = sweep(items, o, 3);
    ASSERT_EQ(rows.size(), items.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].item.param, items[i].param);
    EXPECT_TRUE(rows[0].report.has_value());
    EXPECT_FALSE(rows[1].report.has_value());
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_TRUE(rows[2].report.has_value());
    EXPECT_TRUE(rows[3].report.has_value());
    // Same numbers regardless of worker count.
    const std::vector<SweepRow> serial = sweep(items, o, 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].report) {
            EXPECT_EQ(rows[i].report->lambda1, serial[i].report->lambda1);
        }
}

TEST(Sweep, FamilyFormAndUnknownFamily) {
    CountingOptions o;
    o.max_levels = 2;
    const std::vector<SweepRow> rows = sweep("random", {"5", "6"}, o, {1, 2}, 1);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1].item.seed, std::optional<std::uint64_t>(2));
    EXPECT_THROW(sweep("blob", {"1"}, o), ParameterError);
}

TEST(Sweep, CombClosedFormColumn) {
    CountingOptions o;
    o.max_levels = 2;
    const std::vector<SweepRow> rows = sweep("comb", {"1", "2", "3", "4", "5", "6"}, o);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double m = static_cast<double>(i + 1);
        ASSERT_TRUE(rows[i].report);
        EXPECT_LT(rel(rows[i].report->I, 36 * m * m / (3 * m - 1)), 1e-10);
    }
}

TEST(DefaultSuite, Composition) {
    const std::vector<SweepItem> items = default_suite();
    EXPECT_EQ(items.size(), 9u + 6u + 4u + 9u + 7u + 12u);
    EXPECT_EQ(std::count_if(items.begin(), items.end(), [](const SweepItem& i) { return i.family == "random"; }), 12);
}

TEST(MakeDomain, Errors) {
    EXPECT_THROW(make_domain("random", "5"), ParameterError);
    EXPECT_THROW(make_domain("rectangle", "abc"), ParameterError);
    EXPECT_THROW(make_domain("comb", "2.5"), ParameterError);
    EXPECT_THROW(make_domain("hexagon", "1"), ParameterError);
    EXPECT_EQ(make_domain("waffle", "2").holes.size(), 4u);
}
