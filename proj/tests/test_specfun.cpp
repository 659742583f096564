#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <cmath>
#include <functional>
#include <numbers>

#include "isospec/specfun.hpp"

using namespace isospec;

namespace {

void expect_certified(const BesselZeroRecord& r, const std::function<double(double)>& f) {
    EXPECT_LT(r.lo, r.value);
    EXPECT_LT(r.value, r.hi);
    EXPECT_LE(r.hi - r.lo, 1e-10 * r.value);
    EXPECT_LT(f(r.lo) * f(r.hi), 0.0);
}

}  // namespace

TEST(BesselJ, Basics) {
    EXPECT_EQ(bessel_j(0.0, 0.0), 1.0);
    EXPECT_EQ(bessel_j(1.5, 0.0), 0.0);
    EXPECT_LT(std::abs(bessel_j(0.0, 2.404825557695773)), 1e-10);
    EXPECT_NEAR(bessel_j(0.5, 1.0), std::sqrt(2.0 / std::numbers::pi) * std::sin(1.0), 1e-14);
}

TEST(BesselJ, HalfIntegerClosedForms) {
    for (double x : {0.3, 1.0, 4.0, 11.5, 12.5, 30.0, 150.0}) {
        const double s = std::sqrt(2.0 / (std::numbers::pi * x));
        EXPECT_NEAR(bessel_j(0.5, x), s * std::sin(x), 1e-12) << x;
        EXPECT_NEAR(bessel_j(1.5, x), s * (std::sin(x) / x - std::cos(x)), 1e-12) << x;
    }
}

TEST(BesselJ, AgainstBoost) {
    double worst = 0.0;
    for (double nu = 0.0; nu <= 40.0; nu += 0.5)
        for (double x = 0.05; x <= 200.0; x *= 1.13) {
            const double ref = boost::math::cyl_bessel_j(nu, x);
            worst = std::max(worst, std::abs(bessel_j(nu, x) - ref));
        }
    EXPECT_LT(worst, 1e-12);
}

// Series and continued-fraction paths agree over the switchover band.
TEST(BesselJ, SeriesSteedCrossCheck) {
    for (double nu : {0.0, 0.5, 1.0, 2.5, 4.0, 7.5})
        for (double x = 2.0; x <= 14.0; x += 0.37) {
            double series = 0.0;
            if (!detail::bessel_j_series(nu, x, series)) continue;
            EXPECT_NEAR(series, detail::bessel_j_steed(nu, x), 1e-12) << nu << " " << x;
        }
}

TEST(BesselJ, Errors) {
    EXPECT_THROW(bessel_j(-1.0, 1.0), DomainError);
    EXPECT_THROW(bessel_j(1.0, -1.0), DomainError);
    EXPECT_THROW(bessel_j(1.0, 2000.0), RangeError);
    EXPECT_THROW(ultraspherical_deriv(1.0, 1, 0.0), DomainError);
    EXPECT_THROW(ultraspherical_deriv(1.0, -1, 1.0), DomainError);
}

TEST(Ultraspherical, ReducesToJPrimeForNuOne) {
    for (double x : {0.5, 1.8, 3.3, 7.0})
        EXPECT_NEAR(ultraspherical_deriv(1.0, 1, x), boost::math::cyl_bessel_j_prime(1.0, x), 1e-12);
}

TEST(Ultraspherical, MatchesFiniteDifference) {
    for (double nu : {1.0, 1.5, 2.5, 3.5})
        for (int ell : {0, 1, 2, 3})
            for (double x : {0.7, 2.0, 4.5}) {
                auto g = [&](double t) { return std::pow(t, 1.0 - nu) * boost::math::cyl_bessel_j(nu + ell - 1.0, t); };
                const double h = 1e-5;
                const double fd = (g(x + h) - g(x - h)) / (2 * h);
                EXPECT_NEAR(ultraspherical_deriv(nu, ell, x), fd, 1e-8 * std::max(1.0, std::abs(fd)));
            }
}

TEST(Ultraspherical, SignChangeOverTableBracket) {
    EXPECT_LT(ultraspherical_deriv(1.0, 2, 3.0) * ultraspherical_deriv(1.0, 2, 3.1), 0.0);
}

TEST(ZeroJ, KnownZeros) {
    EXPECT_NEAR(bessel_zero_j(0.0, 1).value, 2.404825557695773, 1e-9);
    EXPECT_NEAR(bessel_zero_j(1.0, 1).value, 3.831705970207512, 1e-9);
    EXPECT_NEAR(bessel_zero_j(0.5, 1).value, std::numbers::pi, 1e-9);
    EXPECT_NEAR(bessel_zero_j(0.5, 4).value, 4 * std::numbers::pi, 1e-9);
    for (double nu : {0.0, 1.0, 2.5, 9.0})
        for (int k = 1; k <= 5; ++k)
            EXPECT_NEAR(bessel_zero_j(nu, k).value, boost::math::cyl_bessel_j_zero(nu, k), 1e-9) << nu << " " << k;
}

TEST(ZeroJ, Certified) {
    for (double nu : {0.0, 0.5, 3.0, 12.5})
        for (int k : {1, 2, 6}) {
            const BesselZeroRecord r = bessel_zero_j(nu, k);
            EXPECT_EQ(r.k, k);
            expect_certified(r, [nu](double x) { return bessel_j(nu, x); });
        }
}

TEST(ZeroJ, MonotoneInOrder) {
    double prev = 0.0;
    for (double nu = 0.5; nu <= 10.0; nu += 0.5) {
        const double j = bessel_zero_j(nu, 1).value;
        EXPECT_GT(j, prev);
        EXPECT_GT(j, nu);
        prev = j;
    }
}

TEST(ZeroJ, Errors) {
    EXPECT_THROW(bessel_zero_j(-0.5, 1), DomainError);
    EXPECT_THROW(bessel_zero_j(1.0, 0), DomainError);
    EXPECT_THROW(bessel_zero_j(0.0, 400), SearchError);
}

TEST(ZeroP, TableExamples) {
    EXPECT_NEAR(bessel_zero_p(1.0, 1, 1).value, 1.84, 0.005);
    EXPECT_NEAR(bessel_zero_p(2.0, 2, 1).value, 3.61, 0.005);
    EXPECT_NEAR(bessel_zero_p(3.5, 3, 1).value, 5.63, 0.005);
    EXPECT_NEAR(bessel_zero_p(1.0, 1, 1).value, 1.8411837813406593, 1e-9);
}

TEST(ZeroP, EllZeroDelegates) {
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(bessel_zero_p(1.0, 0, k).value, bessel_zero_j(1.0, k).value);
}

TEST(ZeroP, CertifiedAndLorchSzegoEnclosure) {
    for (double nu = 1.0; nu <= 8.0; nu += 0.5)
        for (int ell = 1; ell <= 6; ++ell) {
            const BesselZeroRecord r = bessel_zero_p(nu, ell, 1);
            expect_certified(r, [nu, ell](double x) { return ultraspherical_deriv(nu, ell, x); });
            const double p2 = r.value * r.value;
            EXPECT_LT(2.0 * ell * (nu + ell) * (nu + ell + 1) / (nu + 2.0 * ell + 1), p2);
            EXPECT_LT(p2, 2.0 * ell * (nu + ell));
        }
}

TEST(ZeroP, DixonInterlacing) {
    for (double nu : {1.0, 1.5, 2.0, 3.5, 6.0})
        for (int ell = 1; ell <= 4; ++ell) {
            const double p1 = bessel_zero_p(nu, ell, 1).value;
            const double p2 = bessel_zero_p(nu, ell, 2).value;
            const double p3 = bessel_zero_p(nu, ell, 3).value;
            const double j1 = bessel_zero_j(nu + ell - 1.0, 1).value;
            const double j2 = bessel_zero_j(nu + ell - 1.0, 2).value;
            EXPECT_LT(p1, j1);
            EXPECT_LT(j1, p2);
            EXPECT_LT(p2, j2);
            EXPECT_LT(j2, p3);
        }
}

TEST(ZeroP, LowestDegreeIsSmallest) {
    for (int nu = 1; nu <= 8; ++nu) {
        const double p1 = bessel_zero_p(nu, 1, 1).value;
        for (int ell = 2; ell <= 6; ++ell) EXPECT_LT(p1, bessel_zero_p(nu, ell, 1).value);
    }
}

TEST(ZeroP, Errors) {
    EXPECT_THROW(bessel_zero_p(0.0, 1, 1), DomainError);
    EXPECT_THROW(bessel_zero_p(1.0, -1, 1), DomainError);
    EXPECT_THROW(bessel_zero_p(1.0, 1, 0), DomainError);
}

TEST(Table1, RecomputedValues) {
    const double expect[6][4] = {{1.8411837813, 3.0542369283, 4.2011889413, 2.4048255577},
                                 {2.0815759778, 3.3420936573, 4.5140996471, 3.1415926536},
                                 {2.2999103302, 3.6112634488, 4.8112826493, 3.8317059702},
                                 {2.5011326204, 3.8646997782, 5.0946156324, 4.4934094579},
                                 {2.6885891921, 4.1046720336, 5.3656520739, 5.1356223020},
                                 {2.8646728462, 4.3329703144, 5.6256947829, 5.7634591969}};
    const std::vector<Table1Row> rows = table1();
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(rows[i].n, static_cast<int>(i) + 2);
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(rows[i].p[c], expect[i][c], 1e-9);
        EXPECT_NEAR(rows[i].j, expect[i][3], 1e-9);
    }
}

TEST(Table1, OrderingOfSecondDegreeAgainstJ) {
    for (const Table1Row& r : table1()) {
        if (r.n >= 4) {
            EXPECT_LT(r.p[1], r.j) << r.n;
        } else {
            EXPECT_GT(r.p[1], r.j) << r.n;
        }
    }
}
