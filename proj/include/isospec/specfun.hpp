#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "isospec/error.hpp"

namespace isospec {

namespace detail {

constexpr double kBesselMaxArg = 1000.0;

// Ascending series in extended precision. Returns false when the running sum
// of term magnitudes says cancellation would cost more than ~1e-13 absolute.
inline bool bessel_j_series(double nu, double x, double& out) {
    using ld = long double;
    const ld half = static_cast<ld>(x) / 2;
    const ld q = -half * half;
    ld term = std::exp(static_cast<ld>(nu) * std::log(half) - std::lgamma(static_cast<ld>(nu) + 1));
    ld sum = term;
    ld magnitude = std::abs(term);
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<ld>(k) * (static_cast<ld>(k) + static_cast<ld>(nu)));
        sum += term;
        magnitude += std::abs(term);
        if (std::abs(term) <= std::numeric_limits<ld>::epsilon() * std::abs(sum) && k > half) break;
    }
    out = static_cast<double>(sum);
    return magnitude * std::numeric_limits<ld>::epsilon() <= 1e-13;
}

// Steed's method: continued fraction CF1 for J'/J, downward recurrence to an
// order mu in [-1/2, 1/2], complex continued fraction CF2 for (J'+iY')/(J+iY),
// normalized by the Wronskian. Valid for x >= 2.
inline double bessel_j_steed(double nu, double x) {
    constexpr int max_iter = 100000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const int nl = std::max(0, static_cast<int>(nu - x + 1.5));
    const double mu = nu - nl;
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    const double w = xi2 / std::numbers::pi;

    int isign = 1;
    double h = std::max(nu * xi, tiny);
    double b = xi2 * nu, d = 0.0, c = h;
    int it = 0;
    for (; it < max_iter; ++it) {
        b += xi2;
        d = b - d;
        if (std::abs(d) < tiny) d = tiny;
        c = b - 1.0 / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = c * d;
        h *= del;
        if (d < 0.0) isign = -isign;
        if (std::abs(del - 1.0) < eps) break;
    }
    if (it == max_iter) throw RangeError("Bessel CF1 failed to converge at x = " + std::to_string(x));

    double jl = isign * 1e-30;
    double jpl = h * jl;
    const double jl1 = jl;
    double fact = nu * xi;
    for (int l = nl - 1; l >= 0; --l) {
        const double t = fact * jl + jpl;
        fact -= xi;
        jpl = fact * t - jl;
        jl = t;
    }
    if (jl == 0.0) jl = eps;
    const double f = jpl / jl;

    double a = 0.25 - mu * mu;
    double p = -0.5 * xi, q = 1.0;
    const double br = 2.0 * x;
    double bi = 2.0;
    fact = a * xi / (p * p + q * q);
    double cr = br + q * fact, ci = bi + p * fact;
    double den = br * br + bi * bi;
    double dr = br / den, di = -bi / den;
    double dlr = cr * dr - ci * di, dli = cr * di + ci * dr;
    double t = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = t;
    for (it = 1; it < max_iter; ++it) {
        a += 2 * it;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if (std::abs(dr) + std::abs(di) < tiny) dr = tiny;
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if (std::abs(cr) + std::abs(ci) < tiny) cr = tiny;
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        t = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = t;
        if (std::abs(dlr - 1.0) + std::abs(dli) < eps) break;
    }
    if (it == max_iter) throw RangeError("Bessel CF2 failed to converge at x = " + std::to_string(x));
    const double gam = (p - f) / q;
    const double jmu = std::copysign(std::sqrt(w / ((p - f) * gam + q)), jl);
    return jl1 * (jmu / jl);
}

}  // namespace detail

/// Bessel function of the first kind J_nu(x), nu >= 0, 0 <= x <= 1000.
inline double bessel_j(double nu, double x) {
    if (!(nu >= 0.0) || !(x >= 0.0)) throw DomainError("bessel_j needs nu >= 0 and x >= 0");
    if (x > detail::kBesselMaxArg || nu > detail::kBesselMaxArg)
        throw RangeError("bessel_j argument outside the supported range");
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (x <= std::max(12.0, 2.0 * nu)) {
        double v = 0.0;
        if (detail::bessel_j_series(nu, x, v) || x < 2.0) return v;
    }
    return detail::bessel_j_steed(nu, x);
}

/// J'_nu(x) = (nu / x) J_nu(x) - J_{nu+1}(x).
inline double bessel_j_derivative(double nu, double x) {
    if (!(x > 0.0)) {
        if (x == 0.0) return nu == 1.0 ? 0.5 : (nu == 0.0 || nu > 1.0 ? 0.0 : std::numeric_limits<double>::infinity());
        throw DomainError("bessel_j_derivative needs x >= 0");
    }
    return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

/// d/dx [x^(1-nu) J_{nu+ell-1}(x)].
inline double ultraspherical_deriv(double nu, int ell, double x) {
    if (!(x > 0.0)) throw DomainError("ultraspherical_deriv needs x > 0");
    if (ell < 0) throw DomainError("ultraspherical_deriv needs ell >= 0");
    const double order = nu + ell - 1.0;
    if (order < 0.0) {
        // ell = 0 with nu < 1: d/dx [x^(1-nu) J_{nu-1}] = -x^(1-nu) J_nu.
        return -std::pow(x, 1.0 - nu) * bessel_j(nu, x);
    }
    return (1.0 - nu) * std::pow(x, -nu) * bessel_j(order, x) + std::pow(x, 1.0 - nu) * bessel_j_derivative(order, x);
}

/// A certified zero: the function changes sign strictly across [lo, hi].
struct BesselZeroRecord {
    double nu = 0.0;
    int ell = 0;
    int k = 0;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail {

constexpr double kZeroRelTol = 1e-10;

template <class F>
BesselZeroRecord bisect(F&& f, double lo, double hi, double flo, double fhi) {
    if (!(flo * fhi < 0.0)) throw SearchError("no sign change over bracket", lo, hi);
    while (hi - lo > 0.5 * kZeroRelTol * lo) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) {
            lo = std::nextafter(mid, 0.0);
            hi = std::nextafter(mid, 2.0 * mid);
            if (!(f(lo) * f(hi) < 0.0)) throw SearchError("exact zero without a certifiable sign change", lo, hi);
            break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    BesselZeroRecord r;
    r.lo = lo;
    r.hi = hi;
    r.value = 0.5 * (lo + hi);
    return r;
}

}  // namespace detail

/// k-th positive zero of J_nu. Scans upward from x = nu (below the first zero)
/// for sign changes, then bisects.
inline BesselZeroRecord bessel_zero_j(double nu, int k) {
    if (!(nu >= 0.0)) throw DomainError("bessel_zero_j needs nu >= 0");
    if (k < 1) throw DomainError("zero index k must be >= 1");
    auto f = [nu](double x) { return bessel_j(nu, x); };
    // Consecutive zeros are more than 2.9 apart for every nu >= 0.
    const double step = 0.25;
    double a = nu;
    double fa = f(a);
    int found = 0;
    const double limit = detail::kBesselMaxArg - step;
    while (a < limit) {
        const double b = a + step;
        const double fb = f(b);
        if (fa == 0.0 && a > 0.0) throw SearchError("scan landed on a zero", a, b);
        if (fa * fb < 0.0 && ++found == k) {
            BesselZeroRecord r = detail::bisect(f, a, b, fa, fb);
            r.nu = nu;
            r.ell = 0;
            r.k = k;
            return r;
        }
        a = b;
        fa = fb;
    }
    throw SearchError("bracket scan exhausted the supported range", nu, limit);
}

/// k-th positive zero p_{nu,k}^(ell) of d/dx [x^(1-nu) J_{nu+ell-1}(x)].
inline BesselZeroRecord bessel_zero_p(double nu, int ell, int k) {
    if (!(nu > 0.0)) throw DomainError("bessel_zero_p needs nu > 0");
    if (ell < 0 || k < 1) throw DomainError("bessel_zero_p needs ell >= 0 and k >= 1");
    if (ell == 0) return bessel_zero_j(nu, k);
    auto f = [nu, ell](double x) { return ultraspherical_deriv(nu, ell, x); };
    double lo = 0.0, hi = 0.0;
    if (k == 1) {
        // Lorch-Szego enclosure of the first zero.
        const double l = ell;
        lo = std::sqrt(2.0 * l * (nu + l) * (nu + l + 1.0) / (nu + 2.0 * l + 1.0));
        hi = std::sqrt(2.0 * l * (nu + l));
    } else {
        // Zeros interlace with those of J_{nu+ell-1}.
        const double order = nu + ell - 1.0;
        lo = bessel_zero_j(order, k - 1).value;
        hi = bessel_zero_j(order, k).value;
    }
    BesselZeroRecord r;
    try {
        r = detail::bisect(f, lo, hi, f(lo), f(hi));
    } catch (const SearchError&) {
        throw SearchError("no sign change of the ultraspherical derivative over [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]",
                          lo, hi);
    }
    r.nu = nu;
    r.ell = ell;
    r.k = k;
    return r;
}

struct Table1Row {
    int n = 0;
    std::array<double, 3> p{};  // p_{n/2,1}^(ell) for ell = 1, 2, 3
    double j = 0.0;             // j_{n/2-1,1}
};

/// First zeros of the ultraspherical derivatives against j_{n/2-1,1}, n = 2..7.
inline std::vector<Table1Row> table1() {
    std::vector<Table1Row> rows;
    for (int n = 2; n <= 7; ++n) {
        Table1Row r;
        r.n = n;
        for (int ell = 1; ell <= 3; ++ell) r.p[static_cast<std::size_t>(ell - 1)] = bessel_zero_p(n / 2.0, ell, 1).value;
        r.j = bessel_zero_j(n / 2.0 - 1.0, 1).value;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace isospec
