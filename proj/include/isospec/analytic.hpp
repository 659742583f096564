#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "isospec/error.hpp"
#include "isospec/specfun.hpp"

namespace isospec {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses a plain decimal ("12", "1.5", "2.5e-3") into an exact rational.
inline Rational parse_decimal(const std::string& text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    bool negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
    BigInt digits = 0;
    long scale = 0;
    bool any = false, dot = false;
    for (; i < n; ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = digits * 10 + (c - '0');
            if (dot) --scale;
            any = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!any) throw ParameterError("not a decimal number: '" + text + "'");
    if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < n && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
        long e = 0;
        bool edigits = false;
        for (; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            e = e * 10 + (text[i] - '0');
            edigits = true;
            if (e > 4000) throw ParameterError("exponent out of range in '" + text + "'");
        }
        if (!edigits) throw ParameterError("not a decimal number: '" + text + "'");
        scale += eneg ? -e : e;
    }
    if (i != n) throw ParameterError("not a decimal number: '" + text + "'");
    Rational r(digits);
    const BigInt p = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::abs(scale)));
    r = scale >= 0 ? r * Rational(p) : r / Rational(p);
    return negative ? Rational(-r) : r;
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::exp(0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0));
}

/// Box [0, l_1] x ... x [0, l_n] with exactly represented side lengths.
struct RectangleSpec {
    std::vector<Rational> lengths;

    static RectangleSpec from_strings(const std::vector<std::string>& text) {
        RectangleSpec s;
        for (const std::string& t : text) s.lengths.push_back(parse_decimal(t));
        s.check();
        return s;
    }
    static RectangleSpec from_doubles(const std::vector<double>& values) {
        RectangleSpec s;
        for (double v : values) {
            if (!std::isfinite(v)) throw ParameterError("rectangle side lengths must be finite");
            s.lengths.emplace_back(v);
        }
        s.check();
        return s;
    }

    int dim() const { return static_cast<int>(lengths.size()); }
    std::vector<double> values() const {
        std::vector<double> out;
        for (const Rational& r : lengths) out.push_back(static_cast<double>(r));
        return out;
    }
    double rho() const {
        double s = 0.0;
        for (double l : values()) s += 1.0 / (l * l);
        return std::sqrt(s);
    }
    /// Semi-axes a_i = l_i * rho of the counting ellipsoid.
    std::vector<double> axes() const {
        const double r = rho();
        std::vector<double> a;
        for (double l : values()) a.push_back(l * r);
        return a;
    }

private:
    void check() const {
        if (lengths.empty()) throw ParameterError("a rectangle needs at least one side length");
        for (const Rational& r : lengths)
            if (r <= 0) throw ParameterError("rectangle side lengths must be positive");
    }
};

namespace detail {

constexpr double kLatticeLimit = 1e8;

class LatticeCounter {
public:
    explicit LatticeCounter(const RectangleSpec& spec) : n_(spec.dim()), m_(static_cast<std::size_t>(n_), 0) {
        // Clearing denominators turns sum m_i^2 / l_i^2 <= sum 1 / l_i^2 into
        // an integer inequality sum m_i^2 w_i <= W.
        BigInt common = 1;
        for (const Rational& l : spec.lengths) {
            const BigInt num = boost::multiprecision::numerator(l);
            common = common / boost::multiprecision::gcd(common, num * num) * (num * num);
        }
        total_ = 0;
        for (const Rational& l : spec.lengths) {
            const Rational q = Rational(common) / (l * l);
            weights_.push_back(boost::multiprecision::numerator(q));  // exact integer by construction
            qd_.push_back(1.0 / (static_cast<double>(l) * static_cast<double>(l)));
            total_ += weights_.back();
        }
        for (double q : qd_) rd_ += q;
    }

    std::uint64_t count() {
        count_ = 0;
        recurse(0, rd_);
        return count_;
    }

private:
    bool near(double a, double b) const { return std::abs(a - b) <= 1e-9 * rd_; }

    // Exact test of m_0..m_{i-1} (current) with m_i = k and the rest zero.
    bool fits(int i, long k) const {
        BigInt s = BigInt(k) * k * weights_[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) s += BigInt(m_[static_cast<std::size_t>(j)]) * m_[static_cast<std::size_t>(j)] * weights_[static_cast<std::size_t>(j)];
        return s <= total_;
    }

    void recurse(int i, double rem) {
        const double q = qd_[static_cast<std::size_t>(i)];
        if (i == n_ - 1) {
            long k = rem < 0.0 ? -1 : static_cast<long>(std::floor(std::sqrt(rem / q)));
            if (k >= 0 && near(static_cast<double>(k) * k * q, rem) && !fits(i, k)) --k;
            if (near(static_cast<double>(k + 1) * (k + 1) * q, rem) && fits(i, k + 1)) ++k;
            count_ += static_cast<std::uint64_t>(k + 1);
            return;
        }
        for (long k = 0;; ++k) {
            const double used = static_cast<double>(k) * k * q;
            if (used > rem && !(near(used, rem) && fits(i, k))) break;
            if (used <= rem && near(used, rem) && !fits(i, k)) break;
            m_[static_cast<std::size_t>(i)] = k;
            recurse(i + 1, rem - used);
        }
        m_[static_cast<std::size_t>(i)] = 0;
    }

    int n_;
    std::vector<long> m_;
    std::vector<BigInt> weights_;
    BigInt total_;
    std::vector<double> qd_;
    double rd_ = 0.0;
    std::uint64_t count_ = 0;
};

}  // namespace detail

/// #{m in N_0^n : sum m_i^2 / l_i^2 <= sum 1 / l_i^2}, decided exactly at the
/// ellipsoid boundary.
inline std::uint64_t rectangle_N_exact(const RectangleSpec& spec) {
    const int n = spec.dim();
    if (n > 8) throw ResourceError("lattice enumeration supports at most 8 dimensions");
    double bound = unit_ball_volume(n);
    for (double a : spec.axes()) bound *= a;
    if (bound > detail::kLatticeLimit)
        throw ResourceError("predicted lattice count " + std::to_string(bound) + " exceeds the enumeration bound");
    return detail::LatticeCounter(spec).count();
}

/// 3 + floor(sqrt(l^2 + 1)), with the floor decided exactly.
inline long rectangle_N_2d(const Rational& ell) {
    if (ell <= 0) throw ParameterError("rectangle side length must be positive");
    const Rational target = ell * ell + 1;
    long s = static_cast<long>(std::floor(std::sqrt(static_cast<double>(target))));
    while (Rational((s + 1) * (s + 1)) <= target) ++s;
    while (s > 0 && Rational(s * s) > target) --s;
    return 3 + s;
}

inline long rectangle_N_2d(double ell) {
    if (!std::isfinite(ell)) throw ParameterError("rectangle side length must be finite");
    return rectangle_N_2d(Rational(ell));
}

/// |dR|^n / |R|^(n-1) with |dR| = 2 sum_i prod_{j != i} l_j.
inline double rectangle_I(const RectangleSpec& spec) {
    const std::vector<double> l = spec.values();
    const int n = spec.dim();
    double volume = 1.0, boundary = 0.0;
    for (double v : l) volume *= v;
    for (int i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j < n; ++j)
            if (j != i) p *= l[static_cast<std::size_t>(j)];
        boundary += p;
    }
    boundary *= 2.0;
    return std::exp(n * std::log(boundary) - (n - 1) * std::log(volume));
}

struct SandwichResult {
    std::uint64_t N = 0;
    double I = 0.0;
    double volume_lower = 0.0;  // omega_n / 2^n * prod a_i
    double volume_upper = 0.0;  // omega_n * prod a_i
    double iso_lower = 0.0;     // omega_n / (4^n n^(n/2)) * I
    double iso_upper = 0.0;     // omega_n / 2^n * I
    double ratio_lower = 0.0;   // N / iso_lower
    double ratio_upper = 0.0;   // N / iso_upper
    bool lower_ok = false;
    bool upper_ok = false;
};

/// Checks the lattice count against the ellipsoid-volume and isoperimetric
/// lower and upper bounds.
inline SandwichResult rectangle_sandwich_check(const RectangleSpec& spec) {
    SandwichResult r;
    const int n = spec.dim();
    r.N = rectangle_N_exact(spec);
    r.I = rectangle_I(spec);
    const double w = unit_ball_volume(n);
    double prod = 1.0;
    for (double a : spec.axes()) prod *= a;
    r.volume_upper = w * prod;
    r.volume_lower = w * prod / std::pow(2.0, n);
    r.iso_upper = w / std::pow(2.0, n) * r.I;
    r.iso_lower = w / (std::pow(4.0, n) * std::pow(static_cast<double>(n), 0.5 * n)) * r.I;
    r.ratio_lower = static_cast<double>(r.N) / r.iso_lower;
    r.ratio_upper = static_cast<double>(r.N) / r.iso_upper;
    const auto N = static_cast<double>(r.N);
    r.lower_ok = r.volume_lower <= N && r.iso_lower <= N;
    r.upper_ok = N <= r.volume_upper && N <= r.iso_upper;
    return r;
}

// ---------------------------------------------------------------------------
// Unit ball

namespace detail {

inline void check_ball_dim(int n) {
    if (n < 2 || n > 64) throw ParameterError("ball dimension must lie in [2, 64]");
}

}  // namespace detail

/// j_{n/2-1,1}^2.
inline double ball_lambda1(int n) {
    detail::check_ball_dim(n);
    const double j = bessel_zero_j(0.5 * n - 1.0, 1).value;
    return j * j;
}

/// Dimension of the degree-ell spherical harmonics on S^(n-1).
inline BigInt ball_multiplicity(int n, int ell) {
    if (n < 2) throw ParameterError("ball dimension must be at least 2");
    if (ell < 0) throw ParameterError("degree must be non-negative");
    if (ell == 0) return 1;
    if (ell == 1) return n;
    auto binom = [](long top, long k) {
        if (k < 0 || k > top) return BigInt(0);
        BigInt r = 1;
        for (long i = 1; i <= k; ++i) r = r * (top - k + i) / i;
        return r;
    };
    return binom(n + ell - 1, n - 1) - binom(n + ell - 3, n - 1);
}

struct BallSpectrumEntry {
    int n = 0;
    int ell = 0;
    int k = 0;
    double mu = 0.0;  // (p_{n/2,k}^(ell))^2
    BigInt multiplicity;
};

struct BallCount {
    int n = 0;
    double lambda1 = 0.0;
    BigInt N;
    std::vector<BallSpectrumEntry> entries;  // positive Neumann eigenvalues <= lambda1
};

/// Neumann eigenvalues of the unit n-ball not exceeding its first Dirichlet
/// eigenvalue, with multiplicity. Degree 0 contributes only the constant mode,
/// since p_{n/2,k}^(0) = j_{n/2,k} > j_{n/2-1,1}.
inline BallCount ball_N(int n) {
    detail::check_ball_dim(n);
    const double nu = 0.5 * n;
    const BesselZeroRecord j = bessel_zero_j(nu - 1.0, 1);
    BallCount out;
    out.n = n;
    out.lambda1 = j.value * j.value;
    out.N = 1;
    for (int ell = 1;; ++ell) {
        const double l = ell;
        const double lower_sq = 2.0 * l * (nu + l) * (nu + l + 1.0) / (nu + 2.0 * l + 1.0);
        if (lower_sq > j.hi * j.hi) break;  // the enclosure's lower end increases with ell
        for (int k = 1;; ++k) {
            const BesselZeroRecord p = bessel_zero_p(nu, ell, k);
            if (p.lo > j.hi) break;
            if (!(p.hi < j.lo))
                throw SearchError("cannot separate p_{" + std::to_string(nu) + "," + std::to_string(k) + "}^(" +
                                      std::to_string(ell) + ") from j_{nu-1,1}",
                                  p.lo, p.hi);
            BallSpectrumEntry e;
            e.n = n;
            e.ell = ell;
            e.k = k;
            e.mu = p.value * p.value;
            e.multiplicity = ball_multiplicity(n, ell);
            out.N += e.multiplicity;
            out.entries.push_back(std::move(e));
        }
    }
    return out;
}

struct GrowthResult {
    int ell = 0;
    int cap = 64;
    std::optional<int> first_n;      // smallest n with N(B^n) >= n^ell
    std::optional<int> holds_from;   // smallest n0 with the bound for every n in [n0, cap]
};

/// Scans n = 2..cap for N(B^n) >= n^ell.
inline GrowthResult ball_growth_check(int ell, int cap = 64) {
    if (ell < 1) throw ParameterError("growth exponent must be >= 1");
    detail::check_ball_dim(cap);
    GrowthResult g;
    g.ell = ell;
    g.cap = cap;
    for (int n = 2; n <= cap; ++n) {
        const bool ok = ball_N(n).N >= boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(ell));
        if (ok && !g.first_n) g.first_n = n;
        if (ok && !g.holds_from) g.holds_from = n;
        if (!ok) g.holds_from.reset();
    }
    return g;
}

/// I(B^n) = n^n omega_n.
inline double ball_isoperimetric(int n) {
    if (n < 1 || n > 64) throw ParameterError("ball dimension must lie in [1, 64]");
    return std::exp(n * std::log(static_cast<double>(n)) + 0.5 * n * std::log(std::numbers::pi) -
                    std::lgamma(0.5 * n + 1.0));
}

}  // namespace isospec
