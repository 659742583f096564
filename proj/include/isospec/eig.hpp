#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "isospec/error.hpp"
#include "isospec/fem.hpp"
#include "isospec/rng.hpp"

namespace isospec {

/// Generalized eigenvalues of (K, M) strictly below `shift`, counted through
/// the inertia of K - shift * M.
struct InertiaResult {
    std::size_t n_below = 0;
    double shift = 0.0;
    double pivot_min_abs = 0.0;
};

struct EigenOptions {
    double residual_tol = 1e-9;     // relative residual target (contract is 1e-8)
    int max_iterations = 2000;
    // |pivot| below zero_pivot_rel * max|A_ij| * max(1, n/100) is a zero pivot;
    // factorization round-off grows roughly linearly in n.
    double zero_pivot_rel = 1e-14;
    int dense_threshold = 500;      // inertia via dense Bunch-Kaufman at or below this size
};

struct Eigenpairs {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // columns, M-orthonormal
    std::vector<double> residuals;
    int iterations = 0;
};

namespace detail {

inline double max_abs_entry(const SparseMatrix& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

struct DenseInertia {
    std::size_t negative = 0;
    std::size_t zero = 0;
    std::size_t positive = 0;
    double pivot_min_abs = std::numeric_limits<double>::infinity();
};

/// Inertia of a dense symmetric matrix by Bunch-Kaufman diagonal pivoting with
/// 1x1 and 2x2 blocks. Only the block-diagonal factor is kept. `a` is consumed.
inline DenseInertia bunch_kaufman_inertia(Eigen::MatrixXd a, double zero_tol) {
    const Eigen::Index n = a.rows();
    const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
    DenseInertia out;
    auto swap_sym = [&](Eigen::Index i, Eigen::Index j) {
        if (i == j) return;
        a.row(i).swap(a.row(j));
        a.col(i).swap(a.col(j));
    };
    Eigen::Index k = 0;
    while (k < n) {
        const double absakk = std::abs(a(k, k));
        Eigen::Index imax = k;
        double colmax = 0.0;
        for (Eigen::Index i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > colmax) {
                colmax = std::abs(a(i, k));
                imax = i;
            }
        int kstep = 1;
        Eigen::Index kp = k;
        if (std::max(absakk, colmax) <= zero_tol) {
            out.zero += 1;
            out.pivot_min_abs = std::min(out.pivot_min_abs, absakk);
            k += 1;
            continue;
        }
        if (absakk < alpha * colmax) {
            double rowmax = 0.0;
            for (Eigen::Index j = k; j < n; ++j)
                if (j != imax) rowmax = std::max(rowmax, std::abs(a(imax, j)));
            if (absakk >= alpha * colmax * (colmax / rowmax)) {
                kp = k;
            } else if (std::abs(a(imax, imax)) >= alpha * rowmax) {
                kp = imax;
            } else {
                kp = imax;
                kstep = 2;
            }
        }
        const Eigen::Index kk = k + kstep - 1;
        swap_sym(kk, kp);
        const Eigen::Index rest = n - k - kstep;
        if (kstep == 1) {
            const double d = a(k, k);
            out.pivot_min_abs = std::min(out.pivot_min_abs, std::abs(d));
            if (std::abs(d) <= zero_tol) {
                out.zero += 1;
            } else {
                (d < 0 ? out.negative : out.positive) += 1;
                if (rest > 0) {
                    const Eigen::VectorXd l = a.col(k).tail(rest);
                    a.bottomRightCorner(rest, rest).noalias() -= (l / d) * l.transpose();
                }
            }
        } else {
            const double d11 = a(k, k), d21 = a(k + 1, k), d22 = a(k + 1, k + 1);
            const double det = d11 * d22 - d21 * d21;
            // eigenvalues of the 2x2 block
            const double mean = 0.5 * (d11 + d22);
            const double rad = std::hypot(0.5 * (d11 - d22), d21);
            out.pivot_min_abs = std::min({out.pivot_min_abs, std::abs(mean - rad), std::abs(mean + rad)});
            if (det < 0) {
                out.negative += 1;
                out.positive += 1;
            } else if (mean < 0) {
                out.negative += 2;
            } else {
                out.positive += 2;
            }
            if (rest > 0) {
                Eigen::Matrix2d dinv;
                dinv << d22, -d21, -d21, d11;
                dinv /= det;
                const Eigen::MatrixXd l = a.block(k + 2, k, rest, 2);
                a.bottomRightCorner(rest, rest).noalias() -= l * dinv * l.transpose();
            }
        }
        k += kstep;
    }
    return out;
}

inline double zero_pivot_tol(const EigenOptions& opts, double scale, int n) {
    return opts.zero_pivot_rel * scale * std::max(1.0, n / 100.0);
}

inline SparseMatrix shifted(const OperatorPair& pair, double shift) {
    SparseMatrix a = pair.K - shift * pair.M;
    a.makeCompressed();
    return a;
}

using SparseLdlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

}  // namespace detail

/// Factorization of K - shift * M reused for inertia and shift-invert solves.
class ShiftedOperator {
public:
    ShiftedOperator(const OperatorPair& pair, double shift, const EigenOptions& opts = {})
        : pair_(&pair), shift_(shift), solver_(std::make_unique<detail::SparseLdlt>()) {
        const SparseMatrix a = detail::shifted(pair, shift);
        scale_ = detail::max_abs_entry(a);
        solver_->compute(a);
        const Eigen::VectorXd d = solver_->vectorD();
        if (solver_->info() != Eigen::Success || d.size() != pair.n_dof || !d.allFinite())
            throw ShiftOnEigenvalue("LDL^T factorization broke down at shift " + std::to_string(shift), shift);
        pivot_min_abs_ = d.size() ? d.cwiseAbs().minCoeff() : 0.0;
        if (pivot_min_abs_ <= detail::zero_pivot_tol(opts, scale_, pair.n_dof))
            throw ShiftOnEigenvalue("zero pivot in LDL^T of K - shift*M (shift " + std::to_string(shift) + ")", shift);
        negatives_ = static_cast<std::size_t>((d.array() < 0.0).count());
    }

    double shift() const noexcept { return shift_; }
    std::size_t negative_pivots() const noexcept { return negatives_; }
    double pivot_min_abs() const noexcept { return pivot_min_abs_; }
    const OperatorPair& pair() const noexcept { return *pair_; }

    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return solver_->solve(rhs); }

private:
    const OperatorPair* pair_;
    double shift_;
    double scale_ = 0.0;
    double pivot_min_abs_ = 0.0;
    std::size_t negatives_ = 0;
    std::unique_ptr<detail::SparseLdlt> solver_;
};

/// Number of generalized eigenvalues strictly below tau (Sylvester inertia of
/// K - tau M). Small systems use dense Bunch-Kaufman; larger ones a
/// fill-reducing sparse LDL^T. Throws ShiftOnEigenvalue on a zero pivot.
inline InertiaResult count_leq(const OperatorPair& pair, double tau, const EigenOptions& opts = {}) {
    InertiaResult r;
    r.shift = tau;
    if (pair.n_dof <= opts.dense_threshold) {
        const Eigen::MatrixXd a = Eigen::MatrixXd(pair.K) - tau * Eigen::MatrixXd(pair.M);
        const double scale = a.cwiseAbs().maxCoeff();
        const detail::DenseInertia in = detail::bunch_kaufman_inertia(a, detail::zero_pivot_tol(opts, scale, pair.n_dof));
        if (in.zero > 0)
            throw ShiftOnEigenvalue("zero pivot in Bunch-Kaufman factorization at shift " + std::to_string(tau), tau);
        r.n_below = in.negative;
        r.pivot_min_abs = in.pivot_min_abs;
        return r;
    }
    const ShiftedOperator op(pair, tau, opts);
    r.n_below = op.negative_pivots();
    r.pivot_min_abs = op.pivot_min_abs();
    return r;
}

namespace detail {

inline Eigen::MatrixXd start_block(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.uniform() - 0.5;
    // The first column is constant-ish so the lowest mode starts well resolved.
    x.col(0).array() += 1.0;
    return x;
}

inline Eigenpairs dense_eigenpairs(const OperatorPair& pair) {
    const Eigen::MatrixXd k(pair.K);
    const Eigen::MatrixXd m(pair.M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
    if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed");
    Eigenpairs out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    out.vectors = es.eigenvectors();
    for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
        const Eigen::VectorXd x = out.vectors.col(j);
        const Eigen::VectorXd mx = m * x;
        const double lam = out.values[static_cast<std::size_t>(j)];
        const double denom = std::max(std::abs(lam), 1e-300) * mx.norm();
        out.residuals.push_back((k * x - lam * mx).norm() / denom);
    }
    return out;
}

enum class Target { Smallest, Nearest };

// Shift-invert block subspace iteration with Rayleigh-Ritz on (K, M).
// Returns the `nev` Ritz pairs closest to the shift (or smallest, when the
// shift lies below the spectrum).
inline Eigenpairs subspace_iteration(const ShiftedOperator& op, int nev, int block, const EigenOptions& opts,
                                     double residual_floor) {
    const OperatorPair& pair = op.pair();
    const Eigen::Index n = pair.n_dof;
    const Eigen::Index p = std::min<Eigen::Index>(block, n);
    Eigen::MatrixXd x = start_block(n, p, 0x5eed1234ULL + static_cast<std::uint64_t>(n));
    const SparseMatrix abs_k = pair.K.cwiseAbs();
    Eigenpairs out;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::MatrixXd y = op.solve(pair.M * x);
        if (!y.allFinite()) throw SolverError("shift-invert solve produced non-finite values");
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
        const Eigen::MatrixXd kq = pair.K * q;
        const Eigen::MatrixXd mq = pair.M * q;
        Eigen::MatrixXd kr = q.transpose() * kq;
        Eigen::MatrixXd mr = q.transpose() * mq;
        kr = 0.5 * (kr + kr.transpose()).eval();
        mr = 0.5 * (mr + mr.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kr, mr);
        if (es.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed");
        std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
        std::iota(order.begin(), order.end(), 0);
        const double shift = op.shift();
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return std::abs(es.eigenvalues()(a) - shift) < std::abs(es.eigenvalues()(b) - shift);
        });
        Eigen::MatrixXd z(p, p);
        for (Eigen::Index j = 0; j < p; ++j) z.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
        x = q * z;
        const Eigen::MatrixXd kx = kq * z;
        const Eigen::MatrixXd mx = mq * z;
        out.values.clear();
        out.residuals.clear();
        bool converged = true;
        for (int j = 0; j < nev; ++j) {
            const double lam = es.eigenvalues()(order[static_cast<std::size_t>(j)]);
            const double denom = std::max(std::abs(lam), residual_floor) * mx.col(j).norm();
            const double res = (kx.col(j) - lam * mx.col(j)).norm() / denom;
            out.values.push_back(lam);
            out.residuals.push_back(res);
            // Kernel modes bottom out at the round-off of forming K x itself.
            const double floor = 100.0 * std::numeric_limits<double>::epsilon() *
                                 (abs_k * x.col(j).cwiseAbs()).norm() / denom;
            if (!(res <= std::max(opts.residual_tol, floor))) converged = false;
        }
        if (converged) {
            out.vectors = x.leftCols(nev);
            out.iterations = it;
            return out;
        }
    }
    double worst = 0.0;
    for (double r : out.residuals) worst = std::max(worst, r);
    throw SolverError("subspace iteration did not converge in " + std::to_string(opts.max_iterations) +
                      " iterations (worst relative residual " + std::to_string(worst) + ")");
}

inline double diag_ratio(const OperatorPair& pair) {
    return pair.K.diagonal().cwiseAbs().mean() / pair.M.diagonal().cwiseAbs().mean();
}

}  // namespace detail

struct EigenValueResult {
    double value = 0.0;
    double residual = 0.0;
};

/// Smallest generalized eigenvalue of a Dirichlet pair.
inline EigenValueResult smallest_eigenvalue(const OperatorPair& pair, const EigenOptions& opts = {}) {
    if (pair.bc != BoundaryCondition::Dirichlet)
        throw ParameterError("smallest_eigenvalue expects a Dirichlet pair (K positive definite)");
    if (pair.n_dof <= 12) {
        const Eigenpairs d = detail::dense_eigenpairs(pair);
        return {d.values.front(), d.residuals.front()};
    }
    const ShiftedOperator op(pair, 0.0, opts);
    const Eigenpairs e = detail::subspace_iteration(op, 1, 6, opts, 0.0);
    return {e.values.front(), e.residuals.front()};
}

/// The `count` smallest generalized eigenvalues, ascending, via shift-invert
/// from a shift below the spectrum.
inline Eigenpairs smallest_eigenpairs(const OperatorPair& pair, int count, const EigenOptions& opts = {}) {
    if (count <= 0) return {};
    if (count > pair.n_dof) throw ParameterError("more eigenvalues requested than degrees of freedom");
    const int block = std::min(pair.n_dof, count + std::max(4, count / 2));
    if (pair.n_dof <= 2 * block) {
        Eigenpairs d = detail::dense_eigenpairs(pair);
        d.values.resize(static_cast<std::size_t>(count));
        d.residuals.resize(static_cast<std::size_t>(count));
        d.vectors = d.vectors.leftCols(count).eval();
        return d;
    }
    // Semi-definite K (Neumann) is shifted off its kernel.
    const double lift = 1e-3 * detail::diag_ratio(pair) / static_cast<double>(pair.n_dof);
    const double shift = pair.bc == BoundaryCondition::Dirichlet ? 0.0 : -lift;
    const ShiftedOperator op(pair, shift, opts);
    Eigenpairs e = detail::subspace_iteration(op, count, block, opts, lift);
    return e;
}

/// Every generalized eigenvalue strictly below tau (up to max_count), ascending.
inline std::vector<double> eigenvalues_below(const OperatorPair& pair, double tau, int max_count,
                                             const EigenOptions& opts = {}) {
    const InertiaResult in = count_leq(pair, tau, opts);
    const int want = static_cast<int>(std::min<std::size_t>(in.n_below, static_cast<std::size_t>(std::max(0, max_count))));
    if (want == 0) return {};
    return smallest_eigenpairs(pair, want, opts).values;
}

/// The `count` generalized eigenvalues nearest to the operator's shift,
/// ordered by distance from it.
inline Eigenpairs nearest_eigenpairs(const ShiftedOperator& op, int count, const EigenOptions& opts = {}) {
    const int n = op.pair().n_dof;
    if (count <= 0) return {};
    const int block = std::min(n, count + std::max(4, count / 2));
    if (n <= 2 * block) {
        Eigenpairs d = detail::dense_eigenpairs(op.pair());
        std::vector<std::size_t> order(d.values.size());
        std::iota(order.begin(), order.end(), 0);
        const double s = op.shift();
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(d.values[a] - s) < std::abs(d.values[b] - s); });
        Eigenpairs out;
        out.vectors.resize(n, count);
        for (int j = 0; j < count; ++j) {
            out.values.push_back(d.values[order[static_cast<std::size_t>(j)]]);
            out.residuals.push_back(d.residuals[order[static_cast<std::size_t>(j)]]);
            out.vectors.col(j) = d.vectors.col(static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));
        }
        return out;
    }
    const double floor = std::max(std::abs(op.shift()), 1e-300);
    return detail::subspace_iteration(op, count, block, opts, floor);
}

/// Full dense generalized spectrum, ascending. Test oracle for small systems.
inline std::vector<double> dense_spectrum(const OperatorPair& pair) {
    return detail::dense_eigenpairs(pair).values;
}

}  // namespace isospec
