#pragma once

#include "webplate/jet.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace webplate {

inline constexpr int kDenseEigenLimit = 6000;

/// Square sparse matrix that is exactly symmetric (full storage).
class SparseSym {
public:
    SparseSym() = default;
    explicit SparseSym(Eigen::SparseMatrix<double> m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw Error("symmetric matrix must be square");
        m_.makeCompressed();
    }

    /// (M + M^T) / 2, which is bitwise symmetric.
    static SparseSym symmetrized(const Eigen::SparseMatrix<double>& m) {
        Eigen::SparseMatrix<double> t = m.transpose();
        Eigen::SparseMatrix<double> s = 0.5 * (m + t);
        return SparseSym(std::move(s));
    }
    static SparseSym from_dense(const Eigen::MatrixXd& d) { return symmetrized(d.sparseView()); }
    static SparseSym identity(int n) {
        Eigen::SparseMatrix<double> m(n, n);
        m.setIdentity();
        return SparseSym(std::move(m));
    }

    [[nodiscard]] int size() const { return static_cast<int>(m_.rows()); }
    [[nodiscard]] const Eigen::SparseMatrix<double>& matrix() const { return m_; }
    [[nodiscard]] Eigen::MatrixXd dense() const { return Eigen::MatrixXd(m_); }
    [[nodiscard]] double asymmetry() const {
        Eigen::SparseMatrix<double> t = m_.transpose();
        Eigen::SparseMatrix<double> d = m_ - t;
        double r = 0.0;
        for (int k = 0; k < d.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }
    [[nodiscard]] Eigen::VectorXd operator*(const Eigen::VectorXd& x) const { return m_ * x; }

private:
    Eigen::SparseMatrix<double> m_;
};

/// Sparse LDL^T factorization reused for many right-hand sides.
class Factorization {
public:
    explicit Factorization(const SparseSym& a) : a_(a) {
        // symmetric diagonal scaling; weighted bases are badly scaled but well conditioned after it
        const Eigen::VectorXd diag = a_.matrix().diagonal();
        scale_ = diag.unaryExpr([](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 1.0; });
        const Eigen::SparseMatrix<double> scaled = scale_.asDiagonal() * a_.matrix() * scale_.asDiagonal();
        ldlt_.compute(scaled);
        if (ldlt_.info() != Eigen::Success) {
            Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
            qr.setPivotThreshold(1e-12 * std::max(1.0, scaled.coeffs().cwiseAbs().maxCoeff()));
            qr.compute(scaled);
            const long k = std::max<long>(1, a_.size() - static_cast<long>(qr.rank()));
            throw Error("matrix numerically singular (estimated rank deficiency " + std::to_string(k) + ")");
        }
        const Eigen::VectorXd d = ldlt_.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        int deficient = 0;
        for (int i = 0; i < d.size(); ++i)
            if (!(std::abs(d[i]) > 1e-12 * dmax)) ++deficient;
        if (deficient > 0 || !(dmax > 0.0))
            throw Error("matrix numerically singular (estimated rank deficiency " +
                        std::to_string(std::max(deficient, 1)) + ")");
        positive_ = (d.array() > 0.0).all();
    }

    [[nodiscard]] int size() const { return a_.size(); }
    [[nodiscard]] bool positive_definite() const { return positive_; }

    /// Direct solve followed by iterative refinement.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        const double nb = b.norm();
        if (nb == 0.0) return Eigen::VectorXd::Zero(b.size());
        Eigen::VectorXd x = raw_solve(b);
        for (int it = 0; it < 3; ++it) {
            const Eigen::VectorXd r = b - a_.matrix() * x;
            if (r.norm() <= 1e-14 * nb) break;
            x += raw_solve(r);
        }
        return x;
    }

    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
        Eigen::MatrixXd x(b.rows(), b.cols());
        for (int c = 0; c < b.cols(); ++c) x.col(c) = solve(Eigen::VectorXd(b.col(c)));
        return x;
    }

    [[nodiscard]] double relative_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
        const double nb = b.norm();
        const double r = (b - a_.matrix() * x).norm();
        return nb == 0.0 ? r : r / nb;
    }

private:
    [[nodiscard]] Eigen::VectorXd raw_solve(const Eigen::VectorXd& b) const {
        return scale_.asDiagonal() * ldlt_.solve(Eigen::VectorXd(scale_.asDiagonal() * b));
    }

    SparseSym a_;
    Eigen::VectorXd scale_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool positive_ = false;
};

inline Factorization factorize(const SparseSym& a) { return Factorization(a); }

struct EigenPairs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns
};

namespace detail {

inline void check_dense_size(int n) {
    if (n > kDenseEigenLimit)
        throw Error("eigenproblem with " + std::to_string(n) + " unknowns exceeds the dense limit of " +
                    std::to_string(kDenseEigenLimit) + "; use finer-grained tooling or coarser grid");
}

}  // namespace detail

/// All pairs of A w = lambda M w with A SPD and M symmetric, sorted ascending by lambda.
/// Solved as M w = mu A w, lambda = 1/mu; pairs with mu = 0 are omitted.
inline EigenPairs gen_eig_symmetric(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
    const int n = static_cast<int>(A.rows());
    detail::check_dense_size(n);
    if (A.cols() != n || M.rows() != n || M.cols() != n) throw Error("eigenproblem dimension mismatch");
    Eigen::MatrixXd a = M, b = A;
    Eigen::VectorXd mu(n);
    const int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'U', n, a.data(), n, b.data(), n, mu.data());
    if (info > n) throw Error("eigensolver: matrix not positive definite");
    if (info != 0) throw Error("eigensolver failed to converge");
    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (mu[i] != 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return 1.0 / mu[x] < 1.0 / mu[y]; });
    EigenPairs out;
    out.values.resize(static_cast<int>(order.size()));
    out.vectors.resize(n, static_cast<int>(order.size()));
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.values[static_cast<int>(k)] = 1.0 / mu[order[k]];
        out.vectors.col(static_cast<int>(k)) = a.col(order[k]);
    }
    return out;
}

inline EigenPairs gen_eig_symmetric(const SparseSym& A, const SparseSym& M) { return gen_eig_symmetric(A.dense(), M.dense()); }

/// Largest `count` eigenvalues mu of G w = mu A w (A SPD), descending.
inline EigenPairs largest_generalized(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G, int count) {
    const int n = static_cast<int>(A.rows());
    detail::check_dense_size(n);
    count = std::clamp(count, 1, n);
    Eigen::MatrixXd g = G, a = A;
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, count);
    std::vector<lapack_int> ifail(n);
    lapack_int m = 0;
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    const int info = LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', n, g.data(), n, a.data(), n, 0.0, 0.0,
                                    n - count + 1, n, abstol, &m, w.data(), z.data(), n, ifail.data());
    if (info > n) throw Error("eigensolver: stiffness matrix not positive definite");
    if (info != 0) throw Error("eigensolver failed to converge");
    EigenPairs out;
    out.values.resize(m);
    out.vectors.resize(n, m);
    for (int k = 0; k < m; ++k) {
        out.values[k] = w[m - 1 - k];
        out.vectors.col(k) = z.col(m - 1 - k);
    }
    return out;
}

}  // namespace webplate
