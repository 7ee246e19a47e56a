#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rwseg/core.hpp"

namespace rwseg {

/// Symmetric sparse matrix in CSR form (both triangles stored).
struct SparseSym {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // n+1
    std::vector<std::size_t> col;
    std::vector<double> val;

    void multiply(const double* x, double* out) const {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += val[k] * x[col[k]];
            out[i] = acc;
        }
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                if (col[k] == i) d[i] += val[k];
        return d;
    }
};

/// Builder that accumulates coordinate entries, then compresses. Duplicate
/// coordinates are summed.
class SparseSymBuilder {
public:
    explicit SparseSymBuilder(std::size_t n) : n_(n), diag_(n, 0.0) {}

    void add_diag(std::size_t i, double v) { diag_[i] += v; }

    // adds v at (i,j) and (j,i), i != j
    void add_offdiag(std::size_t i, std::size_t j, double v) { entries_.push_back({i, j, v}); }

    SparseSym compress() const {
        SparseSym m;
        m.n = n_;
        std::vector<std::size_t> count(n_, 1);  // diagonal always present
        for (const auto& e : entries_) {
            ++count[e.i];
            ++count[e.j];
        }
        m.row_ptr.resize(n_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i) m.row_ptr[i + 1] = m.row_ptr[i] + count[i];
        m.col.resize(m.row_ptr[n_]);
        m.val.assign(m.row_ptr[n_], 0.0);
        std::vector<std::size_t> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
        for (std::size_t i = 0; i < n_; ++i) {
            m.col[cursor[i]] = i;
            m.val[cursor[i]] = diag_[i];
            ++cursor[i];
        }
        for (const auto& e : entries_) {
            m.col[cursor[e.i]] = e.j;
            m.val[cursor[e.i]] = e.v;
            ++cursor[e.i];
            m.col[cursor[e.j]] = e.i;
            m.val[cursor[e.j]] = e.v;
            ++cursor[e.j];
        }
        return m;
    }

private:
    struct Entry {
        std::size_t i, j;
        double v;
    };
    std::size_t n_;
    std::vector<double> diag_;
    std::vector<Entry> entries_;
};

struct CgResult {
    std::size_t iterations = 0;
    double residual = 0.0;  // final ||b - Ax||
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for SPD systems. `x` doubles as
/// the initial guess, which the consensus solver exploits for warm starts.
/// Stops at ||b - Ax|| <= tol * max(||b||, 1e-30).
inline CgResult cg_solve(const SparseSym& A, const std::vector<double>& b, std::vector<double>& x,
                         double tol, std::size_t max_iter) {
    const std::size_t n = A.n;
    std::vector<double> r(n), z(n), p(n), Ap(n);
    std::vector<double> inv_diag = A.diagonal();
    for (double& d : inv_diag) d = (d > 0.0) ? 1.0 / d : 1.0;

    double norm_b = 0.0;
    for (double v : b) norm_b += v * v;
    norm_b = std::sqrt(norm_b);
    const double stop = tol * std::max(norm_b, 1e-30);

    A.multiply(x.data(), Ap.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];

    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);
    CgResult res;
    if (rnorm <= stop) {
        res.converged = true;
        res.residual = rnorm;
        return res;
    }

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

    for (std::size_t it = 1; it <= max_iter; ++it) {
        A.multiply(p.data(), Ap.data());
        double pAp = 0.0;
        for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) break;  // loss of positive definiteness
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        rnorm = 0.0;
        for (double v : r) rnorm += v * v;
        rnorm = std::sqrt(rnorm);
        res.iterations = it;
        if (rnorm <= stop) {
            res.converged = true;
            break;
        }
        double rz_next = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
            rz_next += r[i] * z[i];
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.residual = rnorm;
    return res;
}

/// Dense Cholesky (LL^T) for the `direct` solver option. Row-major packed
/// factor; intended for small systems only.
class DenseCholesky {
public:
    explicit DenseCholesky(const SparseSym& A) : n_(A.n), f_(A.n * A.n, 0.0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) f_[i * n_ + A.col[k]] += A.val[k];
        for (std::size_t j = 0; j < n_; ++j) {
            double d = f_[j * n_ + j];
            for (std::size_t k = 0; k < j; ++k) d -= f_[j * n_ + k] * f_[j * n_ + k];
            if (d <= 0.0) throw SingularSystem("dense factorization: matrix is not positive definite");
            d = std::sqrt(d);
            f_[j * n_ + j] = d;
            for (std::size_t i = j + 1; i < n_; ++i) {
                double v = f_[i * n_ + j];
                for (std::size_t k = 0; k < j; ++k) v -= f_[i * n_ + k] * f_[j * n_ + k];
                f_[i * n_ + j] = v / d;
            }
        }
    }

    void solve(const std::vector<double>& b, std::vector<double>& x) const {
        x = b;
        for (std::size_t i = 0; i < n_; ++i) {
            double v = x[i];
            for (std::size_t k = 0; k < i; ++k) v -= f_[i * n_ + k] * x[k];
            x[i] = v / f_[i * n_ + i];
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double v = x[ii];
            for (std::size_t k = ii + 1; k < n_; ++k) v -= f_[k * n_ + ii] * x[k];
            x[ii] = v / f_[ii * n_ + ii];
        }
    }

private:
    std::size_t n_;
    std::vector<double> f_;
};

}  // namespace rwseg
