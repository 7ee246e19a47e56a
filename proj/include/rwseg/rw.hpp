#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "rwseg/core.hpp"
#include "rwseg/energy.hpp"
#include "rwseg/sparse.hpp"

namespace rwseg {

enum class SolverMethod { ConjugateGradient, Direct };

struct SolverOpts {
    double tol = 1e-8;           // relative residual per label system
    std::size_t max_iter = 0;    // 0 means 10*n
    SolverMethod method = SolverMethod::ConjugateGradient;
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

// Sufficient positive-definiteness condition for the combined system: every
// connected component of the active graph must carry prior weight somewhere.
// Components are taken over the union of edges of Laplacians with w_alpha > 0
// (all their edge weights are >= epsilon_w, hence positive).
inline void check_positive_definite(const SampleModel& m, const Params& w) {
    if (w.alpha.size() != m.laplacians.size() || w.beta.size() != m.priors.size())
        throw DimMismatch("weights do not match model term counts");
    check_params(w);
    const std::size_t n = m.voxels();
    UnionFind uf(n);
    for (std::size_t a = 0; a < m.laplacians.size(); ++a) {
        if (w.alpha[a] <= 0.0) continue;
        for (const Edge& e : m.laplacians[a].edges) uf.unite(e.i, e.j);
    }
    std::vector<double> prior_diag(n, 0.0);
    for (std::size_t b = 0; b < m.priors.size(); ++b) {
        if (w.beta[b] <= 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) prior_diag[i] += w.beta[b] * m.priors[b].omega[i];
    }
    std::vector<char> covered(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (prior_diag[i] > 0.0) covered[uf.find(i)] = 1;
    for (std::size_t i = 0; i < n; ++i)
        if (!covered[uf.find(i)])
            throw SingularSystem("no prior weight reaches the component of voxel " + std::to_string(i) +
                                 "; the system matrix has a constant nullspace there");
}

// A = sum_a w_a L_a^b + sum_b w_b Omega_b, with an optional extra diagonal
// shift (used by the consensus solver).
inline SparseSym assemble_system(const SampleModel& m, const Params& w, double laplacian_scale,
                                 double prior_scale, double diag_shift) {
    const std::size_t n = m.voxels();
    SparseSymBuilder builder(n);
    for (std::size_t a = 0; a < m.laplacians.size(); ++a) {
        const double wa = laplacian_scale * w.alpha[a];
        if (wa <= 0.0) continue;
        const Laplacian& L = m.laplacians[a];
        for (std::size_t i = 0; i < n; ++i) builder.add_diag(i, wa * L.degree[i]);
        for (std::size_t e = 0; e < L.edges.size(); ++e)
            builder.add_offdiag(L.edges[e].i, L.edges[e].j, -wa * L.weight[e]);
    }
    for (std::size_t b = 0; b < m.priors.size(); ++b) {
        const double wb = prior_scale * w.beta[b];
        if (wb <= 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) builder.add_diag(i, wb * m.priors[b].omega[i]);
    }
    if (diag_shift != 0.0)
        for (std::size_t i = 0; i < n; ++i) builder.add_diag(i, diag_shift);
    return builder.compress();
}

// rhs for label s: sum_b w_b Omega_b y_{b,s}, times prior_scale.
inline void assemble_rhs(const SampleModel& m, const Params& w, int s, double prior_scale,
                         std::vector<double>& rhs) {
    const std::size_t n = m.voxels();
    rhs.assign(n, 0.0);
    for (std::size_t b = 0; b < m.priors.size(); ++b) {
        const double wb = prior_scale * w.beta[b];
        if (wb <= 0.0) continue;
        const double* ref = m.priors[b].y_ref.label_plane(s);
        const auto& omega = m.priors[b].omega;
        for (std::size_t i = 0; i < n; ++i) rhs[i] += wb * omega[i] * ref[i];
    }
}

}  // namespace detail

/// Unconstrained inference: one SPD solve per label, A y_s = rhs_s. The result
/// sums to one per voxel up to solver residual; it is renormalized to an exact
/// simplex before returning.
inline SoftSeg rw_infer(const SampleModel& m, const Params& w, const SolverOpts& opts = {}) {
    detail::check_positive_definite(m, w);
    const std::size_t n = m.voxels();
    const SparseSym A = detail::assemble_system(m, w, 1.0, 1.0, 0.0);

    SoftSeg y;
    y.dims = m.x.dims;
    y.num_labels = m.num_labels;
    y.probs.assign(n * std::size_t(m.num_labels), 0.0);

    const std::size_t max_iter = opts.max_iter ? opts.max_iter : 10 * n;
    std::vector<double> rhs, sol(n, 0.0);
    if (opts.method == SolverMethod::Direct) {
        DenseCholesky chol(A);
        for (int s = 0; s < m.num_labels; ++s) {
            detail::assemble_rhs(m, w, s, 1.0, rhs);
            chol.solve(rhs, sol);
            std::copy(sol.begin(), sol.end(), y.label_plane(s));
        }
    } else {
        for (int s = 0; s < m.num_labels; ++s) {
            detail::assemble_rhs(m, w, s, 1.0, rhs);
            std::fill(sol.begin(), sol.end(), 0.0);
            const CgResult r = cg_solve(A, rhs, sol, opts.tol, max_iter);
            if (!r.converged)
                throw NonConvergence("rw_infer: CG hit the iteration cap on label " + std::to_string(s) +
                                     " (residual " + std::to_string(r.residual) + ")");
            std::copy(sol.begin(), sol.end(), y.label_plane(s));
        }
    }
    renormalize_simplex(y);
    return y;
}

}  // namespace rwseg
