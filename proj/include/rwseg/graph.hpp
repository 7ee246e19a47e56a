#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rwseg/core.hpp"

namespace rwseg {

struct Edge {
    std::uint32_t i, j;  // i < j
};

/// Lattice adjacency under 6- or 26-connectivity.
struct Neighborhood {
    Dims dims;
    int connectivity = 6;
    std::vector<Edge> edges;
};

inline Neighborhood build_neighborhood(Dims dims, int connectivity) {
    if (!dims.valid()) throw InvalidArgument("build_neighborhood: dims must be positive");
    if (connectivity != 6 && connectivity != 26)
        throw InvalidArgument("build_neighborhood: unsupported connectivity " + std::to_string(connectivity));
    Neighborhood nb;
    nb.dims = dims;
    nb.connectivity = connectivity;
    // Offsets with positive lexicographic direction (z, then y, then x) so each
    // undirected pair is generated once with i < j.
    std::vector<std::array<int, 3>> offsets;
    if (connectivity == 6) {
        offsets = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    } else {
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dz > 0 || (dz == 0 && dy > 0) || (dz == 0 && dy == 0 && dx > 0))
                        offsets.push_back({dx, dy, dz});
                }
    }
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x)
                for (const auto& o : offsets) {
                    const int X = x + o[0], Y = y + o[1], Z = z + o[2];
                    if (X < 0 || X >= dims.nx || Y < 0 || Y >= dims.ny || Z < 0 || Z >= dims.nz) continue;
                    const auto a = dims.index(x, y, z), b = dims.index(X, Y, Z);
                    nb.edges.push_back({std::uint32_t(std::min(a, b)), std::uint32_t(std::max(a, b))});
                }
    return nb;
}

enum class EdgeFeature { Intensity, GradientMagnitude };

inline std::string to_string(EdgeFeature f) {
    return f == EdgeFeature::Intensity ? "intensity" : "gradient-magnitude";
}

inline EdgeFeature edge_feature_from_string(const std::string& s) {
    if (s == "intensity") return EdgeFeature::Intensity;
    if (s == "gradient-magnitude") return EdgeFeature::GradientMagnitude;
    throw InvalidArgument("unknown edge feature '" + s + "'");
}

/// Recipe for one combinatorial Laplacian: Gaussian kernel on a per-voxel
/// feature, with a positive floor on edge weights.
struct LaplacianSpec {
    double beta_kernel = 10.0;
    EdgeFeature feature = EdgeFeature::Intensity;
    int connectivity = 6;
    double epsilon_w = 1e-6;
};

inline void check_spec(const LaplacianSpec& s) {
    if (!(s.beta_kernel > 0.0)) throw InvalidArgument("LaplacianSpec: beta_kernel must be positive");
    if (!(s.epsilon_w > 0.0)) throw InvalidArgument("LaplacianSpec: epsilon_w must be positive");
    if (s.connectivity != 6 && s.connectivity != 26)
        throw InvalidArgument("LaplacianSpec: unsupported connectivity");
}

/// One block of the label-replicated Laplacian, stored as the weighted edge
/// list plus the degree diagonal. All per-label blocks are identical, so a
/// single copy serves every label.
struct Laplacian {
    std::size_t n = 0;
    std::vector<Edge> edges;
    std::vector<double> weight;  // one per edge, > 0
    std::vector<double> degree;  // diagonal, degree[i] = sum of incident weights
};

namespace detail {

// Central differences, one-sided at borders; the divisor (x1 - x0) handles
// both cases.
inline std::vector<double> gradient_magnitude(const Volume& x) {
    const Dims d = x.dims;
    std::vector<double> g(d.size());
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int xx = 0; xx < d.nx; ++xx) {
                const int x0 = std::max(xx - 1, 0), x1 = std::min(xx + 1, d.nx - 1);
                const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, d.ny - 1);
                const int z0 = std::max(z - 1, 0), z1 = std::min(z + 1, d.nz - 1);
                double gx = (x1 > x0) ? (x.at(x1, y, z) - x.at(x0, y, z)) / (x1 - x0) : 0.0;
                double gy = (y1 > y0) ? (x.at(xx, y1, z) - x.at(xx, y0, z)) / (y1 - y0) : 0.0;
                double gz = (z1 > z0) ? (x.at(xx, y, z1) - x.at(xx, y, z0)) / (z1 - z0) : 0.0;
                g[d.index(xx, y, z)] = std::sqrt(gx * gx + gy * gy + gz * gz);
            }
    return g;
}

// Normalize to [0,1] over the volume; a constant field maps to all zeros,
// which makes every kernel weight exp(0) = 1.
inline void normalize_unit_range(std::vector<double>& f) {
    double lo = f.empty() ? 0.0 : f[0], hi = lo;
    for (double v : f) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    if (range <= 0.0) {
        std::fill(f.begin(), f.end(), 0.0);
        return;
    }
    for (double& v : f) v = (v - lo) / range;
}

}  // namespace detail

inline Laplacian build_laplacian(const Volume& x, const LaplacianSpec& spec) {
    check_spec(spec);
    if (!x.dims.valid() || x.data.size() != x.dims.size())
        throw InvalidArgument("build_laplacian: malformed volume");
    for (double v : x.data)
        if (!std::isfinite(v)) throw InvalidArgument("build_laplacian: non-finite intensity");

    std::vector<double> f =
        (spec.feature == EdgeFeature::Intensity) ? x.data : detail::gradient_magnitude(x);
    detail::normalize_unit_range(f);

    Neighborhood nb = build_neighborhood(x.dims, spec.connectivity);
    Laplacian L;
    L.n = x.dims.size();
    L.edges = std::move(nb.edges);
    L.weight.resize(L.edges.size());
    L.degree.assign(L.n, 0.0);
    for (std::size_t e = 0; e < L.edges.size(); ++e) {
        const double df = f[L.edges[e].i] - f[L.edges[e].j];
        const double w = std::max(std::exp(-spec.beta_kernel * df * df), spec.epsilon_w);
        L.weight[e] = w;
        L.degree[L.edges[e].i] += w;
        L.degree[L.edges[e].j] += w;
    }
    return L;
}

/// y^T L y summed over label planes: sum_s sum_(i,j) w_ij (y(i,s) - y(j,s))^2.
inline double laplacian_quadform(const Laplacian& L, const SoftSeg& y) {
    if (L.n != y.voxels()) throw DimMismatch("laplacian_quadform: voxel count mismatch");
    double total = 0.0;
    for (int s = 0; s < y.num_labels; ++s) {
        const double* ys = y.label_plane(s);
        double acc = 0.0;
        for (std::size_t e = 0; e < L.edges.size(); ++e) {
            const double d = ys[L.edges[e].i] - ys[L.edges[e].j];
            acc += L.weight[e] * d * d;
        }
        total += acc;
    }
    return total;
}

}  // namespace rwseg
