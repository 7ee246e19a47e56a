#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwseg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimMismatch : Error {
    using Error::Error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct NonConvergence : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct BadMagic : IoError {
    using IoError::IoError;
};
struct TruncatedFile : IoError {
    using IoError::IoError;
};
struct InvalidDims : IoError {
    using IoError::IoError;
};

// Tolerance for per-voxel simplex checks. Iterative solvers leave round-off
// residue, so exact sums are not required anywhere.
inline constexpr double kSimplexTol = 1e-8;

/// Lattice extents. Voxels are linearized x-fastest, then y, then z; this is
/// the one index mapping shared by every matrix and file format.
struct Dims {
    int nx = 0, ny = 0, nz = 0;

    std::size_t size() const {
        return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
    }
    std::size_t index(int x, int y, int z) const {
        return std::size_t(x) + std::size_t(nx) * (std::size_t(y) + std::size_t(ny) * std::size_t(z));
    }
    bool valid() const { return nx > 0 && ny > 0 && nz > 0; }
    bool operator==(const Dims&) const = default;

    std::string str() const {
        return "(" + std::to_string(nx) + "," + std::to_string(ny) + "," + std::to_string(nz) + ")";
    }
};

/// Scalar 3D intensity grid, arbitrary units.
struct Volume {
    Dims dims;
    std::vector<double> data;  // dims.size() values, x-fastest

    double at(int x, int y, int z) const { return data[dims.index(x, y, z)]; }
};

struct LabelSet {
    int count = 0;  // K >= 2
    std::vector<std::string> names;  // optional, K entries when present
};

/// One label per voxel, each in [0, K).
struct HardSeg {
    Dims dims;
    std::vector<int> labels;

    int at(int x, int y, int z) const { return labels[dims.index(x, y, z)]; }
};

/// Per-voxel probability distribution over K labels. Storage is label-major:
/// probs[s*n + i] so that each label plane is a contiguous vector.
struct SoftSeg {
    Dims dims;
    int num_labels = 0;
    std::vector<double> probs;

    std::size_t voxels() const { return dims.size(); }
    double at(std::size_t i, int s) const { return probs[std::size_t(s) * voxels() + i]; }
    double& at(std::size_t i, int s) { return probs[std::size_t(s) * voxels() + i]; }
    const double* label_plane(int s) const { return probs.data() + std::size_t(s) * voxels(); }
    double* label_plane(int s) { return probs.data() + std::size_t(s) * voxels(); }
};

/// Nonnegative term weights: one per Laplacian (alpha) and one per prior (beta).
struct Params {
    std::vector<double> alpha;
    std::vector<double> beta;

    std::size_t size() const { return alpha.size() + beta.size(); }
};

inline void check_params(const Params& w) {
    bool any_positive = false;
    for (double v : w.alpha) {
        if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("negative or non-finite alpha weight");
        any_positive |= v > 0.0;
    }
    for (double v : w.beta) {
        if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("negative or non-finite beta weight");
        any_positive |= v > 0.0;
    }
    if (!any_positive) throw InvalidArgument("all weights are zero");
}

inline SoftSeg make_uniform_soft(Dims dims, int num_labels) {
    SoftSeg y;
    y.dims = dims;
    y.num_labels = num_labels;
    y.probs.assign(dims.size() * std::size_t(num_labels), 1.0 / num_labels);
    return y;
}

inline SoftSeg one_hot(const HardSeg& z, int num_labels) {
    SoftSeg y;
    y.dims = z.dims;
    y.num_labels = num_labels;
    y.probs.assign(z.dims.size() * std::size_t(num_labels), 0.0);
    for (std::size_t i = 0; i < z.labels.size(); ++i) {
        if (z.labels[i] < 0 || z.labels[i] >= num_labels)
            throw InvalidArgument("hard segmentation label out of range at voxel " + std::to_string(i));
        y.at(i, z.labels[i]) = 1.0;
    }
    return y;
}

/// Underlying hard segmentation: per-voxel argmax, smallest label index on ties.
inline HardSeg harden(const SoftSeg& y) {
    HardSeg z;
    z.dims = y.dims;
    z.labels.resize(y.voxels());
    const std::size_t n = y.voxels();
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_p = y.at(i, 0);
        for (int s = 1; s < y.num_labels; ++s) {
            double p = y.at(i, s);
            if (p > best_p) {
                best_p = p;
                best = s;
            }
        }
        z.labels[i] = best;
    }
    return z;
}

/// Argmax with ties broken toward the reference label. Used at training time,
/// where a compatible segmentation must harden to the annotation exactly.
inline HardSeg harden_toward(const SoftSeg& y, const HardSeg& ref) {
    if (y.dims != ref.dims) throw DimMismatch("harden_toward: dims " + y.dims.str() + " vs " + ref.dims.str());
    HardSeg z;
    z.dims = y.dims;
    z.labels.resize(y.voxels());
    const std::size_t n = y.voxels();
    for (std::size_t i = 0; i < n; ++i) {
        const int r = ref.labels[i];
        double ref_p = y.at(i, r);
        int best = 0;
        double best_p = y.at(i, 0);
        for (int s = 1; s < y.num_labels; ++s) {
            double p = y.at(i, s);
            if (p > best_p) {
                best_p = p;
                best = s;
            }
        }
        z.labels[i] = (ref_p >= best_p) ? r : best;
    }
    return z;
}

struct SoftIssue {
    enum class Kind { Shape, Negativity, Normalization } kind;
    std::size_t voxel = 0;
    int label = -1;
    double value = 0.0;

    std::string str() const {
        switch (kind) {
            case Kind::Shape:
                return "shape: probs size does not match dims*K";
            case Kind::Negativity:
                return "negativity: y(" + std::to_string(voxel) + "," + std::to_string(label) +
                       ") = " + std::to_string(value);
            default:
                return "normalization: sum at voxel " + std::to_string(voxel) + " = " + std::to_string(value);
        }
    }
};

/// Checks the SoftSeg invariants; returns the first violation or nullopt.
/// Never throws: loaders and CLIs report the descriptor instead of aborting.
inline std::optional<SoftIssue> validate_soft(const SoftSeg& y, double tol = kSimplexTol) {
    if (!y.dims.valid() || y.num_labels < 2 || y.probs.size() != y.voxels() * std::size_t(y.num_labels))
        return SoftIssue{SoftIssue::Kind::Shape, 0, -1, 0.0};
    const std::size_t n = y.voxels();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int s = 0; s < y.num_labels; ++s) {
            double p = y.at(i, s);
            if (!(p >= -tol) || !std::isfinite(p))
                return SoftIssue{SoftIssue::Kind::Negativity, i, s, p};
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            return SoftIssue{SoftIssue::Kind::Normalization, i, -1, sum};
    }
    return std::nullopt;
}

/// Clamp negatives and rescale each voxel to an exact unit sum.
inline void renormalize_simplex(SoftSeg& y) {
    const std::size_t n = y.voxels();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int s = 0; s < y.num_labels; ++s) {
            double& p = y.at(i, s);
            if (p < 0.0) p = 0.0;
            sum += p;
        }
        if (sum > 0.0) {
            for (int s = 0; s < y.num_labels; ++s) y.at(i, s) /= sum;
        } else {
            for (int s = 0; s < y.num_labels; ++s) y.at(i, s) = 1.0 / y.num_labels;
        }
    }
}

}  // namespace rwseg
