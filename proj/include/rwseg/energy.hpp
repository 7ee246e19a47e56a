#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rwseg/core.hpp"
#include "rwseg/graph.hpp"

namespace rwseg {

/// Reference-segmentation prior ||y - y_ref||^2 weighted by a per-voxel
/// diagonal. The weight applies identically to every label plane; per-label
/// weights would break the unit-sum property of the unconstrained minimizer.
struct PriorTerm {
    SoftSeg y_ref;
    std::vector<double> omega;  // one nonnegative weight per voxel
};

inline void check_prior(const PriorTerm& p) {
    if (auto issue = validate_soft(p.y_ref)) throw InvalidArgument("prior reference: " + issue->str());
    if (p.omega.size() != p.y_ref.voxels()) throw DimMismatch("prior omega length does not match voxel count");
    for (double w : p.omega)
        if (w < 0.0 || !std::isfinite(w)) throw InvalidArgument("prior omega entries must be nonnegative");
}

/// Everything needed to evaluate the energy of one sample: the volume, its
/// Laplacian family and prior terms.
struct SampleModel {
    Volume x;
    int num_labels = 0;
    std::vector<Laplacian> laplacians;
    std::vector<PriorTerm> priors;

    std::size_t voxels() const { return x.dims.size(); }
};

struct FeatureVector {
    std::vector<double> phi_alpha;
    std::vector<double> phi_beta;

    std::size_t size() const { return phi_alpha.size() + phi_beta.size(); }
};

inline double prior_energy(const SoftSeg& y, const PriorTerm& p) {
    if (y.dims != p.y_ref.dims || y.num_labels != p.y_ref.num_labels)
        throw DimMismatch("prior_energy: segmentation does not match reference");
    const std::size_t n = y.voxels();
    double total = 0.0;
    for (int s = 0; s < y.num_labels; ++s) {
        const double* ys = y.label_plane(s);
        const double* rs = p.y_ref.label_plane(s);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ys[i] - rs[i];
            acc += p.omega[i] * d * d;
        }
        total += acc;
    }
    return total;
}

/// Joint feature vector: per-term energies, so that dot(w, psi) is the total
/// energy exactly.
inline FeatureVector feature_vector(const SampleModel& m, const SoftSeg& y) {
    if (y.dims != m.x.dims || y.num_labels != m.num_labels)
        throw DimMismatch("feature_vector: segmentation does not match model");
    FeatureVector psi;
    psi.phi_alpha.reserve(m.laplacians.size());
    psi.phi_beta.reserve(m.priors.size());
    for (const auto& L : m.laplacians) psi.phi_alpha.push_back(laplacian_quadform(L, y));
    for (const auto& p : m.priors) psi.phi_beta.push_back(prior_energy(y, p));
    return psi;
}

inline double total_energy(const Params& w, const FeatureVector& psi) {
    if (w.alpha.size() != psi.phi_alpha.size() || w.beta.size() != psi.phi_beta.size())
        throw DimMismatch("total_energy: weight/feature length mismatch");
    double e = 0.0;
    for (std::size_t a = 0; a < w.alpha.size(); ++a) e += w.alpha[a] * psi.phi_alpha[a];
    for (std::size_t b = 0; b < w.beta.size(); ++b) e += w.beta[b] * psi.phi_beta[b];
    return e;
}

/// Fraction of voxels whose hardened label disagrees with the annotation.
inline double loss(const HardSeg& z, const SoftSeg& y) {
    if (z.dims != y.dims) throw DimMismatch("loss: dims " + z.dims.str() + " vs " + y.dims.str());
    const HardSeg h = harden(y);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < z.labels.size(); ++i) correct += (h.labels[i] == z.labels[i]);
    return 1.0 - double(correct) / double(z.labels.size());
}

/// Same count with argmax ties resolved toward the annotation; compatible
/// segmentations score exactly zero under this variant.
inline double loss_toward(const HardSeg& z, const SoftSeg& y) {
    if (z.dims != y.dims) throw DimMismatch("loss_toward: dims mismatch");
    const HardSeg h = harden_toward(y, z);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < z.labels.size(); ++i) correct += (h.labels[i] == z.labels[i]);
    return 1.0 - double(correct) / double(z.labels.size());
}

}  // namespace rwseg
