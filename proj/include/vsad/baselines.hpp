#ifndef VSAD_BASELINES_HPP
#define VSAD_BASELINES_HPP

#include <string>
#include <vector>

#include "vsad/core.hpp"

namespace vsad {

struct KMeansCodebook {
    Eigen::Index k = 0;
    Eigen::Index d = 0;
    Matrix centers;  // K x D
    double inertia = 0.0;
    // Inertia evaluated at each Lloyd assignment step of the winning run.
    std::vector<double> inertia_trace;

    void check() const;
};

struct KMeansOptions {
    int max_iter = 100;
    int restarts = 3;
    std::uint64_t seed = 0;
};

// k-means++ seeding followed by Lloyd iterations. Inertia is non-increasing
// across the trace; empty clusters are re-seeded to the point farthest from
// its assigned center; the best of `restarts` runs is kept.
KMeansCodebook kmeans_fit(const DescriptorMatrix& desc, Eigen::Index k, const KMeansOptions& opts);

// Hard-assigns each patch to its nearest center (ties go to the lowest
// index) and concatenates per-center residual sums (length K*D), then applies
// the shared signed-sqrt + L2 normalization unless disabled.
EncodedVector vlad_encode(const DescriptorMatrix& desc, const KMeansCodebook& codebook,
                          bool normalize = true);

struct DiagonalGmm {
    Eigen::Index k = 0;
    Eigen::Index d = 0;
    Vector weights;    // K, simplex
    Matrix means;      // K x D
    Matrix variances;  // K x D, floored
    double log_likelihood = 0.0;
    double variance_floor = 0.0;
    // Total log-likelihood after every E step; non-decreasing within 1e-9.
    std::vector<double> ll_trace;

    void check() const;
};

struct GmmOptions {
    int max_iter = 100;
    double tol = 1e-6;  // relative log-likelihood change
    std::uint64_t seed = 0;
    // Absolute per-dimension variance floor; <= 0 selects
    // 1e-6 * (mean of the global per-dimension variances).
    double variance_floor = 0.0;
    KMeansOptions kmeans;
};

// EM for a diagonal-covariance mixture, initialized from kmeans_fit.
DiagonalGmm gmm_fit(const DescriptorMatrix& desc, Eigen::Index k, const GmmOptions& opts);

// Posterior responsibilities gamma_t(k), one row per patch.
Matrix gmm_responsibilities(const DiagonalGmm& gmm, const Matrix& desc);

// Fisher vector: GMM responsibilities pushed through the same first/second
// order aggregation kernel as the semantic encoder, same layout and
// normalization.
EncodedVector fv_encode(const DescriptorMatrix& desc, const DiagonalGmm& gmm,
                        bool normalize = true);

// Arithmetic mean over patches followed by the shared normalization.
EncodedVector avgpool_encode(const DescriptorMatrix& desc, bool normalize = true);

struct PcaModel {
    Eigen::Index in_dim = 0;
    Eigen::Index out_dim = 0;
    Vector mean;                 // D
    Matrix components;           // out_dim x D, orthonormal rows
    Vector explained_variance;   // out_dim, non-increasing
    bool whiten = false;
    bool rank_deficient = false;  // out_dim exceeded numerical rank; rows
                                  // beyond the rank are an arbitrary
                                  // orthonormal completion

    void check() const;
};

// Mean-centers and keeps the top right-singular directions of the centered
// data. Requires out_dim <= min(N, D).
PcaModel pca_fit(const DescriptorMatrix& desc, Eigen::Index out_dim, bool whiten = false);

DescriptorMatrix pca_transform(const PcaModel& model, const DescriptorMatrix& desc);

void write_kmeans(const std::string& path, const KMeansCodebook& model);
KMeansCodebook read_kmeans(const std::string& path);
void write_gmm(const std::string& path, const DiagonalGmm& model);
DiagonalGmm read_gmm(const std::string& path);
void write_pca(const std::string& path, const PcaModel& model);
PcaModel read_pca(const std::string& path);

}  // namespace vsad

#endif
