#pragma once

#include <cstdint>
#include <vector>

#include "opfproxy/netcase.hpp"

namespace opfproxy {

struct KMeansResult {
    Mat centroids;            // k x d
    std::vector<int> labels;  // per row of the input
    double inertia = 0.0;     // within-cluster sum of squares
    int iterations = 0;
};

/// Lloyd iterations with k-means++ seeding; converges when assignments
/// stop changing or max_iter is reached. Deterministic under seed.
KMeansResult kmeans(const Mat& points, int k, uint64_t seed, int max_iter = 300);

struct PcaResult {
    Mat projected;             // n x dims
    Mat components;            // d x dims, orthonormal columns
    Vec mean;                  // d
    Vec explained_variance_ratio;  // dims, non-increasing
};

/// Mean-centered projection onto the top eigenvectors of the sample
/// covariance. Zero-variance input yields a zero projection with zero
/// ratios.
PcaResult pca_project(const Mat& points, int dims);

}  // namespace opfproxy
