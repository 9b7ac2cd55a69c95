#include "opfproxy/kmeans.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "opfproxy/rng.hpp"

namespace opfproxy {

KMeansResult kmeans(const Mat& points, int k, uint64_t seed, int max_iter) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    if (k < 2) throw std::invalid_argument("kmeans requires k >= 2");
    {
        std::set<std::vector<double>> distinct;
        for (int i = 0; i < n && static_cast<int>(distinct.size()) < k; ++i)
            distinct.insert(std::vector<double>(points.row(i).begin(), points.row(i).end()));
        if (static_cast<int>(distinct.size()) < k)
            throw std::invalid_argument("kmeans: fewer than k distinct points");
    }

    Rng rng(derive_seed(seed, 0x6b6d));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // k-means++ seeding
    Mat centroids(k, d);
    std::uniform_int_distribution<int> pick(0, n - 1);
    centroids.row(0) = points.row(pick(rng));
    Vec d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = d2.sum();
        int chosen = 0;
        if (total > 0) {
            double target = unif(rng) * total, acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) { chosen = i; break; }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.row(c) = points.row(chosen);
        d2 = d2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }

    KMeansResult res;
    res.labels.assign(n, -1);
    std::vector<int> counts(k);
    for (int it = 1; it <= max_iter; ++it) {
        res.iterations = it;
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double dist = (points.row(i) - centroids.row(c)).squaredNorm();
                if (dist < best_d) { best_d = dist; best = c; }
            }
            if (res.labels[i] != best) { res.labels[i] = best; changed = true; }
        }
        if (!changed && it > 1) break;

        Mat sums = Mat::Zero(k, d);
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.labels[i]) += points.row(i);
            ++counts[res.labels[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centroids.row(c) = sums.row(c) / counts[c];
        if (!changed) break;
    }

    res.centroids = centroids;
    res.inertia = 0.0;
    for (int i = 0; i < n; ++i)
        res.inertia += (points.row(i) - centroids.row(res.labels[i])).squaredNorm();
    return res;
}

PcaResult pca_project(const Mat& points, int dims) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    if (dims < 1 || dims > d) throw std::invalid_argument("pca: dims must be in [1, d]");
    if (n < 2) throw std::invalid_argument("pca: need at least 2 samples");

    PcaResult res;
    res.mean = points.colwise().mean();
    Mat centered = points.rowwise() - res.mean.transpose();
    Mat cov = centered.transpose() * centered / (n - 1);

    double total_var = cov.trace();
    if (total_var <= 0) {
        res.projected = Mat::Zero(n, dims);
        res.components = Mat::Zero(d, dims);
        res.explained_variance_ratio = Vec::Zero(dims);
        return res;
    }

    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    // eigenvalues ascending; take the top dims in descending order
    res.components.resize(d, dims);
    res.explained_variance_ratio.resize(dims);
    for (int j = 0; j < dims; ++j) {
        int src = d - 1 - j;
        Vec v = eig.eigenvectors().col(src);
        // deterministic sign: largest-magnitude entry positive
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        res.components.col(j) = v;
        res.explained_variance_ratio[j] = std::max(eig.eigenvalues()[src], 0.0) / total_var;
    }
    res.projected = centered * res.components;
    return res;
}

}  // namespace opfproxy
