#pragma once

#include <string>
#include <vector>

#include "opfproxy/classify.hpp"
#include "opfproxy/dataset.hpp"
#include "opfproxy/mlp.hpp"

namespace opfproxy {

enum class RegressorKind {
    Linear,
    PiecewiseLinear,
    GpMatern32,
    GpArdMatern32,
    Mlp,
};

std::string regressor_kind_name(RegressorKind k);
RegressorKind regressor_kind_from_name(const std::string& name);

struct RegressorSpec {
    RegressorKind kind = RegressorKind::Linear;
    int segments = 4;          // piecewise cluster count
    double jitter = 1e-8;      // GP diagonal, escalated x10 up to 1e-4 on factor failure
    int gp_max_points = 10000; // larger training sets are uniformly subsampled
    int gp_grid_points = 9;    // lengthscale candidates around the median distance
    MlpConfig mlp{};
    uint64_t seed = 0;
};

struct TrainedRegressor {
    RegressorKind kind = RegressorKind::Linear;
    int dim = 0;
    Standardizer standardizer;     // inputs
    double y_mean = 0.0, y_scale = 1.0;  // target z-scoring (GP, MLP)

    // linear: [intercept, coefficients] on raw inputs
    Vec beta;
    // piecewise: centroids in standardized space, per-segment raw-space beta
    Mat segment_centroids;
    std::vector<Vec> segment_beta;
    // gp: standardized training inputs, dual weights on z-scored targets
    double gp_signal2 = 1.0;
    Vec gp_lengthscale;  // 1 entry (iso) or d entries (ard)
    Mat gp_inputs;
    Vec gp_alpha;
    double gp_jitter_used = 0.0;
    // mlp
    Mlp net;

    double predict(const Vec& load) const;
};

TrainedRegressor train_regressor(const RegressorSpec& spec, const Dataset& train);

void save_regressor(const TrainedRegressor& model, const std::string& path);
TrainedRegressor load_regressor(const std::string& path);

/// Matern 3/2 covariance between standardized points with per-dimension
/// (or shared) lengthscales.
double matern32(const Vec& a, const Vec& b, const Vec& lengthscale, double signal2);

}  // namespace opfproxy
