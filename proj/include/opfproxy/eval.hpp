#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opfproxy/classify.hpp"
#include "opfproxy/dataset.hpp"
#include "opfproxy/kmeans.hpp"
#include "opfproxy/regress.hpp"

namespace opfproxy {

struct EvalReport {
    std::string model_kind;
    std::string case_name;
    uint64_t seed = 0;
    int test_size = 0;
    std::optional<double> accuracy;            // classification
    std::optional<double> mean_rel_error;      // regression
    std::optional<double> std_rel_error;
    std::optional<double> runtime_gain;
    double train_seconds = 0.0;
    double mean_predict_seconds = 0.0;
    double mean_exact_seconds = 0.0;
    std::vector<double> residuals;             // per-sample relative errors
};

/// 24 hourly multipliers in (0, 1], peak-normalized to 1.
struct DailyProfile {
    std::vector<double> multipliers;
};

DailyProfile load_profile(const std::string& path);
DailyProfile default_profile();

struct ErrorSegmentation {
    Vec centroids;                    // sorted ascending, relative-error space
    std::vector<int> labels;          // per sample, 0 = lowest-error segment
    std::vector<std::pair<double, double>> intervals;  // partition of [0, max]
};

double classification_accuracy(const TrainedClassifier& model, const Dataset& test);

/// Mean and per-sample std of |predicted - true| / true over feasible
/// test samples. Throws on zero-cost samples (with index) and on empty
/// feasible sets.
std::pair<double, double> mean_relative_error(const TrainedRegressor& model,
                                              const Dataset& test);

std::vector<double> relative_errors(const TrainedRegressor& model, const Dataset& test);

/// Median-of-means timing of exact solves against model predictions on
/// the same loads; prediction calls are batched when a single call is
/// below timer resolution.
double runtime_gain(const std::function<double(const Vec&)>& predictor, const DcModel& model,
                    const Dataset& test, double* mean_exact_s = nullptr,
                    double* mean_predict_s = nullptr);

/// Hourly mean relative error when the peak load is scaled by the profile
/// with per-bus uniform jitter. Infeasible hours come back as nullopt.
std::vector<std::optional<double>> profile_sweep(const TrainedRegressor& model,
                                                 const DcModel& casebase,
                                                 const DailyProfile& profile, const Vec& peak,
                                                 int per_hour_samples, uint64_t seed,
                                                 double jitter = 0.05);

/// Same sweep with an arbitrary cost predictor (e.g. the exact solver
/// wrapped as a model).
std::vector<std::optional<double>> profile_sweep_fn(
    const std::function<double(const Vec&)>& predictor, const DcModel& casebase,
    const DailyProfile& profile, const Vec& peak, int per_hour_samples, uint64_t seed,
    double jitter = 0.05);

/// 1-D K-means on relative errors; interval edges at midpoints between
/// sorted adjacent centroids.
ErrorSegmentation kmeans_segment(const std::vector<double>& residuals, int k, uint64_t seed);

// CSV exports; columns fixed by the reporting schema
void write_residuals_csv(const std::string& path, const Dataset& test,
                         const std::vector<double>& true_costs,
                         const std::vector<double>& predicted,
                         const std::vector<double>& rel_errors,
                         const std::vector<int>* segment_labels);
void write_profile_csv(const std::string& path,
                       const std::vector<std::optional<double>>& hourly);
void write_pca_csv(const std::string& path, const Mat& projected,
                   const std::vector<int>& segment_labels);
void write_report(const std::string& path, const EvalReport& report);

}  // namespace opfproxy
