#include "opfproxy/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "opfproxy/opf.hpp"
#include "opfproxy/rng.hpp"

namespace opfproxy {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

DailyProfile default_profile() {
    // peak-normalized curve with an overnight trough near 0.6 and an
    // evening peak of 1
    return DailyProfile{{0.64, 0.61, 0.60, 0.60, 0.62, 0.66, 0.72, 0.79,
                         0.84, 0.87, 0.89, 0.91, 0.92, 0.92, 0.91, 0.92,
                         0.94, 0.97, 1.00, 0.99, 0.95, 0.88, 0.78, 0.69}};
}

DailyProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file: " + path);
    DailyProfile p;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("hour", 0) == 0) continue;
        auto comma = line.find(',');
        std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        p.multipliers.push_back(std::stod(field));
    }
    if (p.multipliers.size() != 24)
        throw std::runtime_error("profile must have 24 hourly values, got " +
                                 std::to_string(p.multipliers.size()));
    double peak = *std::max_element(p.multipliers.begin(), p.multipliers.end());
    for (double m : p.multipliers)
        if (!(m > 0))
            throw std::runtime_error("profile multipliers must be positive");
    if (std::abs(peak - 1.0) > 1e-12)
        throw std::runtime_error("profile must be peak-normalized (max = 1)");
    return p;
}

double classification_accuracy(const TrainedClassifier& model, const Dataset& test) {
    if (test.size() == 0) throw std::invalid_argument("empty test set");
    int correct = 0;
    for (const auto& s : test.samples)
        correct += model.predict(s.load) == (s.feasible ? 1 : 0) ? 1 : 0;
    return static_cast<double>(correct) / test.size();
}

std::vector<double> relative_errors(const TrainedRegressor& model, const Dataset& test) {
    std::vector<double> errs;
    for (int i = 0; i < test.size(); ++i) {
        const auto& s = test.samples[i];
        if (!s.feasible) continue;
        if (*s.cost == 0.0)
            throw std::invalid_argument("zero-cost sample at index " + std::to_string(i));
        errs.push_back(std::abs(model.predict(s.load) - *s.cost) / *s.cost);
    }
    if (errs.empty()) throw std::invalid_argument("no feasible samples in test set");
    return errs;
}

std::pair<double, double> mean_relative_error(const TrainedRegressor& model,
                                              const Dataset& test) {
    auto errs = relative_errors(model, test);
    double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    var /= errs.size();
    return {mean, std::sqrt(var)};
}

namespace {

// median of per-batch means; calls is the total call budget
double timed_mean(const std::function<void()>& fn, int calls, int batches) {
    fn();  // warm-up, excluded
    std::vector<double> means(batches);
    int per_batch = std::max(1, calls / batches);
    for (int b = 0; b < batches; ++b) {
        double t0 = now_s();
        for (int i = 0; i < per_batch; ++i) fn();
        means[b] = (now_s() - t0) / per_batch;
    }
    std::nth_element(means.begin(), means.begin() + batches / 2, means.end());
    return means[batches / 2];
}

}  // namespace

double runtime_gain(const std::function<double(const Vec&)>& predictor, const DcModel& model,
                    const Dataset& test, double* mean_exact_s, double* mean_predict_s) {
    if (test.size() == 0) throw std::invalid_argument("empty test set");
    const int n = test.size();

    int i_exact = 0;
    double exact = timed_mean(
        [&] {
            solve_opf(model, test.samples[i_exact % n].load);
            ++i_exact;
        },
        100, 7);

    // predictions are usually below timer resolution; batch over the test set
    volatile double sink = 0.0;
    int i_pred = 0;
    double pred = timed_mean(
        [&] {
            sink = sink + predictor(test.samples[i_pred % n].load);
            ++i_pred;
        },
        2000, 7);

    if (mean_exact_s) *mean_exact_s = exact;
    if (mean_predict_s) *mean_predict_s = pred;
    if (pred <= 0) throw NumericError("prediction timing below clock resolution");
    return exact / pred;
}

std::vector<std::optional<double>> profile_sweep_fn(
    const std::function<double(const Vec&)>& predictor, const DcModel& casebase,
    const DailyProfile& profile, const Vec& peak, int per_hour_samples, uint64_t seed,
    double jitter) {
    if (per_hour_samples < 1) throw std::invalid_argument("per_hour_samples must be >= 1");
    std::vector<std::optional<double>> out(24);
    for (int h = 0; h < 24; ++h) {
        Rng rng(derive_seed(seed, 0x687200 + h));
        std::uniform_real_distribution<double> u(-jitter, jitter);
        double sum = 0.0;
        int count = 0;
        for (int s = 0; s < per_hour_samples; ++s) {
            Vec load = peak * profile.multipliers[h];
            if (jitter > 0)
                for (int i = 0; i < load.size(); ++i) load[i] *= 1.0 + u(rng);
            OpfOutcome exact = solve_opf(casebase, load);
            if (!exact.feasible) continue;
            sum += std::abs(predictor(load) - *exact.cost) / *exact.cost;
            ++count;
        }
        if (count > 0) out[h] = sum / count;
    }
    return out;
}

std::vector<std::optional<double>> profile_sweep(const TrainedRegressor& model,
                                                 const DcModel& casebase,
                                                 const DailyProfile& profile, const Vec& peak,
                                                 int per_hour_samples, uint64_t seed,
                                                 double jitter) {
    return profile_sweep_fn([&](const Vec& l) { return model.predict(l); }, casebase, profile,
                            peak, per_hour_samples, seed, jitter);
}

ErrorSegmentation kmeans_segment(const std::vector<double>& residuals, int k, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("segmentation requires k >= 2");
    Mat points(residuals.size(), 1);
    for (size_t i = 0; i < residuals.size(); ++i) points(i, 0) = residuals[i];
    auto km = kmeans(points, k, seed);

    // order segments by centroid so label 0 is the lowest-error group
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return km.centroids(a, 0) < km.centroids(b, 0); });
    std::vector<int> rank(k);
    for (int i = 0; i < k; ++i) rank[order[i]] = i;

    ErrorSegmentation seg;
    seg.centroids.resize(k);
    for (int i = 0; i < k; ++i) seg.centroids[i] = km.centroids(order[i], 0);
    seg.labels.resize(residuals.size());
    for (size_t i = 0; i < residuals.size(); ++i) seg.labels[i] = rank[km.labels[i]];

    double max_err = *std::max_element(residuals.begin(), residuals.end());
    seg.intervals.resize(k);
    double low = 0.0;
    for (int i = 0; i < k; ++i) {
        double high = i + 1 < k ? 0.5 * (seg.centroids[i] + seg.centroids[i + 1]) : max_err;
        seg.intervals[i] = {low, high};
        low = high;
    }
    return seg;
}

void write_residuals_csv(const std::string& path, const Dataset& test,
                         const std::vector<double>& true_costs,
                         const std::vector<double>& predicted,
                         const std::vector<double>& rel_errors,
                         const std::vector<int>* segment_labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const int d = test.load_dim();
    for (int j = 0; j < d; ++j) out << "l_" << (j + 1) << ",";
    out << "true_cost,predicted_cost,relative_error";
    if (segment_labels) out << ",segment";
    out << "\n";
    size_t row = 0;
    for (const auto& s : test.samples) {
        if (!s.feasible) continue;
        for (int j = 0; j < d; ++j) out << fmt_double(s.load[j]) << ",";
        out << fmt_double(true_costs[row]) << "," << fmt_double(predicted[row]) << ","
            << fmt_double(rel_errors[row]);
        if (segment_labels) out << "," << (*segment_labels)[row];
        out << "\n";
        ++row;
    }
}

void write_profile_csv(const std::string& path,
                       const std::vector<std::optional<double>>& hourly) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "hour,mean_rel_err\n";
    for (size_t h = 0; h < hourly.size(); ++h) {
        out << h << ",";
        if (hourly[h]) out << fmt_double(*hourly[h]);
        out << "\n";
    }
}

void write_pca_csv(const std::string& path, const Mat& projected,
                   const std::vector<int>& segment_labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (int j = 0; j < projected.cols(); ++j) out << "pc_" << (j + 1) << ",";
    out << "segment\n";
    for (int i = 0; i < projected.rows(); ++i) {
        for (int j = 0; j < projected.cols(); ++j) out << fmt_double(projected(i, j)) << ",";
        out << segment_labels[i] << "\n";
    }
}

void write_report(const std::string& path, const EvalReport& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "model_kind=" << r.model_kind << "\n";
    out << "case_name=" << r.case_name << "\n";
    out << "seed=" << r.seed << "\n";
    out << "test_size=" << r.test_size << "\n";
    if (r.accuracy) out << "accuracy=" << fmt_double(*r.accuracy) << "\n";
    if (r.mean_rel_error) out << "mean_relative_error=" << fmt_double(*r.mean_rel_error) << "\n";
    if (r.std_rel_error) out << "std_relative_error=" << fmt_double(*r.std_rel_error) << "\n";
    if (r.runtime_gain) out << "runtime_gain=" << fmt_double(*r.runtime_gain) << "\n";
    out << "train_seconds=" << fmt_double(r.train_seconds) << "\n";
    out << "mean_predict_seconds=" << fmt_double(r.mean_predict_seconds) << "\n";
    out << "mean_exact_seconds=" << fmt_double(r.mean_exact_seconds) << "\n";
}

}  // namespace opfproxy
