// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "grid_oracle.hpp"
#include "opfproxy/classify.hpp"
#include "opfproxy/dataset.hpp"
#include "opfproxy/eval.hpp"
#include "opfproxy/mlp.hpp"
#include "opfproxy/opf.hpp"
#include "opfproxy/regress.hpp"
#include "opfproxy/sampler.hpp"

using namespace opfproxy;

namespace {

int g_failures = 0;

void report(int number, const char* title, bool pass, const std::string& detail = "") {
    std::printf("criterion %2d (%s): %s%s%s\n", number, title, pass ? "PASS" : "FAIL",
                detail.empty() ? "" : " - ", detail.c_str());
    if (!pass) ++g_failures;
}

std::string data_path(const char* name) {
    return std::string(OPFPROXY_DATA_DIR) + "/" + name;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Vec random_load(const Vec& nominal, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> alpha(0.2, 2.0);
    Vec l = nominal;
    for (int i = 0; i < l.size(); ++i) l[i] = nominal[i] * alpha(rng);
    return l;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// dataset CSV with the trailing solve_time column removed from every row
std::string strip_solve_time(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
    return out.str();
}

// ---- criterion 1: solver correctness against KKT and a grid oracle ----
void criterion_solver(const std::vector<const NetworkCase*>& cases) {
    bool pass = true;
    std::string detail;
    double worst_kkt = 0.0, worst_rel = 0.0, total_time = 0.0;
    long solves = 0;
    for (const NetworkCase* net : cases) {
        DcModel model = build_dc_model(*net);
        const double cost_offset = model.cost_constant.sum();
        Vec nominal = nominal_load_vector(*net);
        std::mt19937_64 rng(101);
        for (int i = 0; i < 1000; ++i) {
            Vec load = random_load(nominal, rng);
            QpProblem qp = assemble_dcopf(model, load);
            double t0 = now_s();
            QpSolution sol = solve_qp(qp);
            total_time += now_s() - t0;
            ++solves;
            auto oracle = testing::grid_search_dispatch(model, load);
            if (sol.status == QpStatus::Optimal) {
                Vec grad = qp.quadratic * sol.x + qp.linear +
                           qp.eq_lhs.transpose() * sol.eq_duals +
                           qp.in_lhs.transpose() *
                               (sol.in_duals_upper - sol.in_duals_lower);
                double kkt = std::max({grad.lpNorm<Eigen::Infinity>(), sol.primal_residual,
                                       sol.gap});
                worst_kkt = std::max(worst_kkt, kkt);
                if (kkt > 1e-6) pass = false;
                if (oracle.feasible) {
                    double rel = std::abs(sol.objective + cost_offset - oracle.cost) /
                                 std::max(1.0, std::abs(oracle.cost));
                    worst_rel = std::max(worst_rel, rel);
                    if (rel > 1e-3) pass = false;
                }
            } else if (oracle.feasible) {
                // oracle found a strictly interior dispatch the solver missed
                pass = false;
                detail = "feasibility disagreement on " + net->name;
            }
        }
    }
    double mean_ms = 1e3 * total_time / solves;
    if (mean_ms > 10.0) pass = false;
    char buf[160];
    std::snprintf(buf, sizeof buf, "worst kkt %.2e, worst rel %.2e, mean %.3f ms/solve",
                  worst_kkt, worst_rel, mean_ms);
    report(1, "exact solver kkt + grid oracle + speed", pass,
           detail.empty() ? buf : detail);
}

// ---- criterion 2: value-function convexity on the 5-bus case ----
void criterion_convexity(const NetworkCase& net) {
    DcModel model = build_dc_model(net);
    Vec nominal = nominal_load_vector(net);
    std::mt19937_64 rng(202);
    bool pass = true;
    int pairs = 0;
    double worst_gap = -1e9;
    while (pairs < 1000) {
        Vec a = random_load(nominal, rng), b = random_load(nominal, rng);
        OpfOutcome oa = solve_opf(model, a), ob = solve_opf(model, b);
        if (!oa.feasible || !ob.feasible) continue;
        ++pairs;
        OpfOutcome om = solve_opf(model, 0.5 * (a + b));
        if (!om.feasible) {
            pass = false;
            break;
        }
        double gap = *om.cost - 0.5 * (*oa.cost + *ob.cost);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-6) pass = false;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d feasible pairs, worst midpoint gap %.2e", pairs,
                  worst_gap);
    report(2, "value-function convexity", pass, buf);
}

// ---- criterion 3: sampler membership and uniformity ----
void criterion_sampler(const NetworkCase& net) {
    Vec nominal = nominal_load_vector(net);
    Polytope box = box_polytope(nominal, 0.2, 2.0);
    SamplerConfig cfg;
    cfg.seed = 303;
    auto samples = hit_and_run(box, cfg, 10000);
    bool pass = samples.size() == 10000;
    double worst_ks = 0.0;
    for (size_t wi = 0; wi < box.free_index.size(); ++wi) {
        int c = box.free_index[wi];
        std::vector<double> coord;
        coord.reserve(samples.size());
        for (const auto& s : samples) {
            if (s[c] < 0.2 * nominal[c] - 1e-12 || s[c] > 2.0 * nominal[c] + 1e-12)
                pass = false;
            coord.push_back(s[c]);
        }
        std::sort(coord.begin(), coord.end());
        const double lo = 0.2 * nominal[c], hi = 2.0 * nominal[c];
        const double n = static_cast<double>(coord.size());
        double ks = 0.0;
        for (size_t i = 0; i < coord.size(); ++i) {
            double cdf = (coord[i] - lo) / (hi - lo);
            ks = std::max(ks, std::abs((i + 1) / n - cdf));
            ks = std::max(ks, std::abs(cdf - i / n));
        }
        worst_ks = std::max(worst_ks, ks);
        if (ks > 0.02) pass = false;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst per-coordinate ks %.4f", worst_ks);
    report(3, "hit-and-run membership + uniformity", pass, buf);
}

// ---- criterion 7: standalone model properties ----
void criterion_model_properties() {
    bool pass = true;
    std::string detail;
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(0.0, 2.0);

    {  // ols exact recovery
        Mat x(30, 2);
        Vec y(30);
        for (int i = 0; i < 30; ++i) {
            x(i, 0) = u(rng);
            x(i, 1) = u(rng);
            y[i] = 2.0 - 1.5 * x(i, 0) + 4.0 * x(i, 1);
        }
        Dataset d;
        for (int i = 0; i < 30; ++i)
            d.samples.push_back({x.row(i).transpose(), true, y[i], 0.0});
        RegressorSpec spec;
        spec.kind = RegressorKind::Linear;
        TrainedRegressor m = train_regressor(spec, d);
        for (int i = 0; i < 30; ++i)
            if (std::abs(m.predict(x.row(i).transpose()) - y[i]) > 1e-8) {
                pass = false;
                detail = "ols recovery";
            }
    }
    {  // gp interpolation
        Mat x(25, 2);
        Vec y(25);
        for (int i = 0; i < 25; ++i) {
            x(i, 0) = u(rng);
            x(i, 1) = u(rng);
            y[i] = std::sin(2.0 * x(i, 0)) + x(i, 1);
        }
        Dataset d;
        for (int i = 0; i < 25; ++i)
            d.samples.push_back({x.row(i).transpose(), true, y[i], 0.0});
        RegressorSpec spec;
        spec.kind = RegressorKind::GpMatern32;
        TrainedRegressor m = train_regressor(spec, d);
        for (int i = 0; i < 25; ++i)
            if (std::abs(m.predict(x.row(i).transpose()) - y[i]) >
                1e-6 * std::max(1.0, std::abs(y[i]))) {
                pass = false;
                detail = "gp interpolation";
            }
    }
    {  // mlp analytic gradient vs central differences
        Mat x(15, 2);
        Vec y(15);
        for (int i = 0; i < 15; ++i) {
            x(i, 0) = u(rng);
            x(i, 1) = u(rng);
            y[i] = x(i, 0) - x(i, 1);
        }
        MlpConfig cfg;
        cfg.hidden = 5;
        cfg.epochs = 1;
        Mlp net = train_mlp(x, y, cfg);
        Vec theta = net.flatten();
        Vec grad = mlp_loss_gradient(net, x, y);
        const double h = 1e-5;
        for (int i = 0; i < theta.size(); ++i) {
            Mlp p = net, q = net;
            Vec tp = theta, tm = theta;
            tp[i] += h;
            tm[i] -= h;
            p.unflatten(tp);
            q.unflatten(tm);
            double fd = (mlp_loss(p, x, y) - mlp_loss(q, x, y)) / (2.0 * h);
            if (std::abs(grad[i] - fd) > 1e-4 * std::max(1.0, std::abs(fd))) {
                pass = false;
                detail = "mlp gradient";
            }
        }
    }
    {  // tree purity and single-tree forest equivalence
        Dataset d;
        std::mt19937_64 r2(17);
        std::normal_distribution<double> noise(0.0, 0.2);
        for (int i = 0; i < 100; ++i) {
            Vec x(2);
            bool one = i % 2 == 0;
            x << (one ? 3.0 : 0.0) + noise(r2), (one ? 3.0 : 0.0) + noise(r2);
            LabeledSample s;
            s.load = x;
            s.feasible = one;
            if (one) s.cost = 1.0;
            d.samples.push_back(std::move(s));
        }
        ClassifierSpec ts;
        ts.kind = ClassifierKind::DecisionTree;
        TrainedClassifier tree = train_classifier(ts, d);
        int hits = 0;
        for (const auto& s : d.samples)
            hits += tree.predict(s.load) == (s.feasible ? 1 : 0) ? 1 : 0;
        if (hits != d.size()) {
            pass = false;
            detail = "tree training purity";
        }
        ClassifierSpec fs = ts;
        fs.kind = ClassifierKind::RandomForest;
        fs.n_trees = 1;
        fs.bootstrap = false;
        fs.max_features = 0;
        TrainedClassifier forest = train_classifier(fs, d);
        for (const auto& s : d.samples)
            if (forest.predict(s.load) != tree.predict(s.load)) {
                pass = false;
                detail = "forest(1) vs tree";
            }
    }
    report(7, "standalone model properties", pass, detail);
}

// ---- criterion 8: metric formulas on hand-computed cases ----
void criterion_metric_formulas() {
    bool pass = true;
    Dataset d;
    for (int i = 0; i < 4; ++i) {
        LabeledSample s;
        s.load = Vec::Constant(1, static_cast<double>(i));
        s.feasible = i < 3;
        if (s.feasible) s.cost = 10.0;
        d.samples.push_back(std::move(s));
    }
    TrainedClassifier always_one;
    always_one.kind = ClassifierKind::Trivial;
    always_one.dim = 1;
    always_one.constant_label = 1;
    if (classification_accuracy(always_one, d) != 0.75) pass = false;

    TrainedRegressor constant;
    constant.kind = RegressorKind::Linear;
    constant.dim = 1;
    constant.beta = Vec::Zero(2);
    constant.beta[0] = 11.0;
    auto [mean, sd] = mean_relative_error(constant, d);
    if (std::abs(mean - 0.1) > 1e-15 || std::abs(sd) > 1e-15) pass = false;
    constant.beta[0] = 10.0;
    auto [zero_mean, zero_sd] = mean_relative_error(constant, d);
    if (zero_mean != 0.0 || zero_sd != 0.0) pass = false;
    report(8, "metric formula hand cases", pass);
}

// ---- criterion 9: reproducibility at pipeline scale ----
void criterion_reproducibility(const NetworkCase& net) {
    DcModel model = build_dc_model(net);
    Polytope box = box_polytope(nominal_load_vector(net), 0.2, 2.0);
    SamplerConfig cfg;
    cfg.seed = 909;
    bool pass = true;
    std::string detail;

    auto run_once = [&](const std::string& tag, int workers) {
        Dataset data = generate_dataset(model, box, cfg, 2000, workers, net.name);
        auto [train, test] = split(data, 0.8, 11);
        std::string dir = "/tmp/opfproxy_accept_" + tag;
        std::string mk = "mkdir -p " + dir;
        if (std::system(mk.c_str()) != 0) throw std::runtime_error("mkdir failed");
        save_dataset(data, dir + "/dataset.csv");
        RegressorSpec rs;
        rs.kind = RegressorKind::Linear;
        TrainedRegressor lin = train_regressor(rs, train);
        save_regressor(lin, dir + "/linear.txt");
        rs.kind = RegressorKind::Mlp;
        rs.seed = 5;
        TrainedRegressor mlp = train_regressor(rs, train);
        save_regressor(mlp, dir + "/mlp.txt");
        std::vector<double> truth, pred, errs;
        for (const auto& s : test.samples) {
            if (!s.feasible) continue;
            truth.push_back(*s.cost);
            pred.push_back(mlp.predict(s.load));
            errs.push_back(std::abs(pred.back() - truth.back()) / truth.back());
        }
        write_residuals_csv(dir + "/residuals.csv", test, truth, pred, errs, nullptr);
        auto hourly = profile_sweep(mlp, model, default_profile(),
                                    nominal_load_vector(net), 10, 13);
        write_profile_csv(dir + "/profile.csv", hourly);
        return dir;
    };

    std::string a = run_once("a", 1);
    std::string b = run_once("b", 8);
    if (strip_solve_time(a + "/dataset.csv") != strip_solve_time(b + "/dataset.csv")) {
        pass = false;
        detail = "datasets differ across worker counts";
    }
    for (const char* f : {"/linear.txt", "/mlp.txt", "/residuals.csv", "/profile.csv"})
        if (slurp(a + f) != slurp(b + f)) {
            pass = false;
            detail = std::string("mismatch in ") + f;
        }
    report(9, "seeded reproducibility, workers 1 vs 8", pass, detail);
}

struct PipelineResult {
    double ols_err = 1e9, gp_err = 1e9, mlp_err = 1e9;
    double ols_gain = 0, gp_gain = 0, mlp_gain = 0;
    double trivial_acc = 0, mlp_acc = 0, rf_acc = 0;
    long gp_points = 0;
    double seconds = 0;
    TrainedRegressor mlp_reg;
};

// the big 16000/4000 run shared by criteria 4, 5, 6 and 10
PipelineResult run_pipeline(const NetworkCase& net) {
    PipelineResult r;
    double t0 = now_s();
    DcModel model = build_dc_model(net);
    Polytope box = box_polytope(nominal_load_vector(net), 0.2, 2.0);
    SamplerConfig cfg;
    cfg.seed = 404;
    Dataset data = generate_dataset(model, box, cfg, 20000, 1, net.name);
    auto [train, test] = split(data, 0.8, 21);

    RegressorSpec rs;
    rs.seed = 31;
    rs.kind = RegressorKind::Linear;
    TrainedRegressor ols = train_regressor(rs, train);
    rs.kind = RegressorKind::GpMatern32;
    TrainedRegressor gp = train_regressor(rs, train);
    rs.kind = RegressorKind::Mlp;
    rs.mlp.epochs = 600;
    TrainedRegressor mlp = train_regressor(rs, train);
    r.gp_points = gp.gp_inputs.rows();

    r.ols_err = mean_relative_error(ols, test).first;
    r.gp_err = mean_relative_error(gp, test).first;
    r.mlp_err = mean_relative_error(mlp, test).first;

    auto wrap = [](const TrainedRegressor& m) {
        return [&m](const Vec& l) { return m.predict(l); };
    };
    r.ols_gain = runtime_gain(wrap(ols), model, test);
    r.gp_gain = runtime_gain(wrap(gp), model, test);
    r.mlp_gain = runtime_gain(wrap(mlp), model, test);

    ClassifierSpec cs;
    cs.seed = 41;
    cs.kind = ClassifierKind::Trivial;
    r.trivial_acc = classification_accuracy(train_classifier(cs, train), test);
    cs.kind = ClassifierKind::Mlp;
    cs.mlp.classifier = true;
    cs.mlp.epochs = 600;
    r.mlp_acc = classification_accuracy(train_classifier(cs, train), test);
    cs.kind = ClassifierKind::RandomForest;
    r.rf_acc = classification_accuracy(train_classifier(cs, train), test);

    r.mlp_reg = std::move(mlp);
    r.seconds = now_s() - t0;
    return r;
}

void criterion_regression_errors(const PipelineResult& r) {
    bool pass = r.gp_err <= 0.02 && r.mlp_err <= 0.02 && r.gp_err < r.ols_err &&
                r.mlp_err < r.ols_err && r.seconds <= 1800.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "ols %.4f, gp %.4f, mlp %.4f mean rel err; pipeline %.0f s", r.ols_err,
                  r.gp_err, r.mlp_err, r.seconds);
    report(4, "16000/4000 regression quality", pass, buf);
}

void criterion_classification(const PipelineResult& r) {
    bool pass = r.mlp_acc >= 0.95 && r.rf_acc >= 0.95 && r.mlp_acc > r.trivial_acc &&
                r.rf_acc > r.trivial_acc;
    char buf[120];
    std::snprintf(buf, sizeof buf, "trivial %.4f, mlp %.4f, rf %.4f accuracy",
                  r.trivial_acc, r.mlp_acc, r.rf_acc);
    report(5, "feasibility classification quality", pass, buf);
}

void criterion_runtime_gain(const PipelineResult& r) {
    bool pass = r.ols_gain >= 1e3 && r.gp_gain < r.mlp_gain && r.gp_points == 10000;
    char buf[140];
    std::snprintf(buf, sizeof buf, "ols %.2e, gp %.2e, mlp %.2e gain; gp points %ld",
                  r.ols_gain, r.gp_gain, r.mlp_gain, r.gp_points);
    report(6, "run-time gain ordering", pass, buf);
}

void criterion_sweep(const NetworkCase& net, const PipelineResult& r) {
    DcModel model = build_dc_model(net);
    Vec peak = nominal_load_vector(net);
    bool pass = true;
    std::string detail;

    auto exact = [&](const Vec& l) {
        OpfOutcome out = solve_opf(model, l);
        return out.feasible ? *out.cost : 0.0;
    };
    auto zero_hours = profile_sweep_fn(exact, model, default_profile(), peak, 20, 55);
    if (zero_hours.size() != 24) pass = false;
    for (const auto& h : zero_hours)
        if (!h || *h > 1e-9) {
            pass = false;
            detail = "exact-solver sweep not zero";
        }

    auto mlp_hours = profile_sweep(r.mlp_reg, model, default_profile(), peak, 20, 56);
    if (mlp_hours.size() != 24) pass = false;
    double worst = 0.0;
    for (const auto& h : mlp_hours) {
        if (!h) {
            pass = false;
            detail = "infeasible hour in the nominal profile";
            continue;
        }
        worst = std::max(worst, *h);
    }
    if (worst > 0.05) pass = false;
    char buf[96];
    std::snprintf(buf, sizeof buf, "24 rows, worst mlp hourly error %.4f", worst);
    report(10, "daily profile sweep", pass, detail.empty() ? buf : detail);
}

}  // namespace

int main() {
    NetworkCase case2 = load_case_file(data_path("case2.net"));
    NetworkCase case5 = load_case_file(data_path("case5.net"));

    criterion_solver({&case2, &case5});
    criterion_convexity(case5);
    criterion_sampler(case5);

    PipelineResult pipeline = run_pipeline(case5);
    criterion_regression_errors(pipeline);
    criterion_classification(pipeline);
    criterion_runtime_gain(pipeline);

    criterion_model_properties();
    criterion_metric_formulas();
    criterion_reproducibility(case5);
    criterion_sweep(case5, pipeline);

    if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
    else std::printf("all 10 criteria passed\n");
    return g_failures == 0 ? 0 : 1;
}
