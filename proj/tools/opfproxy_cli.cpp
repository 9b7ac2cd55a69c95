// Command-line front end for the OPF proxy pipeline. Talks to the shared
// library exclusively through the C API in opfproxy.h.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opfproxy.h"

namespace {

int exit_code_for(int err) { return err == OPFX_ERR_NUMERIC ? 1 : 2; }

int fail(int err) {
    std::fprintf(stderr, "error: %s\n", opfx_last_error());
    return exit_code_for(err);
}

struct CaseHandle {
    opfx_case* ptr = nullptr;
    ~CaseHandle() { opfx_case_free(ptr); }
};
struct DatasetHandle {
    opfx_dataset* ptr = nullptr;
    ~DatasetHandle() { opfx_dataset_free(ptr); }
};
struct ModelHandle {
    opfx_model* ptr = nullptr;
    ~ModelHandle() { opfx_model_free(ptr); }
};

std::vector<double> parse_load_flag(const std::string& csv) {
    std::vector<double> vals;
    size_t pos = 0;
    while (pos <= csv.size()) {
        auto comma = csv.find(',', pos);
        std::string tok = csv.substr(pos, comma == std::string::npos ? csv.size() - pos
                                                                     : comma - pos);
        vals.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return vals;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void append_timing_log(const std::string& out_dir, const std::string& line) {
    std::string path = out_dir.empty() ? "timings.log" : out_dir + "/timings.log";
    if (FILE* f = std::fopen(path.c_str(), "a")) {
        std::fputs(line.c_str(), f);
        std::fputc('\n', f);
        std::fclose(f);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned proxies for DC optimal power flow outcomes"};
    app.require_subcommand(1);

    // generate
    std::string g_case, g_out = "dataset.csv";
    long g_n = 1000;
    uint64_t g_seed = 0;
    int g_workers = 1, g_burn_in = 1000, g_thinning = 5;
    double g_alpha_min = 0.2, g_alpha_max = 2.0;
    auto* generate = app.add_subcommand("generate", "sample loads and label them by exact OPF");
    generate->add_option("--case", g_case, "case file")->required();
    generate->add_option("--n", g_n, "number of samples");
    generate->add_option("--seed", g_seed, "random seed");
    generate->add_option("--workers", g_workers, "parallel labeling workers");
    generate->add_option("--burn-in", g_burn_in, "chain burn-in steps");
    generate->add_option("--thinning", g_thinning, "chain thinning");
    generate->add_option("--alpha-min", g_alpha_min, "lower load multiplier");
    generate->add_option("--alpha-max", g_alpha_max, "upper load multiplier");
    generate->add_option("--out", g_out, "output dataset CSV");

    // train
    std::string t_model, t_data, t_out = "model.txt";
    uint64_t t_seed = 0;
    auto* train = app.add_subcommand("train", "fit a classifier or regressor");
    train->add_option("--model", t_model, "model kind")->required();
    train->add_option("--data", t_data, "training dataset CSV")->required();
    train->add_option("--seed", t_seed, "random seed");
    train->add_option("--out", t_out, "output model file");

    // eval
    std::string e_model, e_data, e_case, e_outdir = ".";
    uint64_t e_seed = 0;
    auto* eval = app.add_subcommand("eval", "evaluate a model on a test set");
    eval->add_option("--model-file", e_model, "trained model file")->required();
    eval->add_option("--data", e_data, "test dataset CSV")->required();
    eval->add_option("--case", e_case, "case file (enables run-time gain)");
    eval->add_option("--seed", e_seed, "random seed");
    eval->add_option("--out-dir", e_outdir, "directory for report and CSV exports");

    // sweep
    std::string s_model, s_case, s_profile, s_out = "profile.csv";
    int s_per_hour = 50;
    double s_jitter = 0.05;
    uint64_t s_seed = 0;
    auto* sweep = app.add_subcommand("sweep", "hourly relative error over a daily load profile");
    sweep->add_option("--model-file", s_model, "trained regressor file")->required();
    sweep->add_option("--case", s_case, "case file")->required();
    sweep->add_option("--profile", s_profile, "24-value profile CSV (default: bundled curve)");
    sweep->add_option("--per-hour", s_per_hour, "jittered samples per hour");
    sweep->add_option("--jitter", s_jitter, "per-bus uniform jitter fraction");
    sweep->add_option("--seed", s_seed, "random seed");
    sweep->add_option("--out", s_out, "output CSV");

    // segment
    std::string k_model, k_data, k_outdir = ".";
    int k_k = 3;
    uint64_t k_seed = 0;
    auto* segment = app.add_subcommand("segment", "K-means segmentation of regression errors");
    segment->add_option("--model-file", k_model, "trained regressor file")->required();
    segment->add_option("--data", k_data, "test dataset CSV")->required();
    segment->add_option("--k", k_k, "segment count");
    segment->add_option("--seed", k_seed, "random seed");
    segment->add_option("--out-dir", k_outdir, "directory for residuals.csv and pca.csv");

    // solve
    std::string o_case, o_load;
    auto* solve = app.add_subcommand("solve", "one-shot exact OPF for a load vector");
    solve->add_option("--case", o_case, "case file")->required();
    solve->add_option("--load", o_load, "comma-separated per-bus loads")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (generate->parsed()) {
        CaseHandle c;
        if (int err = opfx_case_load(g_case.c_str(), &c.ptr)) return fail(err);
        DatasetHandle d;
        if (int err = opfx_generate(c.ptr, g_n, g_seed, g_workers, g_burn_in, g_thinning,
                                    g_alpha_min, g_alpha_max, &d.ptr))
            return fail(err);
        if (int err = opfx_dataset_save(d.ptr, g_out.c_str())) return fail(err);
        double frac = 0, mean_t = 0;
        opfx_dataset_feasible_fraction(d.ptr, &frac);
        opfx_dataset_mean_solve_time(d.ptr, &mean_t);
        std::printf("samples=%ld feasible_fraction=%.6f mean_solve_time=%.6es\n", g_n, frac,
                    mean_t);
        return 0;
    }

    if (train->parsed()) {
        DatasetHandle d;
        if (int err = opfx_dataset_load(t_data.c_str(), &d.ptr)) return fail(err);
        ModelHandle m;
        double t0 = now_s();
        if (int err = opfx_train(t_model.c_str(), d.ptr, t_seed, &m.ptr)) return fail(err);
        double train_s = now_s() - t0;
        if (int err = opfx_model_save(m.ptr, t_out.c_str())) return fail(err);
        int is_cls = 0;
        opfx_model_is_classifier(m.ptr, &is_cls);
        if (is_cls) {
            double acc = 0;
            if (int err = opfx_eval_classifier(m.ptr, d.ptr, &acc)) return fail(err);
            std::printf("model=%s training_accuracy=%.6f\n", t_model.c_str(), acc);
        } else {
            double mean = 0, sd = 0;
            if (int err = opfx_eval_regressor(m.ptr, d.ptr, &mean, &sd)) return fail(err);
            std::printf("model=%s training_error=%.9e\n", t_model.c_str(), mean);
        }
        std::fprintf(stderr, "training_seconds=%.3f\n", train_s);
        return 0;
    }

    if (eval->parsed()) {
        ModelHandle m;
        if (int err = opfx_model_load(e_model.c_str(), &m.ptr)) return fail(err);
        DatasetHandle d;
        if (int err = opfx_dataset_load(e_data.c_str(), &d.ptr)) return fail(err);
        int is_cls = 0;
        opfx_model_is_classifier(m.ptr, &is_cls);
        char kind[64] = {0};
        opfx_model_kind(m.ptr, kind, sizeof kind);

        std::string report = e_outdir + "/report.txt";
        FILE* rep = std::fopen(report.c_str(), "w");
        if (!rep) {
            std::fprintf(stderr, "error: cannot write %s\n", report.c_str());
            return 2;
        }
        std::fprintf(rep, "model_kind=%s\nseed=%llu\n", kind,
                     static_cast<unsigned long long>(e_seed));
        if (is_cls) {
            double acc = 0;
            if (int err = opfx_eval_classifier(m.ptr, d.ptr, &acc)) {
                std::fclose(rep);
                return fail(err);
            }
            std::fprintf(rep, "accuracy=%.17g\n", acc);
            std::printf("accuracy=%.6f\n", acc);
        } else {
            double mean = 0, sd = 0;
            if (int err = opfx_eval_regressor(m.ptr, d.ptr, &mean, &sd)) {
                std::fclose(rep);
                return fail(err);
            }
            std::fprintf(rep, "mean_relative_error=%.17g\nstd_relative_error=%.17g\n", mean, sd);
            std::printf("mean_relative_error=%.6e std=%.6e\n", mean, sd);
            std::string residuals = e_outdir + "/residuals.csv";
            if (int err = opfx_write_residuals(m.ptr, d.ptr, residuals.c_str(), 0, e_seed,
                                               nullptr)) {
                std::fclose(rep);
                return fail(err);
            }
        }
        if (!e_case.empty()) {
            CaseHandle c;
            if (int err = opfx_case_load(e_case.c_str(), &c.ptr)) {
                std::fclose(rep);
                return fail(err);
            }
            double gain = 0, exact_s = 0, pred_s = 0;
            if (int err = opfx_runtime_gain(m.ptr, c.ptr, d.ptr, &gain, &exact_s, &pred_s)) {
                std::fclose(rep);
                return fail(err);
            }
            std::fprintf(rep, "runtime_gain=%.17g\n", gain);
            std::printf("runtime_gain=%.3e\n", gain);
            char timing[160];
            std::snprintf(timing, sizeof timing,
                          "eval model=%s mean_exact_s=%.6e mean_predict_s=%.6e", kind, exact_s,
                          pred_s);
            append_timing_log(e_outdir, timing);
        }
        std::fclose(rep);
        return 0;
    }

    if (sweep->parsed()) {
        ModelHandle m;
        if (int err = opfx_model_load(s_model.c_str(), &m.ptr)) return fail(err);
        CaseHandle c;
        if (int err = opfx_case_load(s_case.c_str(), &c.ptr)) return fail(err);
        if (int err = opfx_sweep(m.ptr, c.ptr, s_profile.empty() ? nullptr : s_profile.c_str(),
                                 s_per_hour, s_jitter, s_seed, s_out.c_str()))
            return fail(err);
        std::printf("wrote %s\n", s_out.c_str());
        return 0;
    }

    if (segment->parsed()) {
        ModelHandle m;
        if (int err = opfx_model_load(k_model.c_str(), &m.ptr)) return fail(err);
        DatasetHandle d;
        if (int err = opfx_dataset_load(k_data.c_str(), &d.ptr)) return fail(err);
        std::string residuals = k_outdir + "/residuals.csv";
        std::string pca = k_outdir + "/pca.csv";
        if (int err = opfx_write_residuals(m.ptr, d.ptr, residuals.c_str(), k_k, k_seed,
                                           pca.c_str()))
            return fail(err);
        std::printf("wrote %s and %s\n", residuals.c_str(), pca.c_str());
        return 0;
    }

    if (solve->parsed()) {
        CaseHandle c;
        if (int err = opfx_case_load(o_case.c_str(), &c.ptr)) return fail(err);
        int nb = 0;
        opfx_case_num_buses(c.ptr, &nb);
        std::vector<double> load;
        try {
            load = parse_load_flag(o_load);
        } catch (const std::exception&) {
            std::fprintf(stderr, "error: --load must be comma-separated numbers\n");
            return 2;
        }
        if (static_cast<int>(load.size()) != nb) {
            std::fprintf(stderr, "error: --load has %zu entries, case has %d buses\n",
                         load.size(), nb);
            return 2;
        }
        int feasible = 0;
        double cost = 0;
        if (int err = opfx_solve(c.ptr, load.data(), nb, &feasible, &cost, nullptr, 0))
            return fail(err);
        if (feasible)
            std::printf("feasible=1 cost=%.9f\n", cost);
        else
            std::printf("feasible=0\n");
        return 0;
    }

    return 2;
}
