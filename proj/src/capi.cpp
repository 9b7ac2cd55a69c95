#include "opfproxy.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include "opfproxy/classify.hpp"
#include "opfproxy/dataset.hpp"
#include "opfproxy/eval.hpp"
#include "opfproxy/regress.hpp"

using namespace opfproxy;

struct opfx_case {
    NetworkCase net;
    DcModel model;
};

struct opfx_dataset {
    Dataset data;
};

struct opfx_model {
    std::optional<TrainedClassifier> classifier;
    std::optional<TrainedRegressor> regressor;

    std::string kind_name() const {
        return classifier ? classifier_kind_name(classifier->kind)
                          : regressor_kind_name(regressor->kind);
    }
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return OPFX_OK;
    } catch (const CaseError& e) {
        g_last_error = e.what();
        return OPFX_ERR_PARSE;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return OPFX_ERR_NUMERIC;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return OPFX_ERR_INVALID;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return OPFX_ERR_IO;
    }
}

int invalid(const char* msg) {
    g_last_error = msg;
    return OPFX_ERR_INVALID;
}

constexpr const char* kModelKinds =
    "trivial,gaussian_nb,logistic,decision_tree,random_forest,extra_trees,mlp,"
    "linear,piecewise_linear,gp_matern32,gp_ard_matern32,mlp_regressor";

opfx_model* train_any(const std::string& kind, const Dataset& train, uint64_t seed) {
    auto handle = std::make_unique<opfx_model>();
    bool is_classifier = false;
    for (auto k : {ClassifierKind::Trivial, ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                   ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
                   ClassifierKind::ExtraTrees, ClassifierKind::Mlp})
        if (classifier_kind_name(k) == kind) is_classifier = true;
    if (is_classifier) {
        ClassifierSpec spec;
        spec.kind = classifier_kind_from_name(kind);
        spec.seed = seed;
        handle->classifier = train_classifier(spec, train);
    } else {
        RegressorSpec spec;
        spec.kind = regressor_kind_from_name(kind);  // throws listing nothing; caller adds list
        spec.seed = seed;
        handle->regressor = train_regressor(spec, train);
    }
    return handle.release();
}

}  // namespace

extern "C" {

const char* opfx_last_error(void) { return g_last_error.c_str(); }

const char* opfx_model_kinds(void) { return kModelKinds; }

int opfx_case_load(const char* path, opfx_case** out) {
    if (!path || !out) return invalid("null argument");
    return guarded([&] {
        auto handle = std::make_unique<opfx_case>();
        handle->net = load_case_file(path);
        handle->model = build_dc_model(handle->net);
        *out = handle.release();
    });
}

int opfx_case_parse(const char* text, opfx_case** out) {
    if (!text || !out) return invalid("null argument");
    return guarded([&] {
        auto handle = std::make_unique<opfx_case>();
        handle->net = parse_case(text);
        handle->model = build_dc_model(handle->net);
        *out = handle.release();
    });
}

void opfx_case_free(opfx_case* handle) { delete handle; }

int opfx_case_num_buses(const opfx_case* handle, int* out) {
    if (!handle || !out) return invalid("null argument");
    *out = static_cast<int>(handle->net.buses.size());
    return OPFX_OK;
}

int opfx_case_nominal_load(const opfx_case* handle, double* out, int len) {
    if (!handle || !out) return invalid("null argument");
    Vec l = nominal_load_vector(handle->net);
    if (len != l.size()) return invalid("buffer length does not match bus count");
    std::memcpy(out, l.data(), sizeof(double) * len);
    return OPFX_OK;
}

int opfx_solve(const opfx_case* handle, const double* load, int len, int* feasible,
               double* cost, double* dispatch, int dispatch_len) {
    if (!handle || !load || !feasible || !cost) return invalid("null argument");
    return guarded([&] {
        Vec l = Eigen::Map<const Vec>(load, len);
        OpfOutcome out = solve_opf(handle->model, l);
        *feasible = out.feasible ? 1 : 0;
        *cost = out.feasible ? *out.cost : 0.0;
        if (dispatch) {
            if (dispatch_len != handle->model.gen_p_min.size())
                throw std::invalid_argument("dispatch buffer length mismatch");
            if (out.feasible)
                std::memcpy(dispatch, out.dispatch.data(), sizeof(double) * dispatch_len);
            else
                std::memset(dispatch, 0, sizeof(double) * dispatch_len);
        }
    });
}

int opfx_generate(const opfx_case* handle, long n, uint64_t seed, int workers, int burn_in,
                  int thinning, double alpha_min, double alpha_max, opfx_dataset** out) {
    if (!handle || !out) return invalid("null argument");
    return guarded([&] {
        SamplerConfig cfg;
        cfg.seed = seed;
        cfg.burn_in = burn_in;
        cfg.thinning = thinning;
        cfg.alpha_min = alpha_min;
        cfg.alpha_max = alpha_max;
        Polytope box = box_polytope(nominal_load_vector(handle->net), alpha_min, alpha_max);
        auto data = std::make_unique<opfx_dataset>();
        data->data = generate_dataset(handle->model, box, cfg, static_cast<int>(n), workers,
                                      handle->net.name);
        *out = data.release();
    });
}

int opfx_dataset_load(const char* path, opfx_dataset** out) {
    if (!path || !out) return invalid("null argument");
    return guarded([&] {
        auto data = std::make_unique<opfx_dataset>();
        data->data = load_dataset(path);
        *out = data.release();
    });
}

int opfx_dataset_save(const opfx_dataset* data, const char* path) {
    if (!data || !path) return invalid("null argument");
    return guarded([&] { save_dataset(data->data, path); });
}

void opfx_dataset_free(opfx_dataset* data) { delete data; }

int opfx_dataset_size(const opfx_dataset* data, long* out) {
    if (!data || !out) return invalid("null argument");
    *out = data->data.size();
    return OPFX_OK;
}

int opfx_dataset_dim(const opfx_dataset* data, int* out) {
    if (!data || !out) return invalid("null argument");
    *out = data->data.load_dim();
    return OPFX_OK;
}

int opfx_dataset_feasible_fraction(const opfx_dataset* data, double* out) {
    if (!data || !out) return invalid("null argument");
    *out = data->data.feasible_fraction();
    return OPFX_OK;
}

int opfx_dataset_mean_solve_time(const opfx_dataset* data, double* out) {
    if (!data || !out) return invalid("null argument");
    if (data->data.size() == 0) return invalid("empty dataset");
    double sum = 0.0;
    for (const auto& s : data->data.samples) sum += s.solve_time;
    *out = sum / data->data.size();
    return OPFX_OK;
}

int opfx_dataset_split(const opfx_dataset* data, double train_fraction, uint64_t seed,
                       opfx_dataset** train, opfx_dataset** test) {
    if (!data || !train || !test) return invalid("null argument");
    return guarded([&] {
        auto [tr, te] = split(data->data, train_fraction, seed);
        auto a = std::make_unique<opfx_dataset>();
        auto b = std::make_unique<opfx_dataset>();
        a->data = std::move(tr);
        b->data = std::move(te);
        *train = a.release();
        *test = b.release();
    });
}

int opfx_train(const char* kind, const opfx_dataset* train, uint64_t seed, opfx_model** out) {
    if (!kind || !train || !out) return invalid("null argument");
    std::string name = kind;
    bool known = false;
    for (std::string list = kModelKinds; !list.empty();) {
        auto comma = list.find(',');
        std::string item = list.substr(0, comma);
        if (item == name) known = true;
        if (comma == std::string::npos) break;
        list = list.substr(comma + 1);
    }
    if (!known) {
        g_last_error = "unknown model kind '" + name + "'; valid kinds: " + kModelKinds;
        return OPFX_ERR_INVALID;
    }
    return guarded([&] { *out = train_any(name, train->data, seed); });
}

int opfx_model_save(const opfx_model* model, const char* path) {
    if (!model || !path) return invalid("null argument");
    return guarded([&] {
        if (model->classifier) save_classifier(*model->classifier, path);
        else save_regressor(*model->regressor, path);
    });
}

int opfx_model_load(const char* path, opfx_model** out) {
    if (!path || !out) return invalid("null argument");
    return guarded([&] {
        auto handle = std::make_unique<opfx_model>();
        try {
            handle->classifier = load_classifier(path);
        } catch (const std::runtime_error&) {
            handle->regressor = load_regressor(path);
        }
        *out = handle.release();
    });
}

void opfx_model_free(opfx_model* model) { delete model; }

int opfx_model_is_classifier(const opfx_model* model, int* out) {
    if (!model || !out) return invalid("null argument");
    *out = model->classifier ? 1 : 0;
    return OPFX_OK;
}

int opfx_model_kind(const opfx_model* model, char* buf, int buflen) {
    if (!model || !buf) return invalid("null argument");
    std::string name = model->kind_name();
    if (buflen <= static_cast<int>(name.size())) return invalid("buffer too small");
    std::memcpy(buf, name.c_str(), name.size() + 1);
    return OPFX_OK;
}

int opfx_predict(const opfx_model* model, const double* load, int len, double* out) {
    if (!model || !load || !out) return invalid("null argument");
    return guarded([&] {
        Vec l = Eigen::Map<const Vec>(load, len);
        *out = model->classifier ? static_cast<double>(model->classifier->predict(l))
                                 : model->regressor->predict(l);
    });
}

int opfx_eval_classifier(const opfx_model* model, const opfx_dataset* test, double* accuracy) {
    if (!model || !test || !accuracy) return invalid("null argument");
    if (!model->classifier) return invalid("model is not a classifier");
    return guarded([&] { *accuracy = classification_accuracy(*model->classifier, test->data); });
}

int opfx_eval_regressor(const opfx_model* model, const opfx_dataset* test, double* mean,
                        double* stddev) {
    if (!model || !test || !mean || !stddev) return invalid("null argument");
    if (!model->regressor) return invalid("model is not a regressor");
    return guarded([&] {
        auto [m, s] = mean_relative_error(*model->regressor, test->data);
        *mean = m;
        *stddev = s;
    });
}

int opfx_runtime_gain(const opfx_model* model, const opfx_case* handle,
                      const opfx_dataset* test, double* gain, double* mean_exact_s,
                      double* mean_predict_s) {
    if (!model || !handle || !test || !gain) return invalid("null argument");
    return guarded([&] {
        std::function<double(const Vec&)> predictor;
        if (model->classifier) {
            const auto& c = *model->classifier;
            predictor = [&c](const Vec& l) { return static_cast<double>(c.predict(l)); };
        } else {
            const auto& r = *model->regressor;
            predictor = [&r](const Vec& l) { return r.predict(l); };
        }
        *gain = runtime_gain(predictor, handle->model, test->data, mean_exact_s,
                             mean_predict_s);
    });
}

int opfx_write_residuals(const opfx_model* model, const opfx_dataset* test, const char* path,
                         int segments, uint64_t seed, const char* pca_path) {
    if (!model || !test || !path) return invalid("null argument");
    if (!model->regressor) return invalid("residual export requires a regressor");
    return guarded([&] {
        const auto& r = *model->regressor;
        std::vector<double> truth, pred, errs;
        for (const auto& s : test->data.samples) {
            if (!s.feasible) continue;
            truth.push_back(*s.cost);
            pred.push_back(r.predict(s.load));
            errs.push_back(std::abs(pred.back() - truth.back()) / truth.back());
        }
        if (errs.empty()) throw std::invalid_argument("no feasible samples in test set");
        std::vector<int> labels;
        if (segments > 0) {
            auto seg = kmeans_segment(errs, segments, seed);
            labels = seg.labels;
        }
        write_residuals_csv(path, test->data, truth, pred, errs,
                            segments > 0 ? &labels : nullptr);
        if (pca_path) {
            Mat loads(errs.size(), test->data.load_dim());
            int row = 0;
            for (const auto& s : test->data.samples)
                if (s.feasible) loads.row(row++) = s.load.transpose();
            int dims = std::min<int>(3, test->data.load_dim());
            auto pca = pca_project(loads, dims);
            write_pca_csv(pca_path, pca.projected,
                          labels.empty() ? std::vector<int>(errs.size(), 0) : labels);
        }
    });
}

int opfx_sweep(const opfx_model* model, const opfx_case* handle, const char* profile_path,
               int per_hour_samples, double jitter, uint64_t seed, const char* out_csv) {
    if (!model || !handle || !out_csv) return invalid("null argument");
    if (!model->regressor) return invalid("profile sweep requires a regressor");
    return guarded([&] {
        DailyProfile profile = profile_path ? load_profile(profile_path) : default_profile();
        Vec peak = nominal_load_vector(handle->net);
        auto hourly = profile_sweep(*model->regressor, handle->model, profile, peak,
                                    per_hour_samples, seed, jitter);
        write_profile_csv(out_csv, hourly);
    });
}

}  // extern "C"
