/* C API for the OPF proxy library.
 *
 * All functions return OPFX_OK (0) on success or a nonzero error code;
 * opfx_last_error() describes the most recent failure on the calling
 * thread. Handles are opaque and must be released with the matching
 * _free function. Handles are immutable after creation and safe to share
 * across threads for read access.
 */
#ifndef OPFPROXY_H
#define OPFPROXY_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct opfx_case opfx_case;
typedef struct opfx_dataset opfx_dataset;
typedef struct opfx_model opfx_model;

enum {
    OPFX_OK = 0,
    OPFX_ERR_INVALID = 1, /* bad argument or precondition */
    OPFX_ERR_PARSE = 2,   /* case/dataset/model file malformed */
    OPFX_ERR_NUMERIC = 3, /* solver or factorization failure */
    OPFX_ERR_IO = 4,      /* file not readable/writable */
};

const char* opfx_last_error(void);

/* ---- network cases ---- */
int opfx_case_load(const char* path, opfx_case** out);
int opfx_case_parse(const char* text, opfx_case** out);
void opfx_case_free(opfx_case* handle);
int opfx_case_num_buses(const opfx_case* handle, int* out);
int opfx_case_nominal_load(const opfx_case* handle, double* out, int len);

/* One-shot exact OPF: feasible set to 0/1, cost valid only when feasible.
 * dispatch may be NULL; otherwise dispatch_len must equal the generator
 * count. */
int opfx_solve(const opfx_case* handle, const double* load, int len, int* feasible,
               double* cost, double* dispatch, int dispatch_len);

/* ---- datasets ---- */
int opfx_generate(const opfx_case* handle, long n, uint64_t seed, int workers, int burn_in,
                  int thinning, double alpha_min, double alpha_max, opfx_dataset** out);
int opfx_dataset_load(const char* path, opfx_dataset** out);
int opfx_dataset_save(const opfx_dataset* data, const char* path);
void opfx_dataset_free(opfx_dataset* data);
int opfx_dataset_size(const opfx_dataset* data, long* out);
int opfx_dataset_dim(const opfx_dataset* data, int* out);
int opfx_dataset_feasible_fraction(const opfx_dataset* data, double* out);
int opfx_dataset_mean_solve_time(const opfx_dataset* data, double* out);
int opfx_dataset_split(const opfx_dataset* data, double train_fraction, uint64_t seed,
                       opfx_dataset** train, opfx_dataset** test);

/* ---- models ----
 * kind is one of the 12 model names; opfx_model_kinds() returns them as a
 * static comma-separated list. */
const char* opfx_model_kinds(void);
int opfx_train(const char* kind, const opfx_dataset* train, uint64_t seed, opfx_model** out);
int opfx_model_save(const opfx_model* model, const char* path);
int opfx_model_load(const char* path, opfx_model** out);
void opfx_model_free(opfx_model* model);
int opfx_model_is_classifier(const opfx_model* model, int* out);
int opfx_model_kind(const opfx_model* model, char* buf, int buflen);

/* Prediction: classifiers write 0/1, regressors the predicted cost. */
int opfx_predict(const opfx_model* model, const double* load, int len, double* out);

/* ---- evaluation ---- */
int opfx_eval_classifier(const opfx_model* model, const opfx_dataset* test, double* accuracy);
int opfx_eval_regressor(const opfx_model* model, const opfx_dataset* test, double* mean,
                        double* stddev);
int opfx_runtime_gain(const opfx_model* model, const opfx_case* handle,
                      const opfx_dataset* test, double* gain, double* mean_exact_s,
                      double* mean_predict_s);

/* residuals.csv (and optionally pca.csv) for a regressor on a test set;
 * segments > 0 adds a K-means segment column. pca_path may be NULL. */
int opfx_write_residuals(const opfx_model* model, const opfx_dataset* test, const char* path,
                         int segments, uint64_t seed, const char* pca_path);

/* 24-row hourly sweep CSV; profile_path NULL selects the bundled profile. */
int opfx_sweep(const opfx_model* model, const opfx_case* handle, const char* profile_path,
               int per_hour_samples, double jitter, uint64_t seed, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* OPFPROXY_H */
