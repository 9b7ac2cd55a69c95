#include "opfproxy/regress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "opfproxy/kmeans.hpp"
#include "opfproxy/qp.hpp"
#include "opfproxy/rng.hpp"

namespace opfproxy {

std::string regressor_kind_name(RegressorKind k) {
    switch (k) {
        case RegressorKind::Linear: return "linear";
        case RegressorKind::PiecewiseLinear: return "piecewise_linear";
        case RegressorKind::GpMatern32: return "gp_matern32";
        case RegressorKind::GpArdMatern32: return "gp_ard_matern32";
        case RegressorKind::Mlp: return "mlp_regressor";
    }
    return "?";
}

RegressorKind regressor_kind_from_name(const std::string& name) {
    for (auto k : {RegressorKind::Linear, RegressorKind::PiecewiseLinear,
                   RegressorKind::GpMatern32, RegressorKind::GpArdMatern32, RegressorKind::Mlp})
        if (regressor_kind_name(k) == name) return k;
    throw std::invalid_argument("unknown regressor kind: " + name);
}

double matern32(const Vec& a, const Vec& b, const Vec& lengthscale, double signal2) {
    double r2 = 0.0;
    if (lengthscale.size() == 1) {
        r2 = (a - b).squaredNorm() / (lengthscale[0] * lengthscale[0]);
    } else {
        for (int j = 0; j < a.size(); ++j) {
            double t = (a[j] - b[j]) / lengthscale[j];
            r2 += t * t;
        }
    }
    double sr = std::sqrt(3.0 * r2);
    return signal2 * (1.0 + sr) * std::exp(-sr);
}

namespace {

Vec ols(const Mat& x_raw, const Vec& y, bool signal_singular) {
    const int n = static_cast<int>(x_raw.rows());
    const int d = static_cast<int>(x_raw.cols());

    // constant columns (pinned zero-load buses) carry no information and
    // would make the design singular; the intercept absorbs them
    std::vector<int> varying;
    for (int j = 0; j < d; ++j)
        if ((x_raw.col(j).array() - x_raw(0, j)).abs().maxCoeff() > 0.0) varying.push_back(j);

    const int dv = static_cast<int>(varying.size());
    Mat xa(n, dv + 1);
    xa.col(0).setOnes();
    for (int j = 0; j < dv; ++j) xa.col(j + 1) = x_raw.col(varying[j]);
    Eigen::ColPivHouseholderQR<Mat> qr(xa);
    if (signal_singular && qr.rank() < dv + 1)
        throw NumericError("singular normal system in least squares (rank " +
                           std::to_string(qr.rank()) + " of " + std::to_string(dv + 1) + ")");
    Vec reduced = qr.solve(y);
    Vec beta = Vec::Zero(d + 1);
    beta[0] = reduced[0];
    for (int j = 0; j < dv; ++j) beta[varying[j] + 1] = reduced[j + 1];
    return beta;
}

Mat kernel_matrix(const Mat& x, const Vec& lengthscale, double signal2, double jitter) {
    const int n = static_cast<int>(x.rows());
    Mat k(n, n);
    for (int i = 0; i < n; ++i) {
        k(i, i) = signal2 + jitter;
        for (int j = i + 1; j < n; ++j) {
            double v = matern32(x.row(i).transpose(), x.row(j).transpose(), lengthscale, signal2);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

struct GpFit {
    Vec alpha;
    double jitter_used = 0.0;
    double log_marginal = 0.0;
};

GpFit gp_fit(const Mat& x, const Vec& y, const Vec& lengthscale, double signal2,
             double jitter0) {
    const int n = static_cast<int>(x.rows());
    double jitter = jitter0;
    while (true) {
        Mat k = kernel_matrix(x, lengthscale, signal2, jitter);
        Eigen::LLT<Mat> llt(std::move(k));
        if (llt.info() == Eigen::Success) {
            GpFit fit;
            fit.alpha = llt.solve(y);
            fit.jitter_used = jitter;
            double logdet = llt.matrixLLT().diagonal().array().log().sum();
            fit.log_marginal = -0.5 * y.dot(fit.alpha) - logdet - 0.5 * n * std::log(2.0 * M_PI);
            return fit;
        }
        if (jitter >= 1e-4)
            throw NumericError("kernel matrix not positive definite after jitter escalation to 1e-4");
        jitter = std::max(jitter * 10.0, 1e-12);
    }
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 1.0;
    size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

}  // namespace

TrainedRegressor train_regressor(const RegressorSpec& spec, const Dataset& train) {
    const int d = train.load_dim();
    std::vector<int> feas;
    for (int i = 0; i < train.size(); ++i)
        if (train.samples[i].feasible) feas.push_back(i);
    if (static_cast<int>(feas.size()) < d + 1)
        throw std::invalid_argument("need at least d+1 = " + std::to_string(d + 1) +
                                    " feasible samples, got " + std::to_string(feas.size()));
    const int n = static_cast<int>(feas.size());

    Mat x_raw(n, d);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        x_raw.row(i) = train.samples[feas[i]].load.transpose();
        y[i] = *train.samples[feas[i]].cost;
    }
    if (!x_raw.allFinite() || !y.allFinite())
        throw std::invalid_argument("non-finite value in training data");

    TrainedRegressor model;
    model.kind = spec.kind;
    model.dim = d;
    model.standardizer.fit(x_raw);
    model.y_mean = y.mean();
    model.y_scale = std::sqrt((y.array() - model.y_mean).square().mean());
    if (model.y_scale <= 0) model.y_scale = 1.0;

    switch (spec.kind) {
        case RegressorKind::Linear: {
            model.beta = ols(x_raw, y, true);
            break;
        }
        case RegressorKind::PiecewiseLinear: {
            Mat xs = model.standardizer.apply(x_raw);
            auto km = kmeans(xs, spec.segments, spec.seed);
            model.segment_centroids = km.centroids;
            model.segment_beta.resize(spec.segments);
            for (int c = 0; c < spec.segments; ++c) {
                std::vector<int> members;
                for (int i = 0; i < n; ++i)
                    if (km.labels[i] == c) members.push_back(i);
                if (members.empty()) {
                    model.segment_beta[c] = Vec::Zero(d + 1);
                    model.segment_beta[c][0] = model.y_mean;
                    continue;
                }
                Mat xc(members.size(), d);
                Vec yc(members.size());
                for (size_t i = 0; i < members.size(); ++i) {
                    xc.row(i) = x_raw.row(members[i]);
                    yc[i] = y[members[i]];
                }
                model.segment_beta[c] = ols(xc, yc, false);
            }
            break;
        }
        case RegressorKind::GpMatern32:
        case RegressorKind::GpArdMatern32: {
            Mat xs = model.standardizer.apply(x_raw);
            Vec yz = (y.array() - model.y_mean) / model.y_scale;

            // uniform subsample when the set exceeds the scalability cap
            std::vector<int> keep(n);
            std::iota(keep.begin(), keep.end(), 0);
            if (n > spec.gp_max_points) {
                Rng rng(derive_seed(spec.seed, 0x6770));
                std::shuffle(keep.begin(), keep.end(), rng);
                keep.resize(spec.gp_max_points);
                std::sort(keep.begin(), keep.end());
            }
            Mat xk(keep.size(), d);
            Vec yk(keep.size());
            for (size_t i = 0; i < keep.size(); ++i) {
                xk.row(i) = xs.row(keep[i]);
                yk[i] = yz[keep[i]];
            }
            const int nk = static_cast<int>(keep.size());

            // lengthscale base: median pairwise distance on a capped subset
            int nd = std::min(nk, 1000);
            Vec base;
            {
                std::vector<double> dist;
                dist.reserve(static_cast<size_t>(nd) * (nd - 1) / 2);
                if (spec.kind == RegressorKind::GpMatern32) {
                    for (int i = 0; i < nd; ++i)
                        for (int j = i + 1; j < nd; ++j)
                            dist.push_back((xk.row(i) - xk.row(j)).norm());
                    base = Vec::Constant(1, std::max(median_of(std::move(dist)), 1e-3));
                } else {
                    base.resize(d);
                    for (int c = 0; c < d; ++c) {
                        std::vector<double> dc;
                        dc.reserve(static_cast<size_t>(nd) * (nd - 1) / 2);
                        for (int i = 0; i < nd; ++i)
                            for (int j = i + 1; j < nd; ++j)
                                dc.push_back(std::abs(xk(i, c) - xk(j, c)));
                        base[c] = std::max(median_of(std::move(dc)), 1e-3);
                    }
                }
            }

            // log-grid of shared multipliers; marginal likelihood scored on a
            // capped subset, final factorization on the full kept set
            const double signal2 = 1.0;  // z-scored target variance
            int ng = std::min(nk, 2000);
            Mat xg = xk.topRows(ng);
            Vec yg = yk.head(ng);
            double best_mult = 1.0, best_lml = -std::numeric_limits<double>::infinity();
            for (int g = 0; g < spec.gp_grid_points; ++g) {
                double t = spec.gp_grid_points == 1
                               ? 0.0
                               : -1.0 + 2.0 * g / (spec.gp_grid_points - 1);
                double mult = std::pow(8.0, t);
                GpFit fit = gp_fit(xg, yg, base * mult, signal2, spec.jitter);
                if (fit.log_marginal > best_lml) {
                    best_lml = fit.log_marginal;
                    best_mult = mult;
                }
            }

            model.gp_lengthscale = base * best_mult;
            model.gp_signal2 = signal2;
            GpFit fit = gp_fit(xk, yk, model.gp_lengthscale, signal2, spec.jitter);
            model.gp_inputs = std::move(xk);
            model.gp_alpha = std::move(fit.alpha);
            model.gp_jitter_used = fit.jitter_used;
            break;
        }
        case RegressorKind::Mlp: {
            Mat xs = model.standardizer.apply(x_raw);
            Vec yz = (y.array() - model.y_mean) / model.y_scale;
            MlpConfig cfg = spec.mlp;
            cfg.classifier = false;
            cfg.seed = spec.seed;
            model.net = train_mlp(xs, yz, cfg);
            break;
        }
    }
    return model;
}

double TrainedRegressor::predict(const Vec& load) const {
    if (load.size() != dim)
        throw std::invalid_argument("load dimension mismatch: got " +
                                    std::to_string(load.size()) + ", model expects " +
                                    std::to_string(dim));
    switch (kind) {
        case RegressorKind::Linear:
            return beta[0] + beta.tail(dim).dot(load);
        case RegressorKind::PiecewiseLinear: {
            Vec xs = standardizer.apply(load);
            int best = 0;
            double best_d = (xs.transpose() - segment_centroids.row(0)).squaredNorm();
            for (int c = 1; c < segment_centroids.rows(); ++c) {
                double dd = (xs.transpose() - segment_centroids.row(c)).squaredNorm();
                if (dd < best_d) { best_d = dd; best = c; }
            }
            return segment_beta[best][0] + segment_beta[best].tail(dim).dot(load);
        }
        case RegressorKind::GpMatern32:
        case RegressorKind::GpArdMatern32: {
            Vec xs = standardizer.apply(load);
            double mean = 0.0;
            for (int i = 0; i < gp_inputs.rows(); ++i)
                mean += gp_alpha[i] *
                        matern32(xs, gp_inputs.row(i).transpose(), gp_lengthscale, gp_signal2);
            return mean * y_scale + y_mean;
        }
        case RegressorKind::Mlp:
            return net.forward(standardizer.apply(load)) * y_scale + y_mean;
    }
    return y_mean;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_vec(std::ostream& out, const char* key, const Vec& v) {
    out << key << "=";
    for (int i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt_double(v[i]);
    out << "\n";
}

void write_mat(std::ostream& out, const char* key, const Mat& m) {
    out << key << "=" << m.rows() << " " << m.cols() << "\n";
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) out << (j ? " " : "") << fmt_double(m(i, j));
        out << "\n";
    }
}

Vec read_vec(const std::string& line) {
    std::stringstream ss(line);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    return Eigen::Map<Vec>(vals.data(), vals.size());
}

Mat read_mat(std::istream& in, const std::string& shape) {
    std::stringstream hs(shape);
    int rows, cols;
    hs >> rows >> cols;
    Mat m(rows, cols);
    std::string line;
    for (int i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated matrix in model file");
        std::stringstream ss(line);
        for (int j = 0; j < cols; ++j) ss >> m(i, j);
    }
    return m;
}

}  // namespace

void save_regressor(const TrainedRegressor& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << "model_type=regressor\n";
    out << "kind=" << regressor_kind_name(m.kind) << "\n";
    out << "dim=" << m.dim << "\n";
    write_vec(out, "x_mean", m.standardizer.mean);
    write_vec(out, "x_scale", m.standardizer.scale);
    out << "y_mean=" << fmt_double(m.y_mean) << "\n";
    out << "y_scale=" << fmt_double(m.y_scale) << "\n";
    switch (m.kind) {
        case RegressorKind::Linear:
            write_vec(out, "beta", m.beta);
            break;
        case RegressorKind::PiecewiseLinear:
            write_mat(out, "centroids", m.segment_centroids);
            for (const auto& b : m.segment_beta) write_vec(out, "segment_beta", b);
            break;
        case RegressorKind::GpMatern32:
        case RegressorKind::GpArdMatern32:
            out << "signal2=" << fmt_double(m.gp_signal2) << "\n";
            out << "jitter_used=" << fmt_double(m.gp_jitter_used) << "\n";
            write_vec(out, "lengthscale", m.gp_lengthscale);
            write_vec(out, "alpha", m.gp_alpha);
            write_mat(out, "inputs", m.gp_inputs);
            break;
        case RegressorKind::Mlp:
            out << "hidden=" << m.net.w1.rows() << "\n";
            write_vec(out, "theta", m.net.flatten());
            break;
    }
}

TrainedRegressor load_regressor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string line;
    auto next_kv = [&](std::string& key, std::string& val) {
        if (!std::getline(in, line)) return false;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("malformed model file: " + line);
        key = line.substr(0, eq);
        val = line.substr(eq + 1);
        return true;
    };

    TrainedRegressor m;
    std::string key, val;
    if (!next_kv(key, val) || key != "model_type" || val != "regressor")
        throw std::runtime_error("not a regressor model file: " + path);
    while (next_kv(key, val)) {
        if (key == "kind") m.kind = regressor_kind_from_name(val);
        else if (key == "dim") m.dim = std::stoi(val);
        else if (key == "x_mean") m.standardizer.mean = read_vec(val);
        else if (key == "x_scale") m.standardizer.scale = read_vec(val);
        else if (key == "y_mean") m.y_mean = std::stod(val);
        else if (key == "y_scale") m.y_scale = std::stod(val);
        else if (key == "beta") m.beta = read_vec(val);
        else if (key == "centroids") m.segment_centroids = read_mat(in, val);
        else if (key == "segment_beta") m.segment_beta.push_back(read_vec(val));
        else if (key == "signal2") m.gp_signal2 = std::stod(val);
        else if (key == "jitter_used") m.gp_jitter_used = std::stod(val);
        else if (key == "lengthscale") m.gp_lengthscale = read_vec(val);
        else if (key == "alpha") m.gp_alpha = read_vec(val);
        else if (key == "inputs") m.gp_inputs = read_mat(in, val);
        else if (key == "hidden") {
            m.net.classifier = false;
            m.net.w1.resize(std::stoi(val), m.dim);
            m.net.b1.resize(m.net.w1.rows());
            m.net.w2.resize(m.net.w1.rows());
        } else if (key == "theta") {
            m.net.unflatten(read_vec(val));
        } else {
            throw std::runtime_error("unknown key in model file: " + key);
        }
    }
    return m;
}

}  // namespace opfproxy
