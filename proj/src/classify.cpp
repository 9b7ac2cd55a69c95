#include "opfproxy/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "opfproxy/rng.hpp"

namespace opfproxy {

std::string classifier_kind_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::Trivial: return "trivial";
        case ClassifierKind::GaussianNB: return "gaussian_nb";
        case ClassifierKind::Logistic: return "logistic";
        case ClassifierKind::DecisionTree: return "decision_tree";
        case ClassifierKind::RandomForest: return "random_forest";
        case ClassifierKind::ExtraTrees: return "extra_trees";
        case ClassifierKind::Mlp: return "mlp";
    }
    return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
    for (auto k : {ClassifierKind::Trivial, ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                   ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
                   ClassifierKind::ExtraTrees, ClassifierKind::Mlp})
        if (classifier_kind_name(k) == name) return k;
    throw std::invalid_argument("unknown classifier kind: " + name);
}

void Standardizer::fit(const Mat& x) {
    mean = x.colwise().mean();
    Vec var = (x.rowwise() - mean.transpose()).array().square().colwise().mean();
    scale = var.array().sqrt();
    for (int j = 0; j < scale.size(); ++j)
        if (scale[j] <= 0) scale[j] = 1.0;
}

Vec Standardizer::apply(const Vec& x) const {
    return (x - mean).cwiseQuotient(scale);
}

Mat Standardizer::apply(const Mat& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

int Tree::predict(const Vec& x) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    return nodes[node].label;
}

namespace {

struct TreeParams {
    int max_depth = 0;       // 0 = unlimited
    int max_features = 0;    // 0 = all
    bool random_thresholds = false;  // extra-trees mode
};

double gini(int c0, int c1) {
    int n = c0 + c1;
    if (n == 0) return 0.0;
    double p1 = static_cast<double>(c1) / n;
    return 2.0 * p1 * (1.0 - p1);
}

int grow_node(Tree& tree, const Mat& x, const std::vector<int>& y, std::vector<int>& idx,
              int begin, int end, int depth, const TreeParams& params, Rng& rng) {
    const int size = end - begin;
    int c1 = 0;
    for (int i = begin; i < end; ++i) c1 += y[idx[i]];
    const int c0 = size - c1;

    auto make_leaf = [&] {
        TreeNode leaf;
        leaf.label = c1 >= c0 ? 1 : 0;
        leaf.value = static_cast<double>(c1) / size;
        tree.nodes.push_back(leaf);
        return static_cast<int>(tree.nodes.size()) - 1;
    };

    if (size < 2 || c0 == 0 || c1 == 0) return make_leaf();
    if (params.max_depth > 0 && depth >= params.max_depth) return make_leaf();

    const int d = static_cast<int>(x.cols());
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (params.max_features > 0 && params.max_features < d) {
        std::shuffle(features.begin(), features.end(), rng);
        features.resize(params.max_features);
        std::sort(features.begin(), features.end());
    }

    const double parent = gini(c0, c1);
    double best_gain = 1e-15;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<int> order(idx.begin() + begin, idx.begin() + end);
    for (int f : features) {
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return x(a, f) < x(b, f); });
        if (params.random_thresholds) {
            double lo = x(order.front(), f), hi = x(order.back(), f);
            if (hi <= lo) continue;
            std::uniform_real_distribution<double> u(lo, hi);
            double thr = u(rng);
            int l0 = 0, l1 = 0;
            for (int i : order) {
                if (x(i, f) <= thr) { l1 += y[i]; ++l0; }
            }
            int left1 = l1, left_n = l0;
            int left0 = left_n - left1;
            int right0 = c0 - left0, right1 = c1 - left1;
            if (left_n == 0 || left_n == size) continue;
            double gain = parent - (static_cast<double>(left_n) / size) * gini(left0, left1) -
                          (static_cast<double>(size - left_n) / size) * gini(right0, right1);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = thr;
            }
        } else {
            // midpoints between consecutive distinct sorted values; ties keep
            // the lowest (feature, threshold) candidate
            int left0 = 0, left1 = 0;
            for (int i = 0; i + 1 < size; ++i) {
                left1 += y[order[i]];
                left0 += 1 - y[order[i]];
                double a = x(order[i], f), b = x(order[i + 1], f);
                if (b <= a) continue;
                double thr = 0.5 * (a + b);
                int ln = i + 1;
                double gain = parent - (static_cast<double>(ln) / size) * gini(left0, left1) -
                              (static_cast<double>(size - ln) / size) *
                                  gini(c0 - left0, c1 - left1);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = thr;
                }
            }
        }
    }

    if (best_feature < 0) return make_leaf();

    auto mid = std::partition(idx.begin() + begin, idx.begin() + end,
                              [&](int i) { return x(i, best_feature) <= best_threshold; });
    int split = static_cast<int>(mid - idx.begin());
    if (split == begin || split == end) return make_leaf();

    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[self].feature = best_feature;
    tree.nodes[self].threshold = best_threshold;
    int left = grow_node(tree, x, y, idx, begin, split, depth + 1, params, rng);
    int right = grow_node(tree, x, y, idx, split, end, depth + 1, params, rng);
    tree.nodes[self].left = left;
    tree.nodes[self].right = right;
    return self;
}

Tree grow_tree(const Mat& x, const std::vector<int>& y, const std::vector<int>& sample_idx,
               const TreeParams& params, uint64_t seed) {
    Tree tree;
    Rng rng(seed);
    std::vector<int> idx = sample_idx;
    grow_node(tree, x, y, idx, 0, static_cast<int>(idx.size()), 0, params, rng);
    return tree;
}

Vec sigmoid_vec(const Vec& z) {
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

TrainedClassifier train_classifier(const ClassifierSpec& spec, const Dataset& train) {
    if (train.size() == 0) throw std::invalid_argument("empty training set");
    const int n = train.size();
    const int d = train.load_dim();

    Mat x_raw = train.load_matrix();
    if (!x_raw.allFinite()) throw std::invalid_argument("non-finite feature in training data");
    std::vector<int> y(n);
    int n1 = 0;
    for (int i = 0; i < n; ++i) {
        y[i] = train.samples[i].feasible ? 1 : 0;
        n1 += y[i];
    }

    TrainedClassifier model;
    model.kind = spec.kind;
    model.dim = d;
    model.standardizer.fit(x_raw);

    if (spec.kind == ClassifierKind::Trivial) {
        model.constant_label = 1;
        return model;
    }
    if (n1 == 0 || n1 == n) {
        // single observed class: constant predictor for every kind
        model.constant_label = n1 == n ? 1 : 0;
        return model;
    }

    Mat x = model.standardizer.apply(x_raw);

    switch (spec.kind) {
        case ClassifierKind::GaussianNB: {
            model.nb_prior.resize(2);
            model.nb_mean = Mat::Zero(2, d);
            model.nb_var = Mat::Zero(2, d);
            model.nb_prior[0] = static_cast<double>(n - n1) / n;
            model.nb_prior[1] = static_cast<double>(n1) / n;
            for (int i = 0; i < n; ++i) model.nb_mean.row(y[i]) += x.row(i);
            model.nb_mean.row(0) /= (n - n1);
            model.nb_mean.row(1) /= n1;
            for (int i = 0; i < n; ++i)
                model.nb_var.row(y[i]) +=
                    (x.row(i) - model.nb_mean.row(y[i])).array().square().matrix();
            model.nb_var.row(0) /= (n - n1);
            model.nb_var.row(1) /= n1;
            model.nb_var = model.nb_var.cwiseMax(1e-9);  // variance floor
            break;
        }
        case ClassifierKind::Logistic: {
            // IRLS with L2 on the weights, intercept unpenalized
            Mat xa(n, d + 1);
            xa.col(0).setOnes();
            xa.rightCols(d) = x;
            Vec w = Vec::Zero(d + 1);
            Vec yv(n);
            for (int i = 0; i < n; ++i) yv[i] = y[i];
            Vec penalty = Vec::Constant(d + 1, spec.logistic_l2);
            penalty[0] = 0.0;
            for (int it = 0; it < 100; ++it) {
                Vec p = sigmoid_vec(xa * w);
                Vec r = (p.array() * (1.0 - p.array())).cwiseMax(1e-10);
                Mat h = xa.transpose() * r.asDiagonal() * xa;
                h += penalty.asDiagonal();
                Vec g = xa.transpose() * (yv - p) - penalty.cwiseProduct(w);
                Vec step = h.ldlt().solve(g);
                w += step;
                if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
            }
            model.logit_intercept = w[0];
            model.logit_weights = w.tail(d);
            break;
        }
        case ClassifierKind::DecisionTree:
        case ClassifierKind::RandomForest:
        case ClassifierKind::ExtraTrees: {
            TreeParams params;
            params.max_depth = spec.max_depth;
            bool forest = spec.kind != ClassifierKind::DecisionTree;
            int trees = forest ? spec.n_trees : 1;
            if (forest) {
                params.max_features =
                    spec.max_features < 0
                        ? std::max(1, static_cast<int>(std::floor(std::sqrt(double(d)))))
                        : spec.max_features;
            }
            params.random_thresholds = spec.kind == ClassifierKind::ExtraTrees;
            bool bootstrap = spec.kind == ClassifierKind::RandomForest && spec.bootstrap;

            std::vector<int> base(n);
            std::iota(base.begin(), base.end(), 0);
            for (int t = 0; t < trees; ++t) {
                uint64_t tree_seed = derive_seed(spec.seed, static_cast<uint64_t>(t));
                std::vector<int> sample = base;
                if (bootstrap) {
                    Rng rng(splitmix64(tree_seed));
                    std::uniform_int_distribution<int> pick(0, n - 1);
                    for (int i = 0; i < n; ++i) sample[i] = pick(rng);
                }
                model.trees.push_back(grow_tree(x, y, sample, params, tree_seed));
            }
            break;
        }
        case ClassifierKind::Mlp: {
            MlpConfig cfg = spec.mlp;
            cfg.classifier = true;
            cfg.seed = spec.seed;
            Vec yv(n);
            for (int i = 0; i < n; ++i) yv[i] = y[i];
            model.net = train_mlp(x, yv, cfg);
            break;
        }
        default:
            break;
    }
    return model;
}

int TrainedClassifier::predict(const Vec& load) const {
    if (load.size() != dim && constant_label < 0)
        throw std::invalid_argument("load dimension mismatch: got " +
                                    std::to_string(load.size()) + ", model expects " +
                                    std::to_string(dim));
    if (constant_label >= 0) return constant_label;

    Vec x = standardizer.apply(load);
    switch (kind) {
        case ClassifierKind::GaussianNB: {
            double score = std::log(nb_prior[1]) - std::log(nb_prior[0]);
            for (int j = 0; j < dim; ++j) {
                auto log_n = [&](int c) {
                    double v = nb_var(c, j);
                    double diff = x[j] - nb_mean(c, j);
                    return -0.5 * std::log(2.0 * M_PI * v) - 0.5 * diff * diff / v;
                };
                score += log_n(1) - log_n(0);
            }
            return score >= 0 ? 1 : 0;
        }
        case ClassifierKind::Logistic: {
            double z = logit_weights.dot(x) + logit_intercept;
            return z >= 0 ? 1 : 0;  // sigma(z) >= 0.5, tie maps to 1
        }
        case ClassifierKind::DecisionTree:
            return trees[0].predict(x);
        case ClassifierKind::RandomForest:
        case ClassifierKind::ExtraTrees: {
            int votes = 0;
            for (const auto& t : trees) votes += t.predict(x);
            return 2 * votes >= static_cast<int>(trees.size()) ? 1 : 0;
        }
        case ClassifierKind::Mlp:
            return net.forward(x) >= 0.5 ? 1 : 0;
        default:
            return 1;
    }
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

Vec read_vec(const std::string& line) {
    std::stringstream ss(line);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    return Eigen::Map<Vec>(vals.data(), vals.size());
}

}  // namespace

void save_classifier(const TrainedClassifier& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << "model_type=classifier\n";
    out << "kind=" << classifier_kind_name(m.kind) << "\n";
    out << "dim=" << m.dim << "\n";
    out << "constant_label=" << m.constant_label << "\n";
    if (m.dim > 0) {
        write_vec(out, "x_mean", m.standardizer.mean);
        write_vec(out, "x_scale", m.standardizer.scale);
    }
    switch (m.kind) {
        case ClassifierKind::GaussianNB:
            if (m.constant_label < 0) {
                write_vec(out, "nb_prior", m.nb_prior);
                write_vec(out, "nb_mean0", m.nb_mean.row(0));
                write_vec(out, "nb_mean1", m.nb_mean.row(1));
                write_vec(out, "nb_var0", m.nb_var.row(0));
                write_vec(out, "nb_var1", m.nb_var.row(1));
            }
            break;
        case ClassifierKind::Logistic:
            if (m.constant_label < 0) {
                write_vec(out, "weights", m.logit_weights);
                out << "intercept=" << fmt_double(m.logit_intercept) << "\n";
            }
            break;
        case ClassifierKind::DecisionTree:
        case ClassifierKind::RandomForest:
        case ClassifierKind::ExtraTrees:
            out << "tree_count=" << m.trees.size() << "\n";
            for (const auto& t : m.trees) {
                out << "tree=" << t.nodes.size() << "\n";
                for (const auto& nd : t.nodes)
                    out << nd.feature << " " << fmt_double(nd.threshold) << " " << nd.left << " "
                        << nd.right << " " << nd.label << " " << fmt_double(nd.value) << "\n";
            }
            break;
        case ClassifierKind::Mlp:
            if (m.constant_label < 0) {
                out << "hidden=" << m.net.w1.rows() << "\n";
                write_vec(out, "theta", m.net.flatten());
            }
            break;
        default:
            break;
    }
}

TrainedClassifier load_classifier(const std::string& path) {
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

    TrainedClassifier m;
    std::string key, val;
    if (!next_kv(key, val) || key != "model_type" || val != "classifier")
        throw std::runtime_error("not a classifier model file: " + path);
    while (next_kv(key, val)) {
        if (key == "kind") m.kind = classifier_kind_from_name(val);
        else if (key == "dim") m.dim = std::stoi(val);
        else if (key == "constant_label") m.constant_label = std::stoi(val);
        else if (key == "x_mean") m.standardizer.mean = read_vec(val);
        else if (key == "x_scale") m.standardizer.scale = read_vec(val);
        else if (key == "nb_prior") m.nb_prior = read_vec(val);
        else if (key == "nb_mean0") { m.nb_mean.resize(2, m.dim); m.nb_mean.row(0) = read_vec(val); }
        else if (key == "nb_mean1") m.nb_mean.row(1) = read_vec(val);
        else if (key == "nb_var0") { m.nb_var.resize(2, m.dim); m.nb_var.row(0) = read_vec(val); }
        else if (key == "nb_var1") m.nb_var.row(1) = read_vec(val);
        else if (key == "weights") m.logit_weights = read_vec(val);
        else if (key == "intercept") m.logit_intercept = std::stod(val);
        else if (key == "tree_count") m.trees.reserve(std::stoul(val));
        else if (key == "tree") {
            Tree t;
            int count = std::stoi(val);
            for (int i = 0; i < count; ++i) {
                if (!std::getline(in, line))
                    throw std::runtime_error("truncated tree in model file");
                std::stringstream ss(line);
                TreeNode nd;
                ss >> nd.feature >> nd.threshold >> nd.left >> nd.right >> nd.label >> nd.value;
                t.nodes.push_back(nd);
            }
            m.trees.push_back(std::move(t));
        } else if (key == "hidden") {
            m.net.classifier = true;
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
