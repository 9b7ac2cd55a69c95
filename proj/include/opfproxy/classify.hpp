#pragma once

#include <string>
#include <vector>

#include "opfproxy/dataset.hpp"
#include "opfproxy/mlp.hpp"

namespace opfproxy {

enum class ClassifierKind {
    Trivial,
    GaussianNB,
    Logistic,
    DecisionTree,
    RandomForest,
    ExtraTrees,
    Mlp,
};

std::string classifier_kind_name(ClassifierKind k);
ClassifierKind classifier_kind_from_name(const std::string& name);

/// Per-feature z-scoring fitted on training data; constant features get
/// unit scale.
struct Standardizer {
    Vec mean, scale;
    void fit(const Mat& x);
    Vec apply(const Vec& x) const;
    Mat apply(const Mat& x) const;
};

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Trivial;
    int n_trees = 100;
    int max_depth = 0;      // 0 = unlimited
    bool bootstrap = true;  // random_forest only
    int max_features = -1;  // per-split candidates; -1 = sqrt(d), 0 = all
    double logistic_l2 = 1e-4;
    MlpConfig mlp{};        // hidden width, epochs, batch, learning rate
    uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int label = -1;          // leaf class
    double value = 0.0;      // leaf class-1 fraction
};

struct Tree {
    std::vector<TreeNode> nodes;
    int predict(const Vec& x) const;
};

struct TrainedClassifier {
    ClassifierKind kind = ClassifierKind::Trivial;
    int dim = 0;
    Standardizer standardizer;
    int constant_label = -1;  // >= 0 when training data had a single class

    // gaussian_nb
    Vec nb_prior;          // 2
    Mat nb_mean, nb_var;   // 2 x d
    // logistic
    Vec logit_weights;
    double logit_intercept = 0.0;
    // tree kinds
    std::vector<Tree> trees;
    // mlp
    Mlp net;

    int predict(const Vec& load) const;  // 0/1, probability >= 0.5 maps to 1
};

TrainedClassifier train_classifier(const ClassifierSpec& spec, const Dataset& train);

void save_classifier(const TrainedClassifier& model, const std::string& path);
TrainedClassifier load_classifier(const std::string& path);

}  // namespace opfproxy
