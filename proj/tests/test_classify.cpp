#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "doctest.h"
#include "opfproxy/classify.hpp"

using namespace opfproxy;

namespace {

Dataset make_dataset(const Mat& x, const std::vector<int>& labels) {
    Dataset data;
    for (int i = 0; i < x.rows(); ++i) {
        LabeledSample s;
        s.load = x.row(i).transpose();
        s.feasible = labels[i] == 1;
        if (s.feasible) s.cost = 1.0;
        data.samples.push_back(std::move(s));
    }
    return data;
}

// two well-separated 2-D blobs, class 1 around (4, 4)
Dataset blob_dataset(int per_class, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    Mat x(2 * per_class, 2);
    std::vector<int> labels(2 * per_class);
    for (int i = 0; i < per_class; ++i) {
        x(i, 0) = noise(rng);
        x(i, 1) = noise(rng);
        labels[i] = 0;
        x(per_class + i, 0) = 4.0 + noise(rng);
        x(per_class + i, 1) = 4.0 + noise(rng);
        labels[per_class + i] = 1;
    }
    return make_dataset(x, labels);
}

double training_accuracy(const TrainedClassifier& model, const Dataset& data) {
    int hits = 0;
    for (const auto& s : data.samples)
        hits += (model.predict(s.load) == (s.feasible ? 1 : 0)) ? 1 : 0;
    return static_cast<double>(hits) / data.size();
}

std::string tmp_path(const char* name) {
    return std::string("/tmp/opfproxy_test_cls_") + name;
}

}  // namespace

TEST_CASE("trivial classifier always answers feasible") {
    Dataset data = blob_dataset(20, 1);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Trivial;
    TrainedClassifier model = train_classifier(spec, data);
    Vec far = Vec::Constant(2, -100.0);
    CHECK(model.predict(far) == 1);
    CHECK(model.predict(data.samples[0].load) == 1);
}

TEST_CASE("kind names round-trip") {
    for (auto k : {ClassifierKind::Trivial, ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                   ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
                   ClassifierKind::ExtraTrees, ClassifierKind::Mlp})
        CHECK(classifier_kind_from_name(classifier_kind_name(k)) == k);
    CHECK_THROWS_AS(classifier_kind_from_name("svm"), std::invalid_argument);
}

TEST_CASE("decision tree separates axis-aligned classes exactly") {
    Mat x(6, 1);
    x << 0.0, 0.1, 0.2, 1.0, 1.1, 1.2;
    Dataset data = make_dataset(x, {0, 0, 0, 1, 1, 1});
    ClassifierSpec spec;
    spec.kind = ClassifierKind::DecisionTree;
    TrainedClassifier model = train_classifier(spec, data);
    CHECK(training_accuracy(model, data) == 1.0);
    CHECK(model.predict(Vec::Constant(1, 0.05)) == 0);
    CHECK(model.predict(Vec::Constant(1, 1.05)) == 1);
}

TEST_CASE("gaussian naive bayes on separated blobs") {
    Dataset data = blob_dataset(200, 7);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::GaussianNB;
    TrainedClassifier model = train_classifier(spec, data);
    CHECK(training_accuracy(model, data) >= 0.99);
}

TEST_CASE("logistic regression on separated blobs") {
    Dataset data = blob_dataset(200, 11);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Logistic;
    TrainedClassifier model = train_classifier(spec, data);
    CHECK(training_accuracy(model, data) >= 0.99);
}

TEST_CASE("mlp classifier on separated blobs") {
    Dataset data = blob_dataset(200, 13);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Mlp;
    spec.mlp.classifier = true;
    TrainedClassifier model = train_classifier(spec, data);
    CHECK(training_accuracy(model, data) >= 0.99);
}

TEST_CASE("single-tree unbootstrapped forest equals the plain tree") {
    Dataset data = blob_dataset(100, 21);
    ClassifierSpec tree_spec;
    tree_spec.kind = ClassifierKind::DecisionTree;
    tree_spec.seed = 5;
    ClassifierSpec forest_spec = tree_spec;
    forest_spec.kind = ClassifierKind::RandomForest;
    forest_spec.n_trees = 1;
    forest_spec.bootstrap = false;
    forest_spec.max_features = 0;
    TrainedClassifier tree = train_classifier(tree_spec, data);
    TrainedClassifier forest = train_classifier(forest_spec, data);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        Vec x(2);
        x << u(rng), u(rng);
        CHECK(tree.predict(x) == forest.predict(x));
    }
}

TEST_CASE("random forest and extra trees fit separated blobs") {
    Dataset data = blob_dataset(100, 23);
    for (auto kind : {ClassifierKind::RandomForest, ClassifierKind::ExtraTrees}) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.n_trees = 20;
        spec.seed = 9;
        TrainedClassifier model = train_classifier(spec, data);
        CHECK(training_accuracy(model, data) >= 0.99);
    }
}

TEST_CASE("even forest vote breaks toward feasible") {
    TrainedClassifier model;
    model.kind = ClassifierKind::RandomForest;
    model.dim = 1;
    model.standardizer.mean = Vec::Zero(1);
    model.standardizer.scale = Vec::Ones(1);
    Tree yes, no;
    yes.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 1, 1.0});
    no.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 0, 0.0});
    model.trees = {yes, no};
    CHECK(model.predict(Vec::Zero(1)) == 1);
}

TEST_CASE("single-class training data yields a constant model") {
    Mat x(4, 1);
    x << 0.0, 1.0, 2.0, 3.0;
    Dataset data = make_dataset(x, {1, 1, 1, 1});
    for (auto kind : {ClassifierKind::GaussianNB, ClassifierKind::Logistic,
                      ClassifierKind::DecisionTree, ClassifierKind::RandomForest,
                      ClassifierKind::ExtraTrees, ClassifierKind::Mlp}) {
        ClassifierSpec spec;
        spec.kind = kind;
        TrainedClassifier model = train_classifier(spec, data);
        CHECK(model.constant_label == 1);
        CHECK(model.predict(Vec::Constant(1, -50.0)) == 1);
    }
}

TEST_CASE("training rejects an empty dataset") {
    Dataset empty;
    ClassifierSpec spec;
    spec.kind = ClassifierKind::DecisionTree;
    CHECK_THROWS_AS(train_classifier(spec, empty), std::invalid_argument);
}

TEST_CASE("seeded training is deterministic") {
    Dataset data = blob_dataset(100, 31);
    for (auto kind : {ClassifierKind::RandomForest, ClassifierKind::ExtraTrees,
                      ClassifierKind::Mlp}) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.n_trees = 10;
        spec.seed = 42;
        spec.mlp.classifier = true;
        TrainedClassifier a = train_classifier(spec, data);
        TrainedClassifier b = train_classifier(spec, data);
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1.0, 5.0);
        for (int i = 0; i < 100; ++i) {
            Vec x(2);
            x << u(rng), u(rng);
            CHECK(a.predict(x) == b.predict(x));
        }
    }
}

TEST_CASE("tree predictions are invariant to affine feature rescaling") {
    Dataset data = blob_dataset(100, 37);
    Dataset scaled = data;
    for (auto& s : scaled.samples) {
        s.load[0] = 1000.0 * s.load[0] + 5.0;
        s.load[1] = 0.001 * s.load[1] - 2.0;
    }
    ClassifierSpec spec;
    spec.kind = ClassifierKind::DecisionTree;
    TrainedClassifier a = train_classifier(spec, data);
    TrainedClassifier b = train_classifier(spec, scaled);
    for (const auto& s : data.samples) {
        Vec t(2);
        t << 1000.0 * s.load[0] + 5.0, 0.001 * s.load[1] - 2.0;
        CHECK(a.predict(s.load) == b.predict(t));
    }
}

TEST_CASE("mlp classifier gradient matches central differences") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> noise(0.0, 1.0);
    Mat x(20, 3);
    Vec y(20);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = noise(rng);
        y[i] = (x.row(i).sum() > 0) ? 1.0 : 0.0;
    }
    Mlp net;
    MlpConfig cfg;
    cfg.hidden = 4;
    cfg.epochs = 1;
    cfg.classifier = true;
    net = train_mlp(x, y, cfg);
    Vec theta = net.flatten();
    Vec grad = mlp_loss_gradient(net, x, y);
    const double h = 1e-5;
    for (int i = 0; i < theta.size(); ++i) {
        Mlp plus = net, minus = net;
        Vec tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        plus.unflatten(tp);
        minus.unflatten(tm);
        double fd = (mlp_loss(plus, x, y) - mlp_loss(minus, x, y)) / (2.0 * h);
        CHECK(std::abs(grad[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("save/load round-trip preserves predictions for every kind") {
    Dataset data = blob_dataset(60, 41);
    for (auto kind : {ClassifierKind::Trivial, ClassifierKind::GaussianNB,
                      ClassifierKind::Logistic, ClassifierKind::DecisionTree,
                      ClassifierKind::RandomForest, ClassifierKind::ExtraTrees,
                      ClassifierKind::Mlp}) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.n_trees = 5;
        spec.seed = 2;
        spec.mlp.classifier = true;
        TrainedClassifier model = train_classifier(spec, data);
        std::string path = tmp_path(classifier_kind_name(kind).c_str());
        save_classifier(model, path);
        TrainedClassifier back = load_classifier(path);
        CHECK(back.kind == model.kind);
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(-1.0, 5.0);
        for (int i = 0; i < 100; ++i) {
            Vec x(2);
            x << u(rng), u(rng);
            CHECK(model.predict(x) == back.predict(x));
        }
        std::remove(path.c_str());
    }
}
