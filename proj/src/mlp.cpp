#include "opfproxy/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opfproxy/rng.hpp"

namespace opfproxy {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double Mlp::forward(const Vec& x) const {
    Vec h = (w1 * x + b1).array().tanh();
    double z = w2.dot(h) + b2;
    return classifier ? sigmoid(z) : z;
}

Vec Mlp::flatten() const {
    Vec theta(num_params());
    int off = 0;
    for (int i = 0; i < w1.rows(); ++i)
        for (int j = 0; j < w1.cols(); ++j) theta[off++] = w1(i, j);
    for (int i = 0; i < b1.size(); ++i) theta[off++] = b1[i];
    for (int i = 0; i < w2.size(); ++i) theta[off++] = w2[i];
    theta[off] = b2;
    return theta;
}

void Mlp::unflatten(const Vec& theta) {
    int off = 0;
    for (int i = 0; i < w1.rows(); ++i)
        for (int j = 0; j < w1.cols(); ++j) w1(i, j) = theta[off++];
    for (int i = 0; i < b1.size(); ++i) b1[i] = theta[off++];
    for (int i = 0; i < w2.size(); ++i) w2[i] = theta[off++];
    b2 = theta[off];
}

int Mlp::num_params() const {
    return static_cast<int>(w1.size() + b1.size() + w2.size()) + 1;
}

double mlp_loss(const Mlp& net, const Mat& inputs, const Vec& targets) {
    const int n = static_cast<int>(inputs.rows());
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        double p = net.forward(inputs.row(i).transpose());
        if (net.classifier) {
            const double eps = 1e-12;
            p = std::clamp(p, eps, 1.0 - eps);
            loss += -(targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p));
        } else {
            loss += 0.5 * (p - targets[i]) * (p - targets[i]);
        }
    }
    return loss / n;
}

Vec mlp_loss_gradient(const Mlp& net, const Mat& inputs, const Vec& targets) {
    const int n = static_cast<int>(inputs.rows());
    Mat gw1 = Mat::Zero(net.w1.rows(), net.w1.cols());
    Vec gb1 = Vec::Zero(net.b1.size());
    Vec gw2 = Vec::Zero(net.w2.size());
    double gb2 = 0.0;

    for (int i = 0; i < n; ++i) {
        Vec x = inputs.row(i).transpose();
        Vec h = (net.w1 * x + net.b1).array().tanh();
        double z = net.w2.dot(h) + net.b2;
        double pred = net.classifier ? sigmoid(z) : z;
        // dL/dz is (pred - y) for both BCE-with-sigmoid and squared loss
        double dz = pred - targets[i];
        gw2 += dz * h;
        gb2 += dz;
        Vec dh = dz * net.w2;
        Vec da = dh.array() * (1.0 - h.array().square());
        gw1 += da * x.transpose();
        gb1 += da;
    }

    Mlp g = net;
    g.w1 = gw1 / n;
    g.b1 = gb1 / n;
    g.w2 = gw2 / n;
    g.b2 = gb2 / n;
    return g.flatten();
}

Mlp train_mlp(const Mat& inputs, const Vec& targets, const MlpConfig& config) {
    const int n = static_cast<int>(inputs.rows());
    const int d = static_cast<int>(inputs.cols());

    Mlp net;
    net.classifier = config.classifier;
    net.w1.resize(config.hidden, d);
    net.b1 = Vec::Zero(config.hidden);
    net.w2.resize(config.hidden);
    net.b2 = 0.0;

    Rng rng(derive_seed(config.seed, 0x6d6c70));
    auto uniform_init = [&](double fan_in) {
        std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
        return u(rng);
    };
    for (int i = 0; i < net.w1.rows(); ++i)
        for (int j = 0; j < d; ++j) net.w1(i, j) = uniform_init(d);
    for (int i = 0; i < config.hidden; ++i) net.w2[i] = uniform_init(config.hidden);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    double lr = config.learning_rate;
    Vec theta = net.flatten();
    Vec velocity = Vec::Zero(theta.size());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (epoch > 0 && config.decay_every > 0 && epoch % config.decay_every == 0) lr *= 0.5;
        std::shuffle(order.begin(), order.end(), rng);
        for (int start = 0; start < n; start += config.batch) {
            int count = std::min(config.batch, n - start);
            Mat bx(count, d);
            Vec by(count);
            for (int i = 0; i < count; ++i) {
                bx.row(i) = inputs.row(order[start + i]);
                by[i] = targets[order[start + i]];
            }
            Vec grad = mlp_loss_gradient(net, bx, by);
            velocity = config.momentum * velocity - lr * grad;
            theta += velocity;
            net.unflatten(theta);
        }
    }
    return net;
}

}  // namespace opfproxy
