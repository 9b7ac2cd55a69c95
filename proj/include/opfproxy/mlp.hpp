#pragma once

#include <cstdint>

#include "opfproxy/netcase.hpp"

namespace opfproxy {

/// One tanh hidden layer; sigmoid output for classification, linear for
/// regression. Inputs are expected already standardized by the caller.
struct Mlp {
    Mat w1;  // hidden x d
    Vec b1;  // hidden
    Vec w2;  // hidden
    double b2 = 0.0;
    bool classifier = false;

    double forward(const Vec& x) const;

    // flat parameter vector in (w1, b1, w2, b2) order; used for training,
    // serialization and gradient checks
    Vec flatten() const;
    void unflatten(const Vec& theta);
    int num_params() const;
};

struct MlpConfig {
    int hidden = 10;
    int epochs = 200;
    int batch = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int decay_every = 50;   // epochs between x0.5 learning-rate cuts
    uint64_t seed = 0;
    bool classifier = false;
};

Mlp train_mlp(const Mat& inputs, const Vec& targets, const MlpConfig& config);

/// Mean loss over the batch: binary cross-entropy (classifier) or
/// 0.5 squared error (regressor).
double mlp_loss(const Mlp& net, const Mat& inputs, const Vec& targets);

/// Analytic gradient of mlp_loss with respect to the flattened parameters.
Vec mlp_loss_gradient(const Mlp& net, const Mat& inputs, const Vec& targets);

}  // namespace opfproxy
