#pragma once

#include <optional>
#include <vector>

#include "ner/tensor.h"

namespace ner {

// Plain SGD with optional global-norm gradient clipping. A step with
// learning_rate 0 leaves every parameter bit-identical.
struct OptimizerState {
    double learning_rate = 0.01;
    std::optional<double> clip_norm;
};

double global_grad_norm(const std::vector<TensorPtr>& params);

// p <- p - lr * g, after clipping; zeroes all grads afterwards.
void sgd_step(const std::vector<TensorPtr>& params, const OptimizerState& state);

}  // namespace ner
