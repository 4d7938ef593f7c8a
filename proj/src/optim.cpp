#include "ner/optim.h"

#include <cmath>

#include "ner/error.h"

namespace ner {

double global_grad_norm(const std::vector<TensorPtr>& params) {
    double sq = 0.0;
    for (const TensorPtr& p : params) {
        if (p->grad.size() != p->values.size())
            throw ContractError("global_grad_norm: parameter has no populated gradient");
        for (double g : p->grad) sq += g * g;
    }
    return std::sqrt(sq);
}

void sgd_step(const std::vector<TensorPtr>& params, const OptimizerState& state) {
    double factor = 1.0;
    double norm = global_grad_norm(params);  // also validates grads
    if (state.clip_norm && norm > *state.clip_norm && norm > 0.0) factor = *state.clip_norm / norm;

    if (state.learning_rate != 0.0) {
        double step = state.learning_rate * factor;
        for (const TensorPtr& p : params)
            for (size_t i = 0; i < p->values.size(); ++i) p->values[i] -= step * p->grad[i];
    }
    for (const TensorPtr& p : params) p->zero_grad();
}

}  // namespace ner
