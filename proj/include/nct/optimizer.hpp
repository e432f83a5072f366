#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "nct/model.hpp"

namespace nct {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// SGD with momentum; weight decay folded into the momentum buffer
// (classic framework convention, not decoupled):
//   v <- momentum * v + (grad + weight_decay * param)
//   param <- param - lr * v
struct SgdState {
    std::vector<Tensor> momentum_weights;
    std::vector<Tensor> momentum_biases;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    double learning_rate = 0.02;

    static SgdState for_model(const MlpModel& m, double momentum, double weight_decay,
                              double lr) {
        SgdState s;
        s.momentum = momentum;
        s.weight_decay = weight_decay;
        s.learning_rate = lr;
        for (const Tensor& w : m.weights) s.momentum_weights.emplace_back(w.shape);
        for (const Tensor& b : m.biases) s.momentum_biases.emplace_back(b.shape);
        return s;
    }
};

namespace detail {
inline void sgd_apply(Tensor& param, const Tensor& grad, Tensor& buf, const SgdState& s,
                      std::size_t layer) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        double g = grad.v[i];
        if (!std::isfinite(g))
            throw NumericError("non-finite gradient in layer " + std::to_string(layer));
        double v = s.momentum * buf.v[i] + (g + s.weight_decay * param.v[i]);
        buf.v[i] = v;
        param.v[i] -= s.learning_rate * v;
    }
}
}  // namespace detail

inline void sgd_step(MlpModel& m, const Gradients& g, SgdState& state) {
    if (g.weights.size() != m.num_layers())
        throw ShapeError("gradient layer count mismatch");
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        detail::sgd_apply(m.weights[l], g.weights[l], state.momentum_weights[l], state, l);
        detail::sgd_apply(m.biases[l], g.biases[l], state.momentum_biases[l], state, l);
    }
}

}  // namespace nct
