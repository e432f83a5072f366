#pragma once

#include <functional>

#include "nct/model.hpp"

namespace nct {

// Central finite differences over every parameter coordinate:
//   (L(theta + eps) - L(theta - eps)) / (2 eps)
inline Gradients finite_difference_gradient(const MlpModel& model,
                                            const std::function<double(const MlpModel&)>& loss,
                                            double eps = 1e-5) {
    MlpModel m = model;
    Gradients g;
    g.weights.resize(m.num_layers());
    g.biases.resize(m.num_layers());

    auto diff = [&](Tensor& param) {
        Tensor out(param.shape);
        for (std::size_t i = 0; i < param.size(); ++i) {
            double orig = param.v[i];
            param.v[i] = orig + eps;
            double lp = loss(m);
            param.v[i] = orig - eps;
            double lm = loss(m);
            param.v[i] = orig;
            out.v[i] = (lp - lm) / (2.0 * eps);
        }
        return out;
    };

    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        g.weights[l] = diff(m.weights[l]);
        g.biases[l] = diff(m.biases[l]);
    }
    return g;
}

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|) over all parameters
inline double max_relative_gradient_error(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    auto cmp = [&](const Tensor& x, const Tensor& y) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double denom = std::max({1.0, std::abs(x.v[i]), std::abs(y.v[i])});
            worst = std::max(worst, std::abs(x.v[i] - y.v[i]) / denom);
        }
    };
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        cmp(a.weights[l], b.weights[l]);
        cmp(a.biases[l], b.biases[l]);
    }
    return worst;
}

}  // namespace nct
