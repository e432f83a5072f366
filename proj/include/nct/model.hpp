#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nct/rng.hpp"
#include "nct/tensor.hpp"

namespace nct {

struct InvalidArchitecture : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Plain MLP: affine layers, ReLU on hidden layers, identity on the output.
struct MlpModel {
    std::vector<std::size_t> layer_dims;  // [d_in, h_1, ..., h_k, C]
    std::vector<Tensor> weights;          // weights[l]: dims[l] x dims[l+1]
    std::vector<Tensor> biases;           // biases[l]:  dims[l+1]

    std::size_t num_layers() const { return weights.size(); }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
};

// Per-parameter gradients, shapes mirror the model.
struct Gradients {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
};

// Layer inputs saved during forward; layer_inputs[l] feeds layer l.
// Hidden-layer ReLU masks are recovered from the post-activation values.
struct ForwardCache {
    std::vector<Tensor> layer_inputs;
    std::size_t batch = 0;
};

inline MlpModel init_model(const std::vector<std::size_t>& layer_dims, RngStream& seed) {
    if (layer_dims.size() < 2)
        throw InvalidArchitecture("need at least input and output dims");
    for (std::size_t d : layer_dims)
        if (d < 1) throw InvalidArchitecture("layer dims must be positive");

    MlpModel m;
    m.layer_dims = layer_dims;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        std::size_t fan_in = layer_dims[l];
        std::size_t fan_out = layer_dims[l + 1];
        Tensor w = matrix(fan_in, fan_out);
        double scale = std::sqrt(2.0 / static_cast<double>(fan_in));  // He init for ReLU
        for (double& x : w.v) x = scale * seed.normal();
        m.weights.push_back(std::move(w));
        m.biases.push_back(Tensor({fan_out}));
    }
    return m;
}

inline Tensor forward(const MlpModel& m, const Tensor& batch, ForwardCache* cache = nullptr) {
    if (batch.cols() != m.input_dim())
        throw ShapeError("batch width " + std::to_string(batch.cols()) +
                         " != model input dim " + std::to_string(m.input_dim()));
    std::size_t b = batch.rows();
    if (cache) {
        cache->layer_inputs.clear();
        cache->batch = b;
    }

    Tensor a = batch;
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        if (cache) cache->layer_inputs.push_back(a);
        const Tensor& w = m.weights[l];
        const Tensor& bias = m.biases[l];
        std::size_t in = w.rows(), out = w.cols();
        Tensor z = matrix(b, out);
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t k = 0; k < in; ++k) {
                double x = a.at(i, k);
                if (x == 0.0) continue;
                for (std::size_t j = 0; j < out; ++j) z.at(i, j) += x * w.at(k, j);
            }
            for (std::size_t j = 0; j < out; ++j) z.at(i, j) += bias.v[j];
        }
        if (l + 1 < m.num_layers()) {
            for (double& x : z.v)
                if (x < 0.0) x = 0.0;  // ReLU
        }
        a = std::move(z);
    }
    return a;
}

// Backprop of a loss whose logit gradient is dloss_dlogits (already includes
// any mean-over-batch factor). Gradient shapes mirror parameter shapes.
inline Gradients backward(const MlpModel& m, const ForwardCache& cache,
                          const Tensor& dloss_dlogits) {
    if (cache.layer_inputs.size() != m.num_layers())
        throw std::runtime_error("forward cache does not match model");
    if (dloss_dlogits.rows() != cache.batch || dloss_dlogits.cols() != m.output_dim())
        throw ShapeError("dloss_dlogits shape mismatch");

    std::size_t b = cache.batch;
    Gradients g;
    g.weights.resize(m.num_layers());
    g.biases.resize(m.num_layers());

    Tensor delta = dloss_dlogits;
    for (std::size_t li = m.num_layers(); li-- > 0;) {
        const Tensor& a = cache.layer_inputs[li];  // b x in
        std::size_t in = m.weights[li].rows(), out = m.weights[li].cols();
        if (a.cols() != in) throw std::runtime_error("stale forward cache");

        Tensor gw = matrix(in, out);
        Tensor gb({out});
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t k = 0; k < in; ++k) {
                double x = a.at(i, k);
                if (x == 0.0) continue;
                for (std::size_t j = 0; j < out; ++j) gw.at(k, j) += x * delta.at(i, j);
            }
            for (std::size_t j = 0; j < out; ++j) gb.v[j] += delta.at(i, j);
        }
        g.weights[li] = std::move(gw);
        g.biases[li] = std::move(gb);

        if (li > 0) {
            Tensor prev = matrix(b, in);
            const Tensor& w = m.weights[li];
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t k = 0; k < in; ++k) {
                    if (a.at(i, k) <= 0.0) continue;  // ReLU mask: a is post-activation
                    double s = 0.0;
                    for (std::size_t j = 0; j < out; ++j) s += delta.at(i, j) * w.at(k, j);
                    prev.at(i, k) = s;
                }
            delta = std::move(prev);
        }
    }
    return g;
}

}  // namespace nct
