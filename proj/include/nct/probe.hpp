#pragma once

#include <numeric>
#include <stdexcept>
#include <vector>

#include "nct/losses.hpp"
#include "nct/model.hpp"
#include "nct/optimizer.hpp"
#include "nct/rng.hpp"
#include "nct/trainer.hpp"

namespace nct {

struct ProbeConfig {
    std::vector<std::size_t> hidden_dims = {400, 200};
    std::size_t num_samples = 1000;  // even, balanced two-class draw
    int probe_epochs = 200;
    double probe_lr = 0.01;
    int batch_size = 64;
    std::uint64_t seed = 0;
};

// Penultimate-layer activations of the frozen base model.
inline Tensor extract_frozen_features(const MlpModel& model, const Tensor& features) {
    if (model.num_layers() < 2)
        throw std::invalid_argument("probe needs a model with at least one hidden layer");
    MlpModel trunk;
    trunk.layer_dims.assign(model.layer_dims.begin(), model.layer_dims.end() - 1);
    trunk.weights.assign(model.weights.begin(), model.weights.end() - 1);
    trunk.biases.assign(model.biases.begin(), model.biases.end() - 1);
    // the trunk's last layer is a hidden layer of the base model: re-apply ReLU
    Tensor out = forward(trunk, features);
    for (double& x : out.v)
        if (x < 0.0) x = 0.0;
    return out;
}

inline Tensor extract_frozen_features(const MlpModel& model, const LabeledDataset& ds) {
    return extract_frozen_features(model, ds.features);
}

struct ProbeResult {
    double final_train_error = 0.0;  // 1 - train accuracy after the last epoch
    std::size_t num_samples = 0;
};

// Fit a fresh 2-layer head on frozen features against fair-coin labels and
// report how well randomness was fit. Plain SGD, no momentum, no decay.
inline ProbeResult fit_random_binary_labels(const Tensor& features, const ProbeConfig& cfg) {
    std::size_t n = features.rows();
    if (n < 2 * static_cast<std::size_t>(cfg.batch_size))
        throw std::invalid_argument("not enough samples to probe");
    if (cfg.hidden_dims.empty()) throw std::invalid_argument("probe needs hidden dims");

    RngStream rng(derive_stream_seed(cfg.seed, "probe-labels"));
    std::vector<int> labels(n);
    for (int& y : labels) y = rng.uniform_int(2);

    std::vector<std::size_t> dims;
    dims.push_back(features.cols());
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(2);
    RngStream init(derive_stream_seed(cfg.seed, "probe-init"));
    MlpModel head = init_model(dims, init);
    SgdState opt = SgdState::for_model(head, 0.0, 0.0, cfg.probe_lr);

    RngStream shuffle(derive_stream_seed(cfg.seed, "probe-shuffle"));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t b = static_cast<std::size_t>(cfg.batch_size);

    for (int e = 0; e < cfg.probe_epochs; ++e) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle.uniform_int(static_cast<int>(i)));
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += b) {
            std::size_t stop = std::min(n, start + b);
            Tensor x = detail::gather_rows(features, order, start, stop);
            std::vector<int> y(stop - start);
            for (std::size_t i = start; i < stop; ++i) y[i - start] = labels[order[i]];
            ForwardCache cache;
            Tensor z = forward(head, x, &cache);
            LossResult l = nct_loss(z, Tensor{}, y, LossParams{1.0, 0.0});
            Gradients g = backward(head, cache, l.dlogits);
            sgd_step(head, g, opt);
        }
    }

    Tensor z = detail::full_logits(head, features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = z.v.data() + i * 2;
        int pred = row[1] > row[0] ? 1 : 0;
        if (pred == labels[i]) ++correct;
    }
    ProbeResult r;
    r.num_samples = n;
    r.final_train_error = 1.0 - static_cast<double>(correct) / static_cast<double>(n);
    return r;
}

// Select up to num_samples feature rows whose clean label is 0 or 1.
inline Tensor first_two_class_features(const MlpModel& base, const LabeledDataset& ds,
                                       std::size_t num_samples) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size() && idx.size() < num_samples; ++i)
        if (ds.clean_labels[i] == 0 || ds.clean_labels[i] == 1) idx.push_back(i);
    Tensor sel = matrix(idx.size(), ds.features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < ds.features.cols(); ++j)
            sel.at(i, j) = ds.features.at(idx[i], j);
    return extract_frozen_features(base, sel);
}

}  // namespace nct
