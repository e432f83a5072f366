#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nct/losses.hpp"
#include "nct/model.hpp"
#include "nct/noise.hpp"
#include "nct/optimizer.hpp"
#include "nct/schedules.hpp"

namespace nct {

enum class Method { nct, nct_no_en, nct_no_tv, dml, standard };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::nct: return "nct";
        case Method::nct_no_en: return "nct_no_en";
        case Method::nct_no_tv: return "nct_no_tv";
        case Method::dml: return "dml";
        case Method::standard: return "standard";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "nct") return Method::nct;
    if (s == "nct_no_en") return Method::nct_no_en;
    if (s == "nct_no_tv") return Method::nct_no_tv;
    if (s == "dml") return Method::dml;
    if (s == "standard") return Method::standard;
    throw std::invalid_argument("unknown method: " + s);
}

// Seeds of every named stream, all derived from one master seed.
struct StreamSeeds {
    std::uint64_t data_shuffle, corruption, init_model_1, init_model_2, tv_model_1, tv_model_2,
        probe;

    static StreamSeeds from_master(std::uint64_t master) {
        return {derive_stream_seed(master, "data-shuffle"),
                derive_stream_seed(master, "corruption"),
                derive_stream_seed(master, "init-model-1"),
                derive_stream_seed(master, "init-model-2"),
                derive_stream_seed(master, "tv-model-1"),
                derive_stream_seed(master, "tv-model-2"),
                derive_stream_seed(master, "probe")};
    }
};

struct TrainConfig {
    Method method = Method::nct;
    int batch_size = 128;
    std::vector<std::size_t> layer_dims;
    ScheduleParams schedule;
    double tau = 4.0;
    double dml_alpha = 0.5;  // fixed balance when method == dml
    double momentum = 0.9;
    double weight_decay = 1e-5;
    StreamSeeds streams = StreamSeeds::from_master(0);
    int eval_every = 1;
};

struct DualModelState {
    MlpModel model1, model2;
    SgdState opt1, opt2;
    int epoch = 0;
};

struct SubsetMetrics {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct EpochMetrics {
    int epoch = 0;
    double alpha_d = 0.0;
    double r_d = 0.0;
    double lr = 0.0;
    double train_loss_model1 = 0.0;
    std::optional<double> train_loss_model2;
    double test_acc_ensemble = 0.0;
    double test_acc_model1 = 0.0;
    std::optional<double> test_acc_model2;
    SubsetMetrics clean_subset;
    std::optional<SubsetMetrics> noisy_subset;  // absent when the dataset is clean
};

enum class EvalMode { ensemble, single };

namespace detail {

inline Tensor gather_rows(const Tensor& features, const std::vector<std::size_t>& idx,
                          std::size_t begin, std::size_t end) {
    std::size_t d = features.cols();
    Tensor out = matrix(end - begin, d);
    for (std::size_t i = begin; i < end; ++i)
        for (std::size_t j = 0; j < d; ++j) out.at(i - begin, j) = features.at(idx[i], j);
    return out;
}

// Logits for the whole dataset, batched to bound the working set.
inline Tensor full_logits(const MlpModel& m, const Tensor& features) {
    std::size_t n = features.rows(), d = features.cols(), c = m.output_dim();
    Tensor out = matrix(n, c);
    const std::size_t chunk = 1024;
    for (std::size_t start = 0; start < n; start += chunk) {
        std::size_t stop = std::min(n, start + chunk);
        Tensor part = matrix(stop - start, d);
        std::copy(features.v.begin() + start * d, features.v.begin() + stop * d, part.v.begin());
        Tensor logits = forward(m, part);
        std::copy(logits.v.begin(), logits.v.end(), out.v.begin() + start * c);
    }
    return out;
}

}  // namespace detail

// Top-1 accuracy against the clean labels of the test set.
inline double evaluate(const MlpModel& m1, const MlpModel* m2, const LabeledDataset& test,
                       EvalMode mode) {
    if (test.size() == 0) throw std::invalid_argument("empty test set");
    Tensor z1 = detail::full_logits(m1, test.features);
    Tensor z2;
    if (mode == EvalMode::ensemble) {
        if (!m2) throw std::invalid_argument("ensemble evaluation needs two models");
        z2 = detail::full_logits(*m2, test.features);
    }
    std::size_t c = m1.output_dim();
    std::size_t correct = 0;
    std::vector<double> row1(c), row2(c);
    for (std::size_t i = 0; i < test.size(); ++i) {
        std::copy(z1.v.begin() + i * c, z1.v.begin() + (i + 1) * c, row1.begin());
        std::vector<double> probs;
        if (mode == EvalMode::ensemble) {
            std::copy(z2.v.begin() + i * c, z2.v.begin() + (i + 1) * c, row2.begin());
            probs = ensemble_predict(row1, row2);
        } else {
            probs = softmax_with_temperature(row1, 1.0);
        }
        if (static_cast<int>(argmax(probs)) == test.clean_labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

// Mean CE and accuracy w.r.t. the working labels, split by whether the
// working label agrees with the clean one. The noisy subset is reported as
// absent on a clean dataset.
inline std::pair<SubsetMetrics, std::optional<SubsetMetrics>> memorization_metrics(
    const MlpModel& m1, const MlpModel* m2, const LabeledDataset& ds, EvalMode mode) {
    Tensor z1 = detail::full_logits(m1, ds.features);
    Tensor z2;
    if (mode == EvalMode::ensemble) {
        if (!m2) throw std::invalid_argument("ensemble metrics need two models");
        z2 = detail::full_logits(*m2, ds.features);
    }
    std::size_t c = m1.output_dim();
    SubsetMetrics clean{}, noisy{};
    std::size_t n_clean = 0, n_noisy = 0;
    std::vector<double> row1(c), row2(c);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::copy(z1.v.begin() + i * c, z1.v.begin() + (i + 1) * c, row1.begin());
        std::vector<double> probs;
        if (mode == EvalMode::ensemble) {
            std::copy(z2.v.begin() + i * c, z2.v.begin() + (i + 1) * c, row2.begin());
            probs = ensemble_predict(row1, row2);
        } else {
            probs = softmax_with_temperature(row1, 1.0);
        }
        double ce = cross_entropy(probs, ds.labels[i]);
        bool hit = static_cast<int>(argmax(probs)) == ds.labels[i];
        if (ds.labels[i] == ds.clean_labels[i]) {
            clean.loss += ce;
            clean.accuracy += hit ? 1.0 : 0.0;
            ++n_clean;
        } else {
            noisy.loss += ce;
            noisy.accuracy += hit ? 1.0 : 0.0;
            ++n_noisy;
        }
    }
    if (n_clean > 0) {
        clean.loss /= static_cast<double>(n_clean);
        clean.accuracy /= static_cast<double>(n_clean);
    }
    std::optional<SubsetMetrics> noisy_out;
    if (n_noisy > 0) {
        noisy.loss /= static_cast<double>(n_noisy);
        noisy.accuracy /= static_cast<double>(n_noisy);
        noisy_out = noisy;
    }
    return {clean, noisy_out};
}

struct TrainResult {
    DualModelState state;
    std::vector<EpochMetrics> metrics;
    double best_acc = 0.0;
    int best_epoch = 0;
    double last_acc = 0.0;
};

namespace detail {

struct EpochPlan {
    double alpha;
    double r_d;
    bool dual;  // two models trained
};

inline EpochPlan plan_epoch(int e, const TrainConfig& cfg) {
    switch (cfg.method) {
        case Method::nct:
        case Method::nct_no_en:
            return {alpha_at_epoch(e, cfg.schedule), variability_rate_at_epoch(e, cfg.schedule),
                    true};
        case Method::nct_no_tv:
            return {alpha_at_epoch(e, cfg.schedule), 0.0, true};
        case Method::dml:
            return {cfg.dml_alpha, 0.0, true};
        case Method::standard:
            return {0.0, 0.0, false};
    }
    throw std::logic_error("unknown method");
}

}  // namespace detail

// Algorithm driver shared by every method. Standard CE is the degenerate
// single-model case; the ablations adjust the per-epoch plan and the
// evaluation mode only.
inline TrainResult train(const LabeledDataset& ds, const LabeledDataset& test,
                         const TrainConfig& cfg) {
    ds.validate();
    test.validate();
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (ds.num_classes != test.num_classes)
        throw std::invalid_argument("train/test class counts differ");
    if (!cfg.layer_dims.empty() && cfg.layer_dims.back() != static_cast<std::size_t>(ds.num_classes))
        throw std::invalid_argument("model output width != class count");

    RngStream init1(cfg.streams.init_model_1);
    RngStream init2(cfg.streams.init_model_2);
    RngStream shuffle(cfg.streams.data_shuffle);
    RngStream tv1(cfg.streams.tv_model_1);
    RngStream tv2(cfg.streams.tv_model_2);

    TrainResult res;
    res.state.model1 = init_model(cfg.layer_dims, init1);
    bool dual = cfg.method != Method::standard;
    if (dual) res.state.model2 = init_model(cfg.layer_dims, init2);
    res.state.opt1 = SgdState::for_model(res.state.model1, cfg.momentum, cfg.weight_decay,
                                         cfg.schedule.lr_initial);
    if (dual)
        res.state.opt2 = SgdState::for_model(res.state.model2, cfg.momentum, cfg.weight_decay,
                                             cfg.schedule.lr_initial);

    EvalMode final_mode =
        (cfg.method == Method::nct_no_en || cfg.method == Method::standard) ? EvalMode::single
                                                                            : EvalMode::ensemble;
    const MlpModel* peer_for_eval = dual ? &res.state.model2 : nullptr;

    std::size_t n = ds.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t b = static_cast<std::size_t>(cfg.batch_size);

    for (int e = 1; e <= cfg.schedule.total_epochs; ++e) {
        auto plan = detail::plan_epoch(e, cfg);
        double lr = lr_at_epoch(e, cfg.schedule);
        res.state.opt1.learning_rate = lr;
        if (dual) res.state.opt2.learning_rate = lr;

        // Fisher-Yates; both models see the same batch order.
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle.uniform_int(static_cast<int>(i)));
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum1 = 0.0, loss_sum2 = 0.0;
        for (std::size_t start = 0; start < n; start += b) {
            std::size_t stop = std::min(n, start + b);
            Tensor x = detail::gather_rows(ds.features, order, start, stop);
            std::vector<int> y(stop - start);
            for (std::size_t i = start; i < stop; ++i) y[i - start] = ds.labels[order[i]];

            std::vector<int> y1 = y, y2 = y;
            if (plan.r_d > 0.0)
                std::tie(y1, y2) = target_variability_batch(y, plan.r_d, ds.num_classes, tv1, tv2);

            ForwardCache cache1, cache2;
            Tensor z1 = forward(res.state.model1, x, &cache1);
            Tensor z2;
            if (dual) z2 = forward(res.state.model2, x, &cache2);

            LossParams lp{cfg.tau, plan.alpha};
            Tensor peer_for_1, peer_for_2;
            if (dual && plan.alpha > 0.0) {
                std::size_t c = z1.cols();
                peer_for_1 = matrix(z1.rows(), c);
                peer_for_2 = matrix(z1.rows(), c);
                for (std::size_t i = 0; i < z1.rows(); ++i) {
                    auto p2 = softmax_with_temperature(z2.v.data() + i * c, c, cfg.tau);
                    auto p1 = softmax_with_temperature(z1.v.data() + i * c, c, cfg.tau);
                    std::copy(p2.begin(), p2.end(), peer_for_1.v.begin() + i * c);
                    std::copy(p1.begin(), p1.end(), peer_for_2.v.begin() + i * c);
                }
            }

            LossResult l1 = nct_loss(z1, peer_for_1, y1, lp);
            if (!std::isfinite(l1.loss))
                throw NumericError("non-finite loss (model 1, epoch " + std::to_string(e) + ")");
            loss_sum1 += l1.loss * static_cast<double>(stop - start);
            Gradients g1 = backward(res.state.model1, cache1, l1.dlogits);

            if (dual) {
                LossResult l2 = nct_loss(z2, peer_for_2, y2, lp);
                if (!std::isfinite(l2.loss))
                    throw NumericError("non-finite loss (model 2, epoch " + std::to_string(e) +
                                       ")");
                loss_sum2 += l2.loss * static_cast<double>(stop - start);
                Gradients g2 = backward(res.state.model2, cache2, l2.dlogits);
                sgd_step(res.state.model1, g1, res.state.opt1);
                sgd_step(res.state.model2, g2, res.state.opt2);
            } else {
                sgd_step(res.state.model1, g1, res.state.opt1);
            }
        }
        res.state.epoch = e;

        double acc = evaluate(res.state.model1, peer_for_eval, test, final_mode);
        if (acc > res.best_acc) {
            res.best_acc = acc;
            res.best_epoch = e;
        }
        res.last_acc = acc;

        if (e % cfg.eval_every == 0 || e == cfg.schedule.total_epochs) {
            EpochMetrics em;
            em.epoch = e;
            em.alpha_d = plan.alpha;
            em.r_d = plan.r_d;
            em.lr = lr;
            em.train_loss_model1 = loss_sum1 / static_cast<double>(n);
            em.test_acc_ensemble = acc;
            em.test_acc_model1 = dual ? evaluate(res.state.model1, nullptr, test, EvalMode::single)
                                      : acc;
            if (dual) {
                em.train_loss_model2 = loss_sum2 / static_cast<double>(n);
                em.test_acc_model2 = evaluate(res.state.model2, nullptr, test, EvalMode::single);
            }
            auto [clean, noisy] = memorization_metrics(res.state.model1, peer_for_eval, ds,
                                                       final_mode);
            em.clean_subset = clean;
            em.noisy_subset = noisy;
            res.metrics.push_back(std::move(em));
        }
    }
    return res;
}

inline TrainResult train_nct(const LabeledDataset& ds, const LabeledDataset& test,
                             const TrainConfig& cfg) {
    if (cfg.method != Method::nct && cfg.method != Method::nct_no_en &&
        cfg.method != Method::nct_no_tv)
        throw std::invalid_argument("train_nct expects an NCT method variant");
    return train(ds, test, cfg);
}

inline TrainResult train_standard(const LabeledDataset& ds, const LabeledDataset& test,
                                  TrainConfig cfg) {
    cfg.method = Method::standard;
    return train(ds, test, cfg);
}

inline TrainResult train_dml(const LabeledDataset& ds, const LabeledDataset& test,
                             TrainConfig cfg) {
    cfg.method = Method::dml;
    return train(ds, test, cfg);
}

}  // namespace nct
