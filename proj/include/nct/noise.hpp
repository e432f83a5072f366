#pragma once

#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nct/dataset.hpp"
#include "nct/rng.hpp"

namespace nct {

enum class NoiseKind { symmetric_inclusive, symmetric_exclusive, pair_flip };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::symmetric_inclusive;
    double rate = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {
inline void check_corruptible(const LabeledDataset& ds, double rate) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("noise rate must be in [0,1]");
    if (!ds.is_clean())
        throw std::invalid_argument("dataset already corrupted; corruption is one-shot");
}

// Uniform draw over the C-1 classes != excluded.
inline int random_other_class(RngStream& rng, int num_classes, int excluded) {
    int l = rng.uniform_int(num_classes - 1);
    return l >= excluded ? l + 1 : l;
}
}  // namespace detail

// Per-sample Bernoulli selection; selected labels resampled uniformly over
// all C classes, so the true label can be maintained.
inline LabeledDataset corrupt_symmetric_inclusive(const LabeledDataset& ds, double rate,
                                                  RngStream rng) {
    detail::check_corruptible(ds, rate);
    LabeledDataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (rng.uniform() < rate) out.labels[i] = rng.uniform_int(out.num_classes);
    return out;
}

// Selected labels resampled uniformly over the other C-1 classes.
inline LabeledDataset corrupt_symmetric_exclusive(const LabeledDataset& ds, double rate,
                                                  RngStream rng) {
    detail::check_corruptible(ds, rate);
    if (ds.num_classes < 2) throw std::invalid_argument("need at least 2 classes");
    LabeledDataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (rng.uniform() < rate)
            out.labels[i] = detail::random_other_class(rng, out.num_classes, out.clean_labels[i]);
    return out;
}

// Class i flips to (i+1) mod C with probability rate.
inline LabeledDataset corrupt_pair_flip(const LabeledDataset& ds, double rate, RngStream rng) {
    detail::check_corruptible(ds, rate);
    if (ds.num_classes < 2) throw std::invalid_argument("need at least 2 classes");
    if (rate > 0.5)
        std::cerr << "warning: pair-flip rate " << rate
                  << " > 0.5 makes the flipped class the majority\n";
    LabeledDataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (rng.uniform() < rate)
            out.labels[i] = (out.clean_labels[i] + 1) % out.num_classes;
    return out;
}

inline LabeledDataset corrupt(const LabeledDataset& ds, const NoiseSpec& spec) {
    RngStream rng(spec.seed);
    switch (spec.kind) {
        case NoiseKind::symmetric_inclusive:
            return corrupt_symmetric_inclusive(ds, spec.rate, rng);
        case NoiseKind::symmetric_exclusive:
            return corrupt_symmetric_exclusive(ds, spec.rate, rng);
        case NoiseKind::pair_flip:
            return corrupt_pair_flip(ds, spec.rate, rng);
    }
    throw std::logic_error("unknown noise kind");
}

inline double realized_noise_rate(const LabeledDataset& ds) {
    if (ds.size() == 0) return 0.0;
    std::size_t differing = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] != ds.clean_labels[i]) ++differing;
    return static_cast<double>(differing) / static_cast<double>(ds.size());
}

// Per-batch target variability. Each model draws its own mask and random
// targets from its own stream, model 1 fully first, so swapping the two
// streams swaps the outputs exactly. Random targets always differ from the
// incoming label.
inline std::pair<std::vector<int>, std::vector<int>> target_variability_batch(
    const std::vector<int>& y, double r_d, int num_classes, RngStream& stream1,
    RngStream& stream2) {
    if (num_classes < 2) throw std::invalid_argument("need at least 2 classes");
    if (r_d < 0.0 || r_d > 1.0) throw std::invalid_argument("r_d must be in [0,1]");
    auto perturb = [&](RngStream& rng) {
        std::vector<int> out = y;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (rng.uniform() < r_d) out[j] = detail::random_other_class(rng, num_classes, y[j]);
        return out;
    };
    std::vector<int> y1 = perturb(stream1);
    std::vector<int> y2 = perturb(stream2);
    return {std::move(y1), std::move(y2)};
}

}  // namespace nct
