#pragma once

#include <stdexcept>
#include <vector>

#include "nct/tensor.hpp"

namespace nct {

// Features with working labels and the hidden clean labels. Trainers only
// ever read `labels`; `clean_labels` exist for corruption bookkeeping and
// memorization tracking.
struct LabeledDataset {
    Tensor features;               // N x d
    std::vector<int> labels;       // working labels, possibly noisy
    std::vector<int> clean_labels; // ground truth
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }

    void validate() const {
        if (labels.size() != features.rows() || clean_labels.size() != labels.size())
            throw ShapeError("dataset label/feature count mismatch");
        for (int y : labels)
            if (y < 0 || y >= num_classes) throw ShapeError("label out of class range");
        for (int y : clean_labels)
            if (y < 0 || y >= num_classes) throw ShapeError("clean label out of class range");
    }

    bool is_clean() const { return labels == clean_labels; }
};

}  // namespace nct
