#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nct/tensor.hpp"

namespace nct {

constexpr double kProbFloor = 1e-12;

struct LossParams {
    double tau = 4.0;    // temperature, >= 1 for mimicry
    double alpha = 0.0;  // balance in [0, 1]
};

struct LabelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// softmax(z / tau), stabilized by max subtraction. tau = 1 is plain softmax.
inline std::vector<double> softmax_with_temperature(const double* z, std::size_t n, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("temperature must be positive");
    double mx = z[0] / tau;
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, z[i] / tau);
    std::vector<double> p(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(z[i] / tau - mx);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

inline std::vector<double> softmax_with_temperature(const std::vector<double>& z, double tau) {
    return softmax_with_temperature(z.data(), z.size(), tau);
}

// -log p[target], probability clamped at 1e-12.
inline double cross_entropy(const std::vector<double>& pred, int target) {
    if (target < 0 || static_cast<std::size_t>(target) >= pred.size())
        throw LabelError("target class out of range");
    return -std::log(std::max(pred[static_cast<std::size_t>(target)], kProbFloor));
}

// KL(p || q) with 0 log(0/.) = 0 and q clamped at 1e-12.
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ShapeError("KL operands differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        s += p[i] * std::log(p[i] / std::max(q[i], kProbFloor));
    }
    return s;
}

struct LossResult {
    double loss = 0.0;
    Tensor dlogits;  // b x C, gradient of the mean-over-batch loss
};

// Per-model objective: (1 - alpha) * mean CE(softmax(z), y)
//                    + alpha * tau^2 * mean KL(peer || softmax(z / tau)).
// peer_probs are the peer's temperature-softened probabilities and act as a
// fixed target: no gradient flows into them.
inline LossResult nct_loss(const Tensor& own_logits, const Tensor& peer_probs,
                           const std::vector<int>& targets, const LossParams& params) {
    std::size_t b = own_logits.rows();
    std::size_t c = own_logits.cols();
    if (targets.size() != b) throw ShapeError("target count != batch size");
    bool use_mimicry = params.alpha > 0.0;
    if (use_mimicry && (peer_probs.rows() != b || peer_probs.cols() != c))
        throw ShapeError("peer_probs shape mismatch");

    LossResult r;
    r.dlogits = matrix(b, c);
    double inv_b = 1.0 / static_cast<double>(b);
    double tau = params.tau;
    double a = params.alpha;

    for (std::size_t i = 0; i < b; ++i) {
        const double* z = own_logits.v.data() + i * c;
        if (a < 1.0) {
            auto p = softmax_with_temperature(z, c, 1.0);
            r.loss += (1.0 - a) * cross_entropy(p, targets[i]) * inv_b;
            for (std::size_t j = 0; j < c; ++j)
                r.dlogits.at(i, j) += (1.0 - a) * p[j] * inv_b;
            r.dlogits.at(i, static_cast<std::size_t>(targets[i])) -= (1.0 - a) * inv_b;
        }
        if (use_mimicry) {
            auto q = softmax_with_temperature(z, c, tau);
            std::vector<double> peer(c);
            for (std::size_t j = 0; j < c; ++j) peer[j] = peer_probs.at(i, j);
            r.loss += a * tau * tau * kl_divergence(peer, q) * inv_b;
            // d/dz of -sum peer log softmax(z/tau) is (q - peer) / tau
            for (std::size_t j = 0; j < c; ++j)
                r.dlogits.at(i, j) += a * tau * (q[j] - peer[j]) * inv_b;
        }
    }
    return r;
}

// sigma((z1 + z2) / 2) at tau = 1
inline std::vector<double> ensemble_predict(const std::vector<double>& z1,
                                            const std::vector<double>& z2) {
    if (z1.size() != z2.size()) throw ShapeError("ensemble logit length mismatch");
    std::vector<double> avg(z1.size());
    for (std::size_t i = 0; i < z1.size(); ++i) avg[i] = 0.5 * (z1[i] + z2[i]);
    return softmax_with_temperature(avg, 1.0);
}

inline std::size_t argmax(const std::vector<double>& x) {
    return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

}  // namespace nct
