#pragma once

#include <cmath>
#include <stdexcept>

namespace nct {

struct ScheduleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Every schedule symbol of a run. Epochs are 1-indexed so the warmup test
// e <= e_w with e_w = 1 covers exactly the first epoch.
struct ScheduleParams {
    double alpha_max = 0.9;
    double beta_mag = 0.65;  // |beta|; the ramp is exp(-beta_mag * (1 - e/e_r)^2)
    int ramp_len = 180;      // e_r
    double r_min = 0.0;
    double r_max = 0.0;
    int warmup = 1;        // e_w
    int total_epochs = 200;  // e_max
    double lr_initial = 0.02;
    int lr_decay_epoch = 180;
    double lr_decay_factor = 10.0;
};

namespace detail {
inline void check_epoch(int e, const ScheduleParams& p) {
    if (e < 0 || e > p.total_epochs) throw ScheduleError("epoch out of range");
}
}  // namespace detail

// Sigmoid-style ramp-up: alpha_max * exp(-beta_mag * (1 - e/e_r)^2) for
// e < e_r, clamped at alpha_max afterwards.
inline double alpha_at_epoch(int e, const ScheduleParams& p) {
    detail::check_epoch(e, p);
    if (e >= p.ramp_len) return p.alpha_max;
    double t = 1.0 - static_cast<double>(e) / static_cast<double>(p.ramp_len);
    return p.alpha_max * std::exp(-p.beta_mag * t * t);
}

// Logarithmic ramp-up: r_min on the warmup prefix, then
// r_min + (r_max - r_min) * log(e - e_w) / log(e_max - e_w).
inline double variability_rate_at_epoch(int e, const ScheduleParams& p) {
    detail::check_epoch(e, p);
    if (p.total_epochs - p.warmup < 2)
        throw ScheduleError("degenerate schedule: e_max - e_w must be >= 2");
    if (e <= p.warmup) return p.r_min;
    double num = std::log(static_cast<double>(e - p.warmup));
    double den = std::log(static_cast<double>(p.total_epochs - p.warmup));
    return p.r_min + (p.r_max - p.r_min) * num / den;
}

// Single step decay.
inline double lr_at_epoch(int e, const ScheduleParams& p) {
    detail::check_epoch(e, p);
    return e >= p.lr_decay_epoch ? p.lr_initial / p.lr_decay_factor : p.lr_initial;
}

}  // namespace nct
