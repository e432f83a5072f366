#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace nct {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major tensor of doubles. Tests run at 64-bit so gradient-check
// tolerances are meaningful.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        v.assign(size_from_shape(shape), 0.0);
    }
    Tensor(std::vector<std::size_t> s, std::vector<double> vals)
        : shape(std::move(s)), v(std::move(vals)) {
        if (v.size() != size_from_shape(shape))
            throw ShapeError("tensor value count does not match shape");
    }

    static std::size_t size_from_shape(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }

    std::size_t size() const { return v.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return v[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols() + c]; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline Tensor matrix(std::size_t r, std::size_t c) { return Tensor({r, c}); }

}  // namespace nct
