#include <doctest.h>

#include <cmath>

#include "nct/gradcheck.hpp"
#include "nct/losses.hpp"
#include "nct/model.hpp"
#include "nct/optimizer.hpp"

using namespace nct;

TEST_CASE("init_model is deterministic under the seed") {
    RngStream a(7), b(7);
    MlpModel m1 = init_model({2, 3, 2}, a);
    MlpModel m2 = init_model({2, 3, 2}, b);
    for (std::size_t l = 0; l < m1.num_layers(); ++l) {
        CHECK(m1.weights[l].v == m2.weights[l].v);
        CHECK(m1.biases[l].v == m2.biases[l].v);
    }
}

TEST_CASE("init_model biases are zero") {
    RngStream rng(3);
    MlpModel m = init_model({4, 2}, rng);
    for (double x : m.biases[0].v) CHECK(x == 0.0);
}

TEST_CASE("init_model rejects bad architectures") {
    RngStream rng(1);
    CHECK_THROWS_AS(init_model({5}, rng), InvalidArchitecture);
    CHECK_THROWS_AS(init_model({2, 0, 2}, rng), InvalidArchitecture);
}

TEST_CASE("initializer variance is close to 2/fan_in") {
    // Monte Carlo oracle: empirical variance of >= 10k draws per layer.
    RngStream rng(11);
    MlpModel m = init_model({50, 200, 64}, rng);
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        double fan_in = static_cast<double>(m.layer_dims[l]);
        double mean = 0.0, sq = 0.0;
        for (double x : m.weights[l].v) {
            mean += x;
            sq += x * x;
        }
        std::size_t n = m.weights[l].size();
        mean /= static_cast<double>(n);
        double var = sq / static_cast<double>(n) - mean * mean;
        CHECK(var == doctest::Approx(2.0 / fan_in).epsilon(0.10));
    }
}

TEST_CASE("forward with zero parameters gives zero logits") {
    RngStream rng(1);
    MlpModel m = init_model({3, 4, 2}, rng);
    for (auto& w : m.weights) std::fill(w.v.begin(), w.v.end(), 0.0);
    Tensor x({2, 3}, {1.0, -2.0, 0.5, 3.0, 0.0, 1.0});
    Tensor z = forward(m, x);
    for (double v : z.v) CHECK(v == 0.0);
}

TEST_CASE("identity single layer reproduces its input") {
    RngStream rng(1);
    MlpModel m = init_model({3, 3}, rng);
    std::fill(m.weights[0].v.begin(), m.weights[0].v.end(), 0.0);
    for (std::size_t i = 0; i < 3; ++i) m.weights[0].at(i, i) = 1.0;
    Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor z = forward(m, eye);
    CHECK(z.v == eye.v);
}

namespace {
// Independent straightforward re-implementation of the forward arithmetic.
std::vector<double> naive_forward_row(const MlpModel& m, const std::vector<double>& x0) {
    std::vector<double> a = x0;
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        std::size_t out = m.weights[l].cols();
        std::vector<double> z(out, 0.0);
        for (std::size_t j = 0; j < out; ++j) {
            double s = m.biases[l].v[j];
            for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * m.weights[l].at(k, j);
            z[j] = s;
        }
        if (l + 1 < m.num_layers())
            for (double& v : z) v = std::max(0.0, v);
        a = std::move(z);
    }
    return a;
}
}  // namespace

TEST_CASE("forward matches an independent re-implementation") {
    RngStream rng(42);
    MlpModel m = init_model({4, 6, 3}, rng);
    RngStream data(17);
    Tensor x = matrix(5, 4);
    for (double& v : x.v) v = data.normal();
    Tensor z = forward(m, x);
    for (std::size_t i = 0; i < 5; ++i) {
        std::vector<double> row(x.v.begin() + i * 4, x.v.begin() + (i + 1) * 4);
        auto ref = naive_forward_row(m, row);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(z.at(i, j) == doctest::Approx(ref[j]).epsilon(1e-12));
    }
}

TEST_CASE("forward of a batch equals row-wise forward") {
    RngStream rng(5);
    MlpModel m = init_model({3, 8, 4}, rng);
    RngStream data(9);
    Tensor x = matrix(7, 3);
    for (double& v : x.v) v = data.normal();
    Tensor z = forward(m, x);
    for (std::size_t i = 0; i < 7; ++i) {
        Tensor row = matrix(1, 3);
        for (std::size_t j = 0; j < 3; ++j) row.at(0, j) = x.at(i, j);
        Tensor zi = forward(m, row);
        for (std::size_t j = 0; j < 4; ++j) CHECK(z.at(i, j) == zi.at(0, j));
    }
}

TEST_CASE("forward rejects a shape mismatch") {
    RngStream rng(1);
    MlpModel m = init_model({3, 2}, rng);
    CHECK_THROWS_AS(forward(m, matrix(2, 4)), ShapeError);
}

TEST_CASE("backward of zero dlogits gives zero gradients") {
    RngStream rng(2);
    MlpModel m = init_model({2, 4, 3}, rng);
    Tensor x = matrix(3, 2);
    for (double& v : x.v) v = 0.3;
    ForwardCache cache;
    forward(m, x, &cache);
    Gradients g = backward(m, cache, matrix(3, 3));
    for (const auto& t : g.weights)
        for (double v : t.v) CHECK(v == 0.0);
    for (const auto& t : g.biases)
        for (double v : t.v) CHECK(v == 0.0);
}

TEST_CASE("single affine layer gradient is x^T delta") {
    RngStream rng(8);
    MlpModel m = init_model({3, 2}, rng);
    RngStream data(21);
    Tensor x = matrix(4, 3);
    for (double& v : x.v) v = data.normal();
    Tensor target = matrix(4, 2);
    for (double& v : target.v) v = data.normal();

    ForwardCache cache;
    Tensor z = forward(m, x, &cache);
    // squared-error toy loss, mean over batch: dL/dz = (z - t)/b
    Tensor delta = matrix(4, 2);
    for (std::size_t i = 0; i < delta.size(); ++i) delta.v[i] = (z.v[i] - target.v[i]) / 4.0;
    Gradients g = backward(m, cache, delta);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < 2; ++j) {
            double expect = 0.0;
            for (std::size_t i = 0; i < 4; ++i) expect += x.at(i, k) * delta.at(i, j);
            CHECK(g.weights[0].at(k, j) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("backward agrees with finite differences across seeds and architectures") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (const auto& dims :
             {std::vector<std::size_t>{2, 5, 3}, std::vector<std::size_t>{4, 6, 6, 2}}) {
            RngStream rng(seed);
            MlpModel m = init_model(dims, rng);
            RngStream data(seed + 100);
            std::size_t b = 3;
            Tensor x = matrix(b, dims.front());
            for (double& v : x.v) v = data.normal();
            std::vector<int> y(b);
            for (int& t : y) t = data.uniform_int(static_cast<int>(dims.back()));

            auto loss_fn = [&](const MlpModel& mm) {
                Tensor z = forward(mm, x);
                return nct_loss(z, Tensor{}, y, LossParams{1.0, 0.0}).loss;
            };
            ForwardCache cache;
            Tensor z = forward(m, x, &cache);
            LossResult l = nct_loss(z, Tensor{}, y, LossParams{1.0, 0.0});
            Gradients analytic = backward(m, cache, l.dlogits);
            Gradients fd = finite_difference_gradient(m, loss_fn, 1e-5);
            CHECK(max_relative_gradient_error(analytic, fd) < 1e-5);
        }
    }
}

TEST_CASE("finite differences recover a linear loss gradient") {
    RngStream rng(4);
    MlpModel m = init_model({2, 2}, rng);
    std::vector<double> a = {0.3, -1.2, 0.7, 2.0};
    auto loss = [&](const MlpModel& mm) {
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i) s += a[i] * mm.weights[0].v[i];
        return s;
    };
    Gradients g = finite_difference_gradient(m, loss, 1e-5);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(g.weights[0].v[i] == doctest::Approx(a[i]).epsilon(1e-9));
}

TEST_CASE("finite differences recover a quadratic loss gradient") {
    RngStream rng(4);
    MlpModel m = init_model({2, 2}, rng);
    std::fill(m.weights[0].v.begin(), m.weights[0].v.end(), 1.0);
    auto loss = [&](const MlpModel& mm) {
        double s = 0.0;
        for (double w : mm.weights[0].v) s += w * w;
        return s;
    };
    Gradients g = finite_difference_gradient(m, loss, 1e-5);
    for (double v : g.weights[0].v) CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("sgd_step with zero gradients and no decay leaves parameters unchanged") {
    RngStream rng(6);
    MlpModel m = init_model({2, 3, 2}, rng);
    MlpModel orig = m;
    SgdState s = SgdState::for_model(m, 0.9, 0.0, 0.1);
    Gradients g;
    for (const auto& w : m.weights) g.weights.emplace_back(w.shape);
    for (const auto& b : m.biases) g.biases.emplace_back(b.shape);
    sgd_step(m, g, s);
    for (std::size_t l = 0; l < m.num_layers(); ++l) CHECK(m.weights[l].v == orig.weights[l].v);
}

TEST_CASE("sgd_step matches the scalar definition") {
    MlpModel m;
    m.layer_dims = {1, 1};
    m.weights = {Tensor({1, 1}, {1.0})};
    m.biases = {Tensor({std::size_t{1}}, {0.0})};
    SgdState s = SgdState::for_model(m, 0.0, 0.0, 0.1);
    Gradients g;
    g.weights = {Tensor({1, 1}, {1.0})};
    g.biases = {Tensor({std::size_t{1}}, {0.0})};
    sgd_step(m, g, s);
    CHECK(m.weights[0].v[0] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("sgd_step trajectory matches a hand-rolled scalar simulation") {
    // p=1, grad=0, wd=0.1, momentum=0.9, lr=0.1, two steps from zero buffer
    MlpModel m;
    m.layer_dims = {1, 1};
    m.weights = {Tensor({1, 1}, {1.0})};
    m.biases = {Tensor({std::size_t{1}}, {0.0})};
    SgdState s = SgdState::for_model(m, 0.9, 0.1, 0.1);
    Gradients g;
    g.weights = {Tensor({1, 1}, {0.0})};
    g.biases = {Tensor({std::size_t{1}}, {0.0})};

    double p = 1.0, v = 0.0;
    for (int step = 0; step < 2; ++step) {
        v = 0.9 * v + (0.0 + 0.1 * p);
        p -= 0.1 * v;
        sgd_step(m, g, s);
        CHECK(m.weights[0].v[0] == doctest::Approx(p).epsilon(1e-15));
    }
}

TEST_CASE("sgd_step rejects non-finite gradients naming the layer") {
    RngStream rng(6);
    MlpModel m = init_model({2, 3, 2}, rng);
    SgdState s = SgdState::for_model(m, 0.9, 0.0, 0.1);
    Gradients g;
    for (const auto& w : m.weights) g.weights.emplace_back(w.shape);
    for (const auto& b : m.biases) g.biases.emplace_back(b.shape);
    g.weights[1].v[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(sgd_step(m, g, s), doctest::Contains("layer 1"), NumericError);
}

TEST_CASE("momentum buffers persist and shapes never change") {
    RngStream rng(6);
    MlpModel m = init_model({2, 3, 2}, rng);
    SgdState s = SgdState::for_model(m, 0.9, 0.0, 0.1);
    Gradients g;
    for (const auto& w : m.weights) {
        g.weights.emplace_back(w.shape);
        std::fill(g.weights.back().v.begin(), g.weights.back().v.end(), 1.0);
    }
    for (const auto& b : m.biases) g.biases.emplace_back(b.shape);
    sgd_step(m, g, s);
    CHECK(s.momentum_weights[0].v[0] == doctest::Approx(1.0));
    sgd_step(m, g, s);
    CHECK(s.momentum_weights[0].v[0] == doctest::Approx(1.9));
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        CHECK(m.weights[l].shape == s.momentum_weights[l].shape);
        CHECK(m.biases[l].shape == s.momentum_biases[l].shape);
    }
}
