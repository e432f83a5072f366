#include <doctest.h>

#include <cmath>

#include "nct/data_io.hpp"
#include "nct/noise.hpp"
#include "nct/trainer.hpp"

using namespace nct;

namespace {

TrainConfig tiny_config(Method method, std::uint64_t master) {
    TrainConfig cfg;
    cfg.method = method;
    cfg.batch_size = 32;
    cfg.layer_dims = {2, 8, 2};
    cfg.schedule.total_epochs = 5;
    cfg.schedule.ramp_len = 4;
    cfg.schedule.r_max = 0.5;
    cfg.schedule.lr_decay_epoch = 100;
    cfg.streams = StreamSeeds::from_master(master);
    return cfg;
}

bool models_equal(const MlpModel& a, const MlpModel& b) {
    for (std::size_t l = 0; l < a.num_layers(); ++l)
        if (a.weights[l].v != b.weights[l].v || a.biases[l].v != b.biases[l].v) return false;
    return true;
}

}  // namespace

TEST_CASE("alpha 0 and no target variability decouples into standard runs") {
    auto train_ds = generate_blobs(300, 2, 2, 3.0, 1);
    auto test_ds = generate_blobs(200, 2, 2, 3.0, 2);

    TrainConfig cfg = tiny_config(Method::nct, 42);
    cfg.schedule.alpha_max = 0.0;
    cfg.schedule.r_max = 0.0;
    TrainResult nct_res = train(train_ds, test_ds, cfg);

    TrainConfig std1 = cfg;
    std1.method = Method::standard;
    TrainResult s1 = train(train_ds, test_ds, std1);
    CHECK(models_equal(nct_res.state.model1, s1.state.model1));

    TrainConfig std2 = std1;
    std2.streams.init_model_1 = cfg.streams.init_model_2;
    TrainResult s2 = train(train_ds, test_ds, std2);
    CHECK(models_equal(nct_res.state.model2, s2.state.model1));
}

TEST_CASE("shared init and target-variability streams collapse to identical twins") {
    auto clean = generate_blobs(300, 2, 2, 3.0, 3);
    auto train_ds = corrupt_symmetric_exclusive(clean, 0.4, RngStream(4));
    auto test_ds = generate_blobs(200, 2, 2, 3.0, 5);

    TrainConfig cfg = tiny_config(Method::nct, 7);
    cfg.streams.init_model_2 = cfg.streams.init_model_1;
    cfg.streams.tv_model_2 = cfg.streams.tv_model_1;
    TrainResult res = train(train_ds, test_ds, cfg);
    CHECK(models_equal(res.state.model1, res.state.model2));
}

TEST_CASE("swapping model seeds and tv streams swaps the two models exactly") {
    auto clean = generate_blobs(300, 2, 2, 3.0, 6);
    auto train_ds = corrupt_symmetric_exclusive(clean, 0.4, RngStream(7));
    auto test_ds = generate_blobs(200, 2, 2, 3.0, 8);

    TrainConfig cfg = tiny_config(Method::nct, 9);
    TrainResult a = train(train_ds, test_ds, cfg);

    TrainConfig swapped = cfg;
    std::swap(swapped.streams.init_model_1, swapped.streams.init_model_2);
    std::swap(swapped.streams.tv_model_1, swapped.streams.tv_model_2);
    TrainResult b = train(train_ds, test_ds, swapped);

    CHECK(models_equal(a.state.model1, b.state.model2));
    CHECK(models_equal(a.state.model2, b.state.model1));
    CHECK(a.metrics.back().test_acc_ensemble == b.metrics.back().test_acc_ensemble);
    CHECK(a.metrics.back().test_acc_model1 == *b.metrics.back().test_acc_model2);
}

TEST_CASE("recorded alpha_d and r_d match the schedule functions") {
    auto clean = generate_blobs(200, 2, 2, 3.0, 10);
    auto train_ds = corrupt_symmetric_exclusive(clean, 0.3, RngStream(11));
    auto test_ds = generate_blobs(100, 2, 2, 3.0, 12);

    TrainConfig cfg = tiny_config(Method::nct, 13);
    TrainResult res = train(train_ds, test_ds, cfg);
    REQUIRE(res.metrics.size() == 5);
    for (const auto& em : res.metrics) {
        CHECK(em.alpha_d == alpha_at_epoch(em.epoch, cfg.schedule));
        CHECK(em.r_d == variability_rate_at_epoch(em.epoch, cfg.schedule));
        CHECK(em.lr == lr_at_epoch(em.epoch, cfg.schedule));
    }
}

TEST_CASE("dml with schedules disabled matches nct with fixed alpha") {
    auto clean = generate_blobs(200, 2, 2, 3.0, 14);
    auto train_ds = corrupt_symmetric_exclusive(clean, 0.3, RngStream(15));
    auto test_ds = generate_blobs(100, 2, 2, 3.0, 16);

    TrainConfig dml = tiny_config(Method::dml, 17);
    dml.dml_alpha = 0.5;
    TrainResult a = train_dml(train_ds, test_ds, dml);

    // nct with a flat alpha schedule and no target variability is the same loop
    TrainConfig flat = tiny_config(Method::nct_no_tv, 17);
    flat.schedule.alpha_max = 0.5;
    flat.schedule.beta_mag = 0.0;  // exp(0) ramp: alpha_d == alpha_max everywhere
    TrainResult b = train(train_ds, test_ds, flat);

    CHECK(models_equal(a.state.model1, b.state.model1));
    CHECK(models_equal(a.state.model2, b.state.model2));
}

TEST_CASE("zero epochs returns the initialized model and no metrics") {
    auto ds = generate_blobs(100, 2, 2, 3.0, 18);
    TrainConfig cfg = tiny_config(Method::standard, 19);
    cfg.schedule.total_epochs = 0;
    cfg.schedule.ramp_len = 0;
    TrainResult res = train(ds, ds, cfg);
    CHECK(res.metrics.empty());
    RngStream init(cfg.streams.init_model_1);
    MlpModel fresh = init_model(cfg.layer_dims, init);
    CHECK(models_equal(res.state.model1, fresh));
}

TEST_CASE("evaluate on a constant model matches the class-0 base rate") {
    RngStream rng(20);
    LabeledDataset test;
    test.num_classes = 2;
    test.features = matrix(10000, 2);
    test.labels.resize(10000);
    test.clean_labels.resize(10000);
    for (std::size_t i = 0; i < 10000; ++i)
        test.labels[i] = test.clean_labels[i] = rng.uniform_int(2);

    MlpModel zero;
    zero.layer_dims = {2, 2};
    zero.weights = {matrix(2, 2)};
    zero.biases = {Tensor({std::size_t{2}})};
    double acc = evaluate(zero, nullptr, test, EvalMode::single);
    CHECK(std::abs(acc - 0.5) < 0.015);
}

TEST_CASE("a perfect linear model scores 1.0 and ensembles with itself") {
    auto test = generate_blobs(500, 2, 2, 12.0, 21);
    MlpModel m;
    m.layer_dims = {2, 2};
    m.weights = {Tensor({2, 2}, {1.0, -1.0, 0.0, 0.0})};
    m.biases = {Tensor({std::size_t{2}})};
    CHECK(evaluate(m, nullptr, test, EvalMode::single) == 1.0);
    CHECK(evaluate(m, &m, test, EvalMode::ensemble) ==
          evaluate(m, nullptr, test, EvalMode::single));
}

TEST_CASE("evaluate rejects an empty test set") {
    LabeledDataset empty;
    empty.num_classes = 2;
    empty.features = matrix(0, 2);
    MlpModel m;
    m.layer_dims = {2, 2};
    m.weights = {matrix(2, 2)};
    m.biases = {Tensor({std::size_t{2}})};
    CHECK_THROWS_AS(evaluate(m, nullptr, empty, EvalMode::single), std::invalid_argument);
}

TEST_CASE("memorization metrics on a clean dataset report no noisy subset") {
    auto ds = generate_blobs(200, 2, 2, 3.0, 22);
    RngStream rng(23);
    MlpModel m = init_model({2, 8, 2}, rng);
    auto [clean, noisy] = memorization_metrics(m, nullptr, ds, EvalMode::single);
    CHECK_FALSE(noisy.has_value());
    CHECK(clean.accuracy >= 0.0);
    CHECK(clean.accuracy <= 1.0);
}

TEST_CASE("memorization metrics with uniform outputs give ln 2 loss on both subsets") {
    auto clean_ds = generate_blobs(4000, 2, 2, 3.0, 24);
    auto ds = corrupt_symmetric_exclusive(clean_ds, 0.4, RngStream(25));
    MlpModel zero;
    zero.layer_dims = {2, 2};
    zero.weights = {matrix(2, 2)};
    zero.biases = {Tensor({std::size_t{2}})};
    auto [c, n] = memorization_metrics(zero, nullptr, ds, EvalMode::single);
    REQUIRE(n.has_value());
    CHECK(c.loss == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(n->loss == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(std::abs(c.accuracy - 0.5) < 0.05);
    CHECK(std::abs(n->accuracy - 0.5) < 0.05);
}

TEST_CASE("training aborts on class count mismatch") {
    auto ds = generate_blobs(100, 2, 2, 3.0, 26);
    auto test = generate_blobs(100, 2, 3, 3.0, 27);
    TrainConfig cfg = tiny_config(Method::standard, 28);
    CHECK_THROWS_AS(train(ds, test, cfg), std::invalid_argument);
}
