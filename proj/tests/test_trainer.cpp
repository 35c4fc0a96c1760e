#include <cmath>
#include <string>
#include <vector>

#include "depthforge/dataset.hpp"
#include "depthforge/net.hpp"
#include "depthforge/trainer.hpp"
#include "doctest.h"

using namespace depthforge;

namespace {

// 16x16 two-class toy set: class 0 carries a dark blob top-left, class 1
// bottom-right. Linearly separable from raw pixels.
std::vector<TrainSample> toy_set(int per_class = 8) {
    std::vector<TrainSample> data;
    for (int i = 0; i < per_class; ++i) {
        TrainSample a;
        a.img = DepthImage(16, 16);
        for (int y = 2; y < 7 + i % 3; ++y) {
            for (int x = 2; x < 7; ++x) a.img.gray[y * 16 + x] = static_cast<std::uint8_t>(30 + i * 5);
        }
        a.label = 0;
        data.push_back(std::move(a));

        TrainSample b;
        b.img = DepthImage(16, 16);
        for (int y = 9; y < 14; ++y) {
            for (int x = 9 - i % 2; x < 14; ++x) {
                b.img.gray[y * 16 + x] = static_cast<std::uint8_t>(140 + i * 5);
            }
        }
        b.label = 1;
        data.push_back(std::move(b));
    }
    return data;
}

NetSpec toy_spec(int num_classes = 2) {
    NetSpec spec;
    spec.in_channels = 1;
    spec.in_h = 16;
    spec.in_w = 16;
    using K = LayerSpec::Kind;
    spec.layers = {
        {.kind = K::fc, .channels = 16},
        {.kind = K::relu},
        {.kind = K::fc, .channels = num_classes},
        {.kind = K::softmax_loss},
    };
    return spec;
}

TrainConfig toy_config(std::uint64_t seed = 1) {
    TrainConfig cfg;
    cfg.base_lr = 0.01;
    cfg.gamma = 0.5;
    cfg.first_step_epochs = 10;
    cfg.total_epochs = 20;
    cfg.batch_size = 4;
    cfg.seed = seed;
    cfg.augment = AugmentPolicy{};
    cfg.augment.crop_min_frac = 1.0;
    cfg.augment.input_size = 16;
    return cfg;
}

}  // namespace

TEST_CASE("lr schedule halves at successively shorter steps") {
    TrainConfig cfg;
    cfg.base_lr = 0.01;
    cfg.gamma = 0.5;
    cfg.first_step_epochs = 25;

    // Step lengths 25, 13, 7, 4, 2, 1, 1, ... (ceil of E/2^k), so the rate
    // drops at cumulative epochs 25, 38, 45, 49, 51, 52, ...
    CHECK(lr_schedule(0, cfg) == doctest::Approx(0.01));
    CHECK(lr_schedule(24, cfg) == doctest::Approx(0.01));
    CHECK(lr_schedule(25, cfg) == doctest::Approx(0.005));
    CHECK(lr_schedule(37, cfg) == doctest::Approx(0.005));
    CHECK(lr_schedule(38, cfg) == doctest::Approx(0.0025));
    CHECK(lr_schedule(44, cfg) == doctest::Approx(0.0025));
    CHECK(lr_schedule(45, cfg) == doctest::Approx(0.00125));
    CHECK(lr_schedule(48, cfg) == doctest::Approx(0.00125));
    CHECK(lr_schedule(49, cfg) == doctest::Approx(0.000625));
    CHECK(lr_schedule(51, cfg) == doctest::Approx(0.0003125));
    CHECK(lr_schedule(52, cfg) == doctest::Approx(0.00015625));
}

TEST_CASE("lr schedule: short first steps and degenerate E=1") {
    TrainConfig cfg;
    cfg.base_lr = 0.01;
    cfg.gamma = 0.5;

    cfg.first_step_epochs = 10;  // steps 10, 5, 3, 2, 1, ...
    CHECK(lr_schedule(9, cfg) == doctest::Approx(0.01));
    CHECK(lr_schedule(10, cfg) == doctest::Approx(0.005));
    CHECK(lr_schedule(14, cfg) == doctest::Approx(0.005));
    CHECK(lr_schedule(15, cfg) == doctest::Approx(0.0025));
    CHECK(lr_schedule(17, cfg) == doctest::Approx(0.0025));
    CHECK(lr_schedule(18, cfg) == doctest::Approx(0.00125));
    CHECK(lr_schedule(20, cfg) == doctest::Approx(0.000625));

    cfg.first_step_epochs = 8;  // steps 8, 4, 2, 1, 1, ...
    CHECK(lr_schedule(7, cfg) == doctest::Approx(0.01));
    CHECK(lr_schedule(8, cfg) == doctest::Approx(0.005));
    CHECK(lr_schedule(12, cfg) == doctest::Approx(0.0025));
    CHECK(lr_schedule(14, cfg) == doctest::Approx(0.00125));

    // E=1 degenerates to one halving per epoch.
    cfg.first_step_epochs = 1;
    for (int e = 0; e < 10; ++e) {
        CHECK(lr_schedule(e, cfg) == doctest::Approx(0.01 * std::pow(0.5, e)));
    }
}

TEST_CASE("sgd_step applies momentum and decoupled weight decay") {
    Param<double> p;
    p.name = "w";
    p.value = Tensor<double>({2});
    p.grad = Tensor<double>({2});
    p.value.data = {1.0, -2.0};
    p.grad.data = {0.5, 0.25};

    SgdState<double> state;
    sgd_step<double>({&p}, state, 0.1, 0.9, 0.1);

    // First step: velocity starts at zero, so v = -lr*(g + wd*w).
    CHECK(p.value.data[0] == doctest::Approx(0.94).epsilon(1e-12));
    CHECK(p.value.data[1] == doctest::Approx(-2.005).epsilon(1e-12));
    CHECK(state.velocity.size() == 1);
    CHECK(state.velocity[0].data[0] == doctest::Approx(-0.06).epsilon(1e-12));

    // Second step with zero gradient: momentum carries the old velocity and
    // weight decay keeps pulling toward zero.
    p.grad.data = {0.0, 0.0};
    sgd_step<double>({&p}, state, 0.1, 0.9, 0.1);
    CHECK(p.value.data[0] == doctest::Approx(0.94 - 0.054 - 0.0094).epsilon(1e-12));
    CHECK(p.value.data[1] == doctest::Approx(-2.005 - 0.9 * 0.005 + 0.02005).epsilon(1e-12));
}

TEST_CASE("sgd_step without momentum or decay is plain gradient descent") {
    Param<double> p;
    p.name = "w";
    p.value = Tensor<double>({1});
    p.grad = Tensor<double>({1});
    p.value.data = {3.0};
    p.grad.data = {2.0};

    SgdState<double> state;
    sgd_step<double>({&p}, state, 0.25, 0.0, 0.0);
    CHECK(p.value.data[0] == doctest::Approx(2.5).epsilon(1e-12));
    sgd_step<double>({&p}, state, 0.25, 0.0, 0.0);
    CHECK(p.value.data[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("train config validation") {
    TrainConfig good = toy_config();
    CHECK_NOTHROW(validate_train_config(good));

    auto bad = good;
    bad.base_lr = 0.0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);
    bad.gamma = 0.0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.first_step_epochs = 0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.total_epochs = 0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.momentum = 1.0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);
    bad.momentum = -0.1;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.weight_decay = -1e-6;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.batch_size = 0;
    CHECK_THROWS_AS(validate_train_config(bad), ValidationError);

    bad = good;
    bad.augment.occlude_prob = 1.5;
    CHECK_THROWS_AS(validate_train_config(bad), ParamOutOfRangeError);
}

TEST_CASE("training fits a separable toy problem") {
    const auto data = toy_set();
    Net<float> net(toy_spec(), 3);
    const TrainConfig cfg = toy_config(17);

    const TrainCurve curve = train(net, data, cfg);
    REQUIRE(curve.size() == static_cast<size_t>(cfg.total_epochs));
    for (int e = 0; e < cfg.total_epochs; ++e) {
        CHECK(curve[e].epoch == e);
        CHECK(curve[e].lr == doctest::Approx(lr_schedule(e, cfg)));
        CHECK(std::isfinite(curve[e].loss));
    }
    CHECK(curve.back().train_acc == doctest::Approx(1.0));
    CHECK(curve.back().loss < curve.front().loss);

    const auto [loss, acc] = evaluate(net, data);
    CHECK(acc == doctest::Approx(1.0));
    CHECK(loss < 0.3);
}

TEST_CASE("zeroed net starts at chance: loss ln(C)") {
    const auto data = toy_set(2);
    Net<float> net(toy_spec(), 5);
    for (Param<float>* p : net.params()) {
        std::fill(p->value.data.begin(), p->value.data.end(), 0.0f);
    }
    const auto [loss, acc] = evaluate(net, data);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-5));
}

TEST_CASE("training is reproducible per seed") {
    const auto data = toy_set();
    const TrainConfig cfg = toy_config(42);

    Net<float> a(toy_spec(), 3);
    Net<float> b(toy_spec(), 3);
    const TrainCurve ca = train(a, data, cfg);
    const TrainCurve cb = train(b, data, cfg);

    REQUIRE(ca.size() == cb.size());
    for (size_t i = 0; i < ca.size(); ++i) {
        CHECK(ca[i].loss == cb[i].loss);
        CHECK(ca[i].train_acc == cb[i].train_acc);
    }
    const auto wa = a.to_arrays(), wb = b.to_arrays();
    for (size_t i = 0; i < wa.size(); ++i) CHECK(wa[i].data == wb[i].data);

    // A different shuffle/augment seed takes a different path.
    Net<float> c(toy_spec(), 3);
    TrainConfig other = cfg;
    other.seed = 43;
    const TrainCurve cc = train(c, data, other);
    bool differs = false;
    for (size_t i = 0; i < ca.size(); ++i) {
        if (ca[i].loss != cc[i].loss) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("train rejects empty data and unknown labels") {
    Net<float> net(toy_spec(), 1);
    const TrainConfig cfg = toy_config();

    CHECK_THROWS_AS(train(net, {}, cfg), EmptyDatasetError);
    CHECK_THROWS_AS(evaluate(net, {}), EmptyDatasetError);

    auto data = toy_set(1);
    data[0].label = 2;
    CHECK_THROWS_AS(train(net, data, cfg), LabelUnknownError);
    data[0].label = -1;
    CHECK_THROWS_AS(train(net, data, cfg), LabelUnknownError);
}

TEST_CASE("curve csv layout") {
    TrainCurve curve;
    curve.push_back({0, 0.01, 0.6931471805599453, 0.5});
    curve.push_back({1, 0.000625, 0.1234564999, 1.0});
    CHECK(curve_csv(curve) ==
          "epoch,lr,loss,train_acc\n"
          "0,0.01,0.693147,0.500000\n"
          "1,0.000625,0.123456,1.000000\n");
    CHECK(curve_csv({}) == "epoch,lr,loss,train_acc\n");
}
