#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depthforge/augment.hpp"
#include "depthforge/net.hpp"

namespace depthforge {

class EmptyDatasetError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class LabelUnknownError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
    double base_lr = 0.01;
    double gamma = 0.5;
    int first_step_epochs = 25;
    int total_epochs = 50;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    int batch_size = 32;
    std::uint64_t seed = 0;
    AugmentPolicy augment;
};

void validate_train_config(const TrainConfig& cfg);

// Variable step-down schedule: lr = base_lr * gamma^k, where step k begins at
// cumulative epoch E + ceil(E/2) + ceil(E/4) + ... (E = first_step_epochs).
double lr_schedule(int epoch, const TrainConfig& cfg);

template <typename T>
struct SgdState {
    std::vector<Tensor<T>> velocity;
};

// v <- momentum*v - lr*(grad + weight_decay*w); w <- w + v.
// Weight decay lives here, not in backward.
template <typename T>
void sgd_step(std::vector<Param<T>*> params, SgdState<T>& state, double lr, double momentum,
              double weight_decay) {
    if (state.velocity.empty()) {
        for (Param<T>* p : params) state.velocity.emplace_back(p->value.shape);
    }
    for (size_t i = 0; i < params.size(); ++i) {
        Param<T>& p = *params[i];
        Tensor<T>& v = state.velocity[i];
        for (size_t j = 0; j < p.value.data.size(); ++j) {
            v.data[j] = static_cast<T>(momentum) * v.data[j] -
                        static_cast<T>(lr) *
                            (p.grad.data[j] + static_cast<T>(weight_decay) * p.value.data[j]);
            p.value.data[j] += v.data[j];
        }
    }
}

struct TrainSample {
    DepthImage img;
    int label = 0;
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double train_acc = 0.0;
};

using TrainCurve = std::vector<EpochStats>;

// CSV with header: epoch,lr,loss,train_acc
std::string curve_csv(const TrainCurve& curve);

// SGD over shuffled mini-batches with per-sample training-time augmentation.
// Deterministic given cfg.seed (single-threaded). Returns the per-epoch curve.
TrainCurve train(Net<float>& net, const std::vector<TrainSample>& data, const TrainConfig& cfg);

// Loss and accuracy without augmentation (full-frame rescale only).
std::pair<double, double> evaluate(Net<float>& net, const std::vector<TrainSample>& data,
                                   int batch_size = 32);

}  // namespace depthforge
