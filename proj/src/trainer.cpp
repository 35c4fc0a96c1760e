#include "depthforge/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "depthforge/dataset.hpp"
#include "depthforge/log.hpp"

namespace depthforge {

void validate_train_config(const TrainConfig& cfg) {
    if (!(cfg.base_lr > 0.0)) throw ValidationError("base_lr must be > 0");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ValidationError("gamma must be in (0,1)");
    if (cfg.first_step_epochs < 1) throw ValidationError("first_step_epochs must be >= 1");
    if (cfg.total_epochs < 1) throw ValidationError("total_epochs must be >= 1");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
        throw ValidationError("momentum must be in [0,1)");
    }
    if (cfg.weight_decay < 0.0) throw ValidationError("weight_decay must be >= 0");
    if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    validate_policy(cfg.augment);
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
    long long boundary = 0;
    long long div = 1;
    int k = 0;
    for (;;) {
        boundary += (cfg.first_step_epochs + div - 1) / div;
        if (epoch < boundary) break;
        ++k;
        if (div < (1LL << 40)) div *= 2;
    }
    return cfg.base_lr * std::pow(cfg.gamma, k);
}

std::string curve_csv(const TrainCurve& curve) {
    std::ostringstream out;
    out << "epoch,lr,loss,train_acc\n";
    for (const auto& e : curve) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.6f,%.6f\n", e.epoch, e.lr, e.loss,
                      e.train_acc);
        out << buf;
    }
    return out.str();
}

namespace {

int argmax_row(const Tensor<float>& probs, int row) {
    const int c = probs.shape[1];
    const float* p = &probs.data[static_cast<size_t>(row) * c];
    int best = 0;
    for (int j = 1; j < c; ++j) {
        if (p[j] > p[best]) best = j;
    }
    return best;
}

}  // namespace

TrainCurve train(Net<float>& net, const std::vector<TrainSample>& data, const TrainConfig& cfg) {
    validate_train_config(cfg);
    if (data.empty()) throw EmptyDatasetError("training set is empty");
    for (const auto& s : data) {
        if (s.label < 0 || s.label >= net.num_classes()) {
            throw LabelUnknownError("label " + std::to_string(s.label) + " outside [0, " +
                                    std::to_string(net.num_classes()) + ")");
        }
    }

    const NetSpec& spec = net.spec();
    SgdState<float> state;
    auto params = net.params();
    const CounterRng root(cfg.seed);
    TrainCurve curve;
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < cfg.total_epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        CounterRng shuffle_rng = root.derive("shuffle").derive(static_cast<std::uint64_t>(epoch));
        std::iota(order.begin(), order.end(), size_t{0});
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        size_t correct = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            const int bs = static_cast<int>(end - start);
            Tensor<float> x({bs, spec.in_channels, spec.in_h, spec.in_w});
            std::vector<int> labels(bs);
            const size_t plane = static_cast<size_t>(spec.in_h) * spec.in_w;
            for (int b = 0; b < bs; ++b) {
                const size_t idx = order[start + b];
                CounterRng aug_rng = root.derive("augment")
                                         .derive(static_cast<std::uint64_t>(epoch))
                                         .derive(static_cast<std::uint64_t>(idx));
                const DepthImage aug = augment_pipeline(data[idx].img, cfg.augment, aug_rng);
                float* dst = &x.data[static_cast<size_t>(b) * plane];
                for (size_t i = 0; i < plane; ++i) {
                    dst[i] = static_cast<float>(aug.gray[i]) / 255.0f;
                }
                labels[b] = data[idx].label;
            }
            const float loss = net.forward_loss(x, labels);
            net.backward();
            sgd_step(params, state, lr, cfg.momentum, cfg.weight_decay);
            loss_sum += static_cast<double>(loss) * bs;
            const Tensor<float>& probs = net.probs();
            for (int b = 0; b < bs; ++b) {
                if (argmax_row(probs, b) == labels[b]) ++correct;
            }
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.loss = loss_sum / static_cast<double>(data.size());
        stats.train_acc = static_cast<double>(correct) / static_cast<double>(data.size());
        curve.push_back(stats);
        log_info("epoch " + std::to_string(epoch) + " lr " + std::to_string(lr) + " loss " +
                 std::to_string(stats.loss) + " acc " + std::to_string(stats.train_acc));
    }
    return curve;
}

std::pair<double, double> evaluate(Net<float>& net, const std::vector<TrainSample>& data,
                                   int batch_size) {
    if (data.empty()) throw EmptyDatasetError("evaluation set is empty");
    const NetSpec& spec = net.spec();
    double loss_sum = 0.0;
    size_t correct = 0;
    const size_t plane = static_cast<size_t>(spec.in_h) * spec.in_w;
    for (size_t start = 0; start < data.size(); start += batch_size) {
        const size_t end = std::min(data.size(), start + static_cast<size_t>(batch_size));
        const int bs = static_cast<int>(end - start);
        Tensor<float> x({bs, spec.in_channels, spec.in_h, spec.in_w});
        std::vector<int> labels(bs);
        for (int b = 0; b < bs; ++b) {
            const Tensor<float> one = image_to_input(data[start + b].img, spec, Preproc::raw);
            std::copy(one.data.begin(), one.data.end(), x.data.begin() + b * plane);
            labels[b] = data[start + b].label;
        }
        loss_sum += static_cast<double>(net.forward_loss(x, labels)) * bs;
        const Tensor<float>& probs = net.probs();
        for (int b = 0; b < bs; ++b) {
            if (argmax_row(probs, b) == labels[b]) ++correct;
        }
    }
    return {loss_sum / static_cast<double>(data.size()),
            static_cast<double>(correct) / static_cast<double>(data.size())};
}

}  // namespace depthforge
