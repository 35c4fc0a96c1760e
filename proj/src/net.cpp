#include "depthforge/net.hpp"

#include <set>

#include "depthforge/dataset.hpp"

namespace depthforge {

NetSpec mini_depth_net_spec(int num_classes, int input_size) {
    if (num_classes < 2) throw ValidationError("need at least 2 classes");
    NetSpec spec;
    spec.in_channels = 1;
    spec.in_h = input_size;
    spec.in_w = input_size;
    using K = LayerSpec::Kind;
    spec.layers = {
        {.kind = K::conv, .channels = 16, .size = 5, .stride = 1, .pad = 2},
        {.kind = K::relu},
        {.kind = K::maxpool, .size = 2, .stride = 2},
        {.kind = K::lrn, .size = 5, .alpha = 1e-4, .beta = 0.75},
        {.kind = K::conv, .channels = 32, .size = 5, .stride = 1, .pad = 2},
        {.kind = K::relu},
        {.kind = K::maxpool, .size = 2, .stride = 2},
        {.kind = K::conv, .channels = 64, .size = 3, .stride = 1, .pad = 1},
        {.kind = K::relu},
        {.kind = K::maxpool, .size = 2, .stride = 2, .tap = "pool_last"},
        {.kind = K::fc, .channels = 256, .tap = "fc6"},
        {.kind = K::relu},
        {.kind = K::fc, .channels = num_classes, .tap = "fc7"},
        {.kind = K::softmax_loss},
    };
    return spec;
}

void validate_net_spec(const NetSpec& spec) {
    if (spec.in_channels < 1 || spec.in_h < 1 || spec.in_w < 1) {
        throw ShapeMismatchError("net input shape must be positive");
    }
    if (spec.layers.empty()) throw ValidationError("net spec has no layers");

    std::set<std::string> taps;
    int c = spec.in_channels, h = spec.in_h, w = spec.in_w;
    bool flat = false;
    int losses = 0;
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& ls = spec.layers[i];
        if (!ls.tap.empty() && !taps.insert(ls.tap).second) {
            throw ValidationError("duplicate tap name: " + ls.tap);
        }
        if (losses > 0) throw ValidationError("loss layer must be last");
        switch (ls.kind) {
            case LayerSpec::Kind::conv: {
                if (flat) throw ShapeMismatchError("conv after fc is not supported");
                if (ls.channels < 1 || ls.size < 1 || ls.stride < 1 || ls.pad < 0) {
                    throw ValidationError("bad conv parameters at layer " + std::to_string(i));
                }
                if (ls.size > h + 2 * ls.pad || ls.size > w + 2 * ls.pad) {
                    throw ShapeMismatchError("conv kernel exceeds padded input at layer " +
                                             std::to_string(i));
                }
                h = (h + 2 * ls.pad - ls.size) / ls.stride + 1;
                w = (w + 2 * ls.pad - ls.size) / ls.stride + 1;
                if (h < 1 || w < 1) throw ShapeMismatchError("conv output collapses to zero");
                c = ls.channels;
                break;
            }
            case LayerSpec::Kind::relu:
                break;
            case LayerSpec::Kind::maxpool: {
                if (flat) throw ShapeMismatchError("maxpool after fc is not supported");
                if (ls.size < 1 || ls.stride < 1) {
                    throw ValidationError("bad maxpool parameters at layer " + std::to_string(i));
                }
                // (h - size) / stride truncates toward zero, so a window wider
                // than the input would silently report a 1-extent output.
                if (ls.size > h || ls.size > w) {
                    throw ShapeMismatchError("maxpool window exceeds its input at layer " +
                                             std::to_string(i));
                }
                h = (h - ls.size) / ls.stride + 1;
                w = (w - ls.size) / ls.stride + 1;
                if (h < 1 || w < 1) throw ShapeMismatchError("maxpool output collapses to zero");
                break;
            }
            case LayerSpec::Kind::lrn:
                if (flat) throw ShapeMismatchError("lrn after fc is not supported");
                if (ls.size < 1 || ls.size % 2 == 0) {
                    throw ValidationError("lrn local_size must be odd and positive");
                }
                break;
            case LayerSpec::Kind::fc:
                if (ls.channels < 1) {
                    throw ValidationError("bad fc width at layer " + std::to_string(i));
                }
                c = ls.channels;
                flat = true;
                break;
            case LayerSpec::Kind::softmax_loss:
                if (!flat) throw ShapeMismatchError("loss layer requires fc logits before it");
                if (c < 2) throw ShapeMismatchError("need at least 2 classes at the loss");
                ++losses;
                break;
        }
    }
    if (losses != 1) throw ValidationError("net spec must end with exactly one loss layer");
}

Preproc preproc_from_string(const std::string& s) {
    if (s == "raw") return Preproc::raw;
    if (s == "minmax") return Preproc::minmax;
    throw ValidationError("unknown preprocessing mode: " + s + " (expected raw or minmax)");
}

Tensor<float> image_to_input(const DepthImage& img, const NetSpec& spec, Preproc pre) {
    DepthImage prepped = pre == Preproc::minmax ? minmax_normalize(img) : img;
    if (prepped.width != spec.in_w || prepped.height != spec.in_h) {
        prepped = crop(prepped, Rect{0, 0, prepped.width, prepped.height}, spec.in_w, spec.in_h);
    }
    Tensor<float> x({1, 1, spec.in_h, spec.in_w});
    for (size_t i = 0; i < prepped.gray.size(); ++i) {
        x.data[i] = static_cast<float>(prepped.gray[i]) / 255.0f;
    }
    return x;
}

FeatureVector extract_features(Net<float>& net, const DepthImage& img,
                               const std::string& layer_name, Preproc pre) {
    const Tensor<float> tap = net.forward_to_tap(image_to_input(img, net.spec(), pre), layer_name);
    FeatureVector fv;
    fv.layer_name = layer_name;
    fv.values = tap.data;
    return fv;
}

}  // namespace depthforge
