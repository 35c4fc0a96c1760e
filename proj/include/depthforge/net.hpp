#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "depthforge/array_io.hpp"
#include "depthforge/augment.hpp"
#include "depthforge/image.hpp"
#include "depthforge/rng.hpp"
#include "depthforge/tensor.hpp"

namespace depthforge {

class NoCachedForwardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UnknownLayerError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct LayerSpec {
    enum class Kind { conv, relu, maxpool, lrn, fc, softmax_loss };
    Kind kind{};
    int channels = 0;  // conv output channels / fc units
    int size = 0;      // conv kernel / pool window / lrn local_size
    int stride = 1;
    int pad = 0;
    double alpha = 1e-4;  // lrn
    double beta = 0.75;   // lrn
    std::string tap;      // optional feature tap on this layer's output
};

struct NetSpec {
    int in_channels = 1;
    int in_h = 64;
    int in_w = 64;
    std::vector<LayerSpec> layers;
};

// conv(16,5,1,2)-relu-pool(2,2)-lrn-conv(32,5,1,2)-relu-pool(2,2)-
// conv(64,3,1,1)-relu-pool(2,2)[pool_last]-fc(256)[fc6]-relu-fc(C)[fc7]-loss
NetSpec mini_depth_net_spec(int num_classes, int input_size = 64);

// Shape-checks the layer chain, requires exactly one trailing loss layer and
// unique tap names. Throws ShapeMismatchError / ValidationError.
void validate_net_spec(const NetSpec& spec);

template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
};

template <typename T>
class Layer {
  public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x) = 0;
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    virtual std::vector<Param<T>*> params() { return {}; }
    virtual const std::string& name() const = 0;
};

namespace detail {

template <typename T>
class ConvLayer final : public Layer<T> {
  public:
    ConvLayer(std::string name, int in_c, int out_c, int ksize, int stride, int pad)
        : name_(std::move(name)), in_c_(in_c), out_c_(out_c), k_(ksize), stride_(stride),
          pad_(pad) {
        w_.name = name_ + ".w";
        w_.value = Tensor<T>({out_c, in_c, ksize, ksize});
        w_.grad = Tensor<T>({out_c, in_c, ksize, ksize});
        b_.name = name_ + ".b";
        b_.value = Tensor<T>({out_c});
        b_.grad = Tensor<T>({out_c});
    }

    static int out_extent(int in, int k, int stride, int pad) {
        return (in + 2 * pad - k) / stride + 1;
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        if (x.shape.size() != 4 || x.shape[1] != in_c_) {
            throw ShapeMismatchError(name_ + ": expected 4-D input with " +
                                     std::to_string(in_c_) + " channels, got " + x.shape_str());
        }
        x_ = x;
        const int n = x.shape[0], h = x.shape[2], w = x.shape[3];
        const int oh = out_extent(h, k_, stride_, pad_);
        const int ow = out_extent(w, k_, stride_, pad_);
        if (oh < 1 || ow < 1) throw ShapeMismatchError(name_ + ": input too small");
        Tensor<T> y({n, out_c_, oh, ow});
        const int kdim = in_c_ * k_ * k_;
        const int patches = oh * ow;
        std::vector<T> col(static_cast<size_t>(kdim) * patches);
        for (int i = 0; i < n; ++i) {
            im2col(x, i, oh, ow, col.data());
            T* out = &y.data[static_cast<size_t>(i) * out_c_ * patches];
            gemm(w_.value.data.data(), col.data(), out, out_c_, kdim, patches);
            for (int c = 0; c < out_c_; ++c) {
                const T bias = b_.value.data[c];
                T* row = out + static_cast<size_t>(c) * patches;
                for (int p = 0; p < patches; ++p) row[p] += bias;
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (x_.data.empty()) throw NoCachedForwardError(name_ + ": backward before forward");
        const int n = x_.shape[0], h = x_.shape[2], w = x_.shape[3];
        const int oh = dy.shape[2], ow = dy.shape[3];
        const int kdim = in_c_ * k_ * k_;
        const int patches = oh * ow;
        std::fill(w_.grad.data.begin(), w_.grad.data.end(), T{});
        std::fill(b_.grad.data.begin(), b_.grad.data.end(), T{});
        Tensor<T> dx({n, in_c_, h, w});
        std::vector<T> col(static_cast<size_t>(kdim) * patches);
        std::vector<T> dcol(static_cast<size_t>(kdim) * patches);
        for (int i = 0; i < n; ++i) {
            im2col(x_, i, oh, ow, col.data());
            const T* dyp = &dy.data[static_cast<size_t>(i) * out_c_ * patches];
            gemm_nt(dyp, col.data(), w_.grad.data.data(), out_c_, patches, kdim, true);
            for (int c = 0; c < out_c_; ++c) {
                const T* row = dyp + static_cast<size_t>(c) * patches;
                T s{};
                for (int p = 0; p < patches; ++p) s += row[p];
                b_.grad.data[c] += s;
            }
            gemm_tn(w_.value.data.data(), dyp, dcol.data(), kdim, out_c_, patches);
            col2im(dcol.data(), i, oh, ow, dx);
        }
        return dx;
    }

    std::vector<Param<T>*> params() override { return {&w_, &b_}; }
    const std::string& name() const override { return name_; }

  private:
    void im2col(const Tensor<T>& x, int sample, int oh, int ow, T* col) const {
        const int h = x.shape[2], w = x.shape[3];
        const int patches = oh * ow;
        for (int c = 0; c < in_c_; ++c) {
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx) {
                    T* dst = col + (static_cast<size_t>(c) * k_ * k_ + ky * k_ + kx) * patches;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride_ - pad_ + kx;
                            dst[oy * ow + ox] =
                                (iy >= 0 && iy < h && ix >= 0 && ix < w) ? x.at(sample, c, iy, ix)
                                                                         : T{};
                        }
                    }
                }
            }
        }
    }

    void col2im(const T* dcol, int sample, int oh, int ow, Tensor<T>& dx) const {
        const int h = dx.shape[2], w = dx.shape[3];
        const int patches = oh * ow;
        for (int c = 0; c < in_c_; ++c) {
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx) {
                    const T* src = dcol + (static_cast<size_t>(c) * k_ * k_ + ky * k_ + kx) * patches;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride_ - pad_ + kx;
                            if (ix < 0 || ix >= w) continue;
                            dx.at(sample, c, iy, ix) += src[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }

    std::string name_;
    int in_c_, out_c_, k_, stride_, pad_;
    Param<T> w_, b_;
    Tensor<T> x_;
};

template <typename T>
class ReluLayer final : public Layer<T> {
  public:
    explicit ReluLayer(std::string name) : name_(std::move(name)) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        mask_.assign(x.data.size(), false);
        Tensor<T> y = x;
        for (size_t i = 0; i < y.data.size(); ++i) {
            if (y.data[i] > T{}) {
                mask_[i] = true;
            } else {
                y.data[i] = T{};
            }
        }
        shape_ = x.shape;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (mask_.empty() && !dy.data.empty()) {
            throw NoCachedForwardError(name_ + ": backward before forward");
        }
        Tensor<T> dx = dy;
        for (size_t i = 0; i < dx.data.size(); ++i) {
            if (!mask_[i]) dx.data[i] = T{};
        }
        return dx;
    }

    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    std::vector<bool> mask_;
    std::vector<int> shape_;
};

template <typename T>
class MaxPoolLayer final : public Layer<T> {
  public:
    MaxPoolLayer(std::string name, int size, int stride)
        : name_(std::move(name)), size_(size), stride_(stride) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        if (x.shape.size() != 4) {
            throw ShapeMismatchError(name_ + ": expected 4-D input, got " + x.shape_str());
        }
        const int n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
        // Truncating division would round a negative extent up to 1 and the
        // window loop would then run past the input rows.
        if (size_ > h || size_ > w) {
            throw ShapeMismatchError(name_ + ": window larger than input");
        }
        const int oh = (h - size_) / stride_ + 1;
        const int ow = (w - size_) / stride_ + 1;
        in_shape_ = x.shape;
        Tensor<T> y({n, c, oh, ow});
        argmax_.resize(y.data.size());
        size_t o = 0;
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                for (int oy = 0; oy < oh; ++oy) {
                    for (int ox = 0; ox < ow; ++ox, ++o) {
                        T best{};
                        size_t best_idx = 0;
                        bool first = true;
                        for (int ky = 0; ky < size_; ++ky) {
                            for (int kx = 0; kx < size_; ++kx) {
                                const int iy = oy * stride_ + ky;
                                const int ix = ox * stride_ + kx;
                                const size_t idx =
                                    ((static_cast<size_t>(i) * c + ch) * h + iy) * w + ix;
                                const T v = x.data[idx];
                                if (first || v > best) {
                                    best = v;
                                    best_idx = idx;
                                    first = false;
                                }
                            }
                        }
                        y.data[o] = best;
                        argmax_[o] = best_idx;
                    }
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (argmax_.empty()) throw NoCachedForwardError(name_ + ": backward before forward");
        Tensor<T> dx(in_shape_);
        for (size_t o = 0; o < dy.data.size(); ++o) dx.data[argmax_[o]] += dy.data[o];
        return dx;
    }

    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    int size_, stride_;
    std::vector<int> in_shape_;
    std::vector<size_t> argmax_;
};

// Cross-channel local response normalization with k = 1:
//   b_i = a_i * (1 + (alpha/n) * sum_{|j-i| <= n/2} a_j^2)^(-beta)
template <typename T>
class LrnLayer final : public Layer<T> {
  public:
    LrnLayer(std::string name, int local_size, double alpha, double beta)
        : name_(std::move(name)), n_(local_size), alpha_(alpha), beta_(beta) {}

    // d^(-0.75) = 1/(sqrt(d)*sqrt(sqrt(d))): two sqrts instead of pow, which
    // dominates the whole net's runtime otherwise. General betas fall back.
    static T pow_neg_beta(T d, double beta) {
        if (beta == 0.75) {
            const T r = std::sqrt(d);
            return static_cast<T>(1) / (r * std::sqrt(r));
        }
        return static_cast<T>(std::pow(d, -beta));
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        if (x.shape.size() != 4) {
            throw ShapeMismatchError(name_ + ": expected 4-D input, got " + x.shape_str());
        }
        x_ = x;
        denom_ = Tensor<T>(x.shape);
        Tensor<T> y(x.shape);
        const int n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
        const int half = n_ / 2;
        const T scale = static_cast<T>(alpha_ / n_);
        for (int i = 0; i < n; ++i) {
            for (int y0 = 0; y0 < h; ++y0) {
                for (int x0 = 0; x0 < w; ++x0) {
                    for (int ch = 0; ch < c; ++ch) {
                        T acc = static_cast<T>(1);
                        const int lo = std::max(0, ch - half);
                        const int hi = std::min(c - 1, ch + half);
                        for (int j = lo; j <= hi; ++j) {
                            const T a = x.at(i, j, y0, x0);
                            acc += scale * a * a;
                        }
                        denom_.at(i, ch, y0, x0) = acc;
                        y.at(i, ch, y0, x0) = x.at(i, ch, y0, x0) * pow_neg_beta(acc, beta_);
                    }
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (x_.data.empty()) throw NoCachedForwardError(name_ + ": backward before forward");
        const int n = x_.shape[0], c = x_.shape[1], h = x_.shape[2], w = x_.shape[3];
        const int half = n_ / 2;
        const T scale = static_cast<T>(alpha_ / n_);
        // Per-element dy_j * a_j * denom_j^(-beta-1), computed once instead of
        // once per window neighbor.
        Tensor<T> e(x_.shape);
        for (size_t idx = 0; idx < e.data.size(); ++idx) {
            const T dj = denom_.data[idx];
            e.data[idx] = dy.data[idx] * x_.data[idx] * pow_neg_beta(dj, beta_) / dj;
        }
        Tensor<T> dx(x_.shape);
        for (int i = 0; i < n; ++i) {
            for (int y0 = 0; y0 < h; ++y0) {
                for (int x0 = 0; x0 < w; ++x0) {
                    for (int ch = 0; ch < c; ++ch) {
                        const T denom = denom_.at(i, ch, y0, x0);
                        T d = dy.at(i, ch, y0, x0) * pow_neg_beta(denom, beta_);
                        // a_ch appears in the denominator of every output within
                        // its window.
                        const int lo = std::max(0, ch - half);
                        const int hi = std::min(c - 1, ch + half);
                        T s{};
                        for (int j = lo; j <= hi; ++j) s += e.at(i, j, y0, x0);
                        d -= static_cast<T>(2.0 * beta_) * scale * x_.at(i, ch, y0, x0) * s;
                        dx.at(i, ch, y0, x0) = d;
                    }
                }
            }
        }
        return dx;
    }

    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    int n_;
    double alpha_, beta_;
    Tensor<T> x_, denom_;
};

template <typename T>
class FcLayer final : public Layer<T> {
  public:
    FcLayer(std::string name, int in_dim, int out_dim)
        : name_(std::move(name)), in_dim_(in_dim), out_dim_(out_dim) {
        w_.name = name_ + ".w";
        w_.value = Tensor<T>({out_dim, in_dim});
        w_.grad = Tensor<T>({out_dim, in_dim});
        b_.name = name_ + ".b";
        b_.value = Tensor<T>({out_dim});
        b_.grad = Tensor<T>({out_dim});
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        const int n = x.shape.empty() ? 0 : x.shape[0];
        const int d = n > 0 ? static_cast<int>(x.numel() / n) : 0;
        if (d != in_dim_) {
            throw ShapeMismatchError(name_ + ": expected flattened dim " +
                                     std::to_string(in_dim_) + ", got " + x.shape_str());
        }
        x_ = x;
        Tensor<T> y({n, out_dim_});
        gemm_nt(x.data.data(), w_.value.data.data(), y.data.data(), n, in_dim_, out_dim_);
        for (int i = 0; i < n; ++i) {
            for (int o = 0; o < out_dim_; ++o) {
                y.data[static_cast<size_t>(i) * out_dim_ + o] += b_.value.data[o];
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (x_.data.empty()) throw NoCachedForwardError(name_ + ": backward before forward");
        const int n = x_.shape[0];
        gemm_tn(dy.data.data(), x_.data.data(), w_.grad.data.data(), out_dim_, n, in_dim_);
        std::fill(b_.grad.data.begin(), b_.grad.data.end(), T{});
        for (int i = 0; i < n; ++i) {
            for (int o = 0; o < out_dim_; ++o) {
                b_.grad.data[o] += dy.data[static_cast<size_t>(i) * out_dim_ + o];
            }
        }
        Tensor<T> dx(x_.shape);
        gemm(dy.data.data(), w_.value.data.data(), dx.data.data(), n, out_dim_, in_dim_);
        return dx;
    }

    std::vector<Param<T>*> params() override { return {&w_, &b_}; }
    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    int in_dim_, out_dim_;
    Param<T> w_, b_;
    Tensor<T> x_;
};

}  // namespace detail

// Feedforward net built from a NetSpec: the layer chain (loss layer excluded),
// softmax cross-entropy on the final logits, named feature taps.
template <typename T>
class Net {
  public:
    Net(const NetSpec& spec, std::uint64_t seed) : spec_(spec) {
        validate_net_spec(spec);
        build(seed);
    }

    Net(const Net& other) : spec_(other.spec_) {
        build(0);
        auto mine = params();
        auto theirs = const_cast<Net&>(other).params();
        for (size_t i = 0; i < mine.size(); ++i) mine[i]->value = theirs[i]->value;
    }

    Net& operator=(const Net& other) {
        if (this != &other) {
            Net tmp(other);
            std::swap(spec_, tmp.spec_);
            std::swap(layers_, tmp.layers_);
            std::swap(taps_, tmp.taps_);
            std::swap(num_classes_, tmp.num_classes_);
            logits_ = Tensor<T>();
            probs_ = Tensor<T>();
            labels_.clear();
        }
        return *this;
    }

    const NetSpec& spec() const { return spec_; }
    int num_classes() const { return num_classes_; }

    std::vector<std::string> tap_names() const {
        std::vector<std::string> names;
        for (const auto& [name, idx] : taps_) names.push_back(name);
        std::sort(names.begin(), names.end());
        return names;
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        for (auto& l : layers_) {
            for (Param<T>* p : l->params()) out.push_back(p);
        }
        return out;
    }

    // Forward through the chain; returns the final logits (N x C).
    Tensor<T> forward(const Tensor<T>& x) {
        check_input(x);
        Tensor<T> cur = x;
        for (auto& l : layers_) cur = l->forward(cur);
        logits_ = cur;
        compute_probs();
        return logits_;
    }

    // Forward plus mean softmax cross-entropy; caches for backward().
    T forward_loss(const Tensor<T>& x, const std::vector<int>& labels) {
        if (labels.size() != static_cast<size_t>(x.shape[0])) {
            throw ShapeMismatchError("label count does not match batch size");
        }
        forward(x);
        labels_ = labels;
        const int n = logits_.shape[0], c = logits_.shape[1];
        T loss{};
        for (int i = 0; i < n; ++i) {
            if (labels[i] < 0 || labels[i] >= c) {
                throw ShapeMismatchError("label " + std::to_string(labels[i]) +
                                         " outside [0, " + std::to_string(c) + ")");
            }
            const T* row = &logits_.data[static_cast<size_t>(i) * c];
            T mx = row[0];
            for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
            T lse{};
            for (int j = 0; j < c; ++j) lse += std::exp(row[j] - mx);
            loss += std::log(lse) + mx - row[labels[i]];
        }
        return loss / static_cast<T>(n);
    }

    // Softmax probabilities from the last forward, N x C.
    const Tensor<T>& probs() const {
        if (probs_.data.empty()) throw NoCachedForwardError("probs before forward");
        return probs_;
    }

    // Backprop from the cached loss; fills every param's grad.
    void backward() {
        if (labels_.empty()) throw NoCachedForwardError("backward before forward_loss");
        const int n = logits_.shape[0], c = logits_.shape[1];
        Tensor<T> dlogits({n, c});
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < c; ++j) {
                T g = probs_.data[static_cast<size_t>(i) * c + j];
                if (j == labels_[i]) g -= static_cast<T>(1);
                dlogits.data[static_cast<size_t>(i) * c + j] = g / static_cast<T>(n);
            }
        }
        Tensor<T> cur = std::move(dlogits);
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
            cur = (*it)->backward(cur);
        }
    }

    // Forward up to (and including) the tapped layer; UnknownLayerError otherwise.
    Tensor<T> forward_to_tap(const Tensor<T>& x, const std::string& tap) {
        const auto it = taps_.find(tap);
        if (it == taps_.end()) {
            throw UnknownLayerError("unknown feature tap: " + tap);
        }
        check_input(x);
        Tensor<T> cur = x;
        for (size_t i = 0; i <= it->second; ++i) cur = layers_[i]->forward(cur);
        return cur;
    }

    std::vector<NamedArray> to_arrays() {
        std::vector<NamedArray> out;
        for (Param<T>* p : params()) {
            NamedArray a;
            a.name = p->name;
            for (int d : p->value.shape) a.shape.push_back(static_cast<std::uint32_t>(d));
            a.data.assign(p->value.data.begin(), p->value.data.end());
            out.push_back(std::move(a));
        }
        return out;
    }

    void from_arrays(const std::vector<NamedArray>& arrays) {
        auto ps = params();
        if (arrays.size() != ps.size()) {
            throw ShapeMismatchError("model has " + std::to_string(arrays.size()) +
                                     " arrays, net expects " + std::to_string(ps.size()));
        }
        for (size_t i = 0; i < ps.size(); ++i) {
            const NamedArray& a = arrays[i];
            Param<T>* p = ps[i];
            if (a.name != p->name || a.data.size() != p->value.data.size()) {
                throw ShapeMismatchError("array " + a.name + " does not match param " + p->name);
            }
            std::copy(a.data.begin(), a.data.end(), p->value.data.begin());
        }
    }

  private:
    void check_input(const Tensor<T>& x) const {
        if (x.shape.size() != 4 || x.shape[1] != spec_.in_channels || x.shape[2] != spec_.in_h ||
            x.shape[3] != spec_.in_w) {
            throw ShapeMismatchError("input " + x.shape_str() + " does not match net input (" +
                                     std::to_string(spec_.in_channels) + "," +
                                     std::to_string(spec_.in_h) + "," +
                                     std::to_string(spec_.in_w) + ")");
        }
    }

    void compute_probs() {
        const int n = logits_.shape[0], c = logits_.shape[1];
        probs_ = Tensor<T>({n, c});
        for (int i = 0; i < n; ++i) {
            const T* row = &logits_.data[static_cast<size_t>(i) * c];
            T* prow = &probs_.data[static_cast<size_t>(i) * c];
            T mx = row[0];
            for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
            T sum{};
            for (int j = 0; j < c; ++j) {
                prow[j] = std::exp(row[j] - mx);
                sum += prow[j];
            }
            for (int j = 0; j < c; ++j) prow[j] /= sum;
        }
    }

    void build(std::uint64_t seed) {
        layers_.clear();
        taps_.clear();
        const CounterRng root(seed);
        int conv_n = 0, fc_n = 0, relu_n = 0, pool_n = 0, lrn_n = 0;
        int c = spec_.in_channels, h = spec_.in_h, w = spec_.in_w;
        bool flat = false;
        for (const LayerSpec& ls : spec_.layers) {
            switch (ls.kind) {
                case LayerSpec::Kind::conv: {
                    const std::string name = "conv" + std::to_string(++conv_n);
                    auto layer = std::make_unique<detail::ConvLayer<T>>(name, c, ls.channels,
                                                                        ls.size, ls.stride,
                                                                        ls.pad);
                    init_gaussian(layer->params()[0]->value, root.derive(name + ".w"),
                                  static_cast<double>(c) * ls.size * ls.size);
                    h = detail::ConvLayer<T>::out_extent(h, ls.size, ls.stride, ls.pad);
                    w = detail::ConvLayer<T>::out_extent(w, ls.size, ls.stride, ls.pad);
                    c = ls.channels;
                    add(std::move(layer), ls.tap);
                    break;
                }
                case LayerSpec::Kind::relu:
                    add(std::make_unique<detail::ReluLayer<T>>("relu" + std::to_string(++relu_n)),
                        ls.tap);
                    break;
                case LayerSpec::Kind::maxpool: {
                    add(std::make_unique<detail::MaxPoolLayer<T>>(
                            "pool" + std::to_string(++pool_n), ls.size, ls.stride),
                        ls.tap);
                    h = (h - ls.size) / ls.stride + 1;
                    w = (w - ls.size) / ls.stride + 1;
                    break;
                }
                case LayerSpec::Kind::lrn:
                    add(std::make_unique<detail::LrnLayer<T>>("lrn" + std::to_string(++lrn_n),
                                                              ls.size, ls.alpha, ls.beta),
                        ls.tap);
                    break;
                case LayerSpec::Kind::fc: {
                    const int in_dim = flat ? c : c * h * w;
                    const std::string name = "fc" + std::to_string(++fc_n);
                    auto layer = std::make_unique<detail::FcLayer<T>>(name, in_dim, ls.channels);
                    init_gaussian(layer->params()[0]->value, root.derive(name + ".w"),
                                  static_cast<double>(in_dim));
                    add(std::move(layer), ls.tap);
                    c = ls.channels;
                    flat = true;
                    break;
                }
                case LayerSpec::Kind::softmax_loss:
                    num_classes_ = c;
                    break;
            }
        }
    }

    static void init_gaussian(Tensor<T>& t, CounterRng rng, double fan_in) {
        const double std = std::sqrt(2.0 / fan_in);
        for (auto& v : t.data) v = static_cast<T>(rng.normal() * std);
    }

    void add(std::unique_ptr<Layer<T>> layer, const std::string& tap) {
        layers_.push_back(std::move(layer));
        if (!tap.empty()) taps_[tap] = layers_.size() - 1;
    }

    NetSpec spec_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::map<std::string, size_t> taps_;
    int num_classes_ = 0;
    Tensor<T> logits_;
    Tensor<T> probs_;
    std::vector<int> labels_;
};

struct FeatureVector {
    std::vector<float> values;
    std::string layer_name;
    size_t dim() const { return values.size(); }
};

enum class Preproc { raw, minmax };

Preproc preproc_from_string(const std::string& s);

// Image to net input tensor: optional min-max normalization, full-frame
// bilinear rescale to the net input resolution, grays scaled by 1/255.
Tensor<float> image_to_input(const DepthImage& img, const NetSpec& spec, Preproc pre);

// Flattened activation of a named tap.
FeatureVector extract_features(Net<float>& net, const DepthImage& img,
                               const std::string& layer_name, Preproc pre);

}  // namespace depthforge
