#include "depthforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace depthforge {

namespace {

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ParamOutOfRangeError(std::string(name) + " must be in [0,1], got " +
                                   std::to_string(p));
    }
}

std::uint8_t clamp_gray(double v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

// Bilinear sample at (fx, fy); outside coordinates either clamp to the edge
// or read as `fill`.
double sample_bilinear(const DepthImage& img, double fx, double fy, bool clamp_edges,
                       double fill = 255.0) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double ax = fx - x0;
    const double ay = fy - y0;
    auto fetch = [&](int x, int y) -> double {
        if (clamp_edges) {
            x = std::clamp(x, 0, img.width - 1);
            y = std::clamp(y, 0, img.height - 1);
            return img.at(x, y);
        }
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) return fill;
        return img.at(x, y);
    };
    const double top = fetch(x0, y0) * (1.0 - ax) + fetch(x0 + 1, y0) * ax;
    const double bot = fetch(x0, y0 + 1) * (1.0 - ax) + fetch(x0 + 1, y0 + 1) * ax;
    return top * (1.0 - ay) + bot * ay;
}

}  // namespace

void validate_policy(const AugmentPolicy& p) {
    check_prob(p.occlude_prob, "occlude_prob");
    check_prob(p.background_prob, "background_prob");
    check_prob(p.noise_prob, "noise_prob");
    check_prob(p.shear_prob, "shear_prob");
    check_prob(p.zshift_prob, "zshift_prob");
    if (!(p.crop_min_frac > 0.0 && p.crop_min_frac <= 1.0)) {
        throw ParamOutOfRangeError("crop_min_frac must be in (0,1], got " +
                                   std::to_string(p.crop_min_frac));
    }
    if (p.noise_amplitude < 0) throw ParamOutOfRangeError("noise_amplitude must be >= 0");
    if (!(p.shear_max >= 0.0)) throw ParamOutOfRangeError("shear_max must be >= 0");
    if (p.z_alpha_range[0] > p.z_alpha_range[1] || p.z_beta_range[0] > p.z_beta_range[1]) {
        throw ParamOutOfRangeError("z ranges must be ordered lo <= hi");
    }
    if (p.input_size < 1) throw ParamOutOfRangeError("input_size must be >= 1");
}

DepthImage crop(const DepthImage& img, Rect rect, int out_w, int out_h) {
    if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 || rect.x + rect.w > img.width ||
        rect.y + rect.h > img.height) {
        throw RectOutOfBoundsError("crop rect " + std::to_string(rect.w) + "x" +
                                   std::to_string(rect.h) + "+" + std::to_string(rect.x) + "+" +
                                   std::to_string(rect.y) + " outside " +
                                   std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    if (out_w < 1 || out_h < 1) throw ParamOutOfRangeError("crop output size must be positive");
    DepthImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const double sy = rect.y + (y + 0.5) * rect.h / out_h - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double sx = rect.x + (x + 0.5) * rect.w / out_w - 0.5;
            out.at(x, y) = clamp_gray(std::round(sample_bilinear(img, sx, sy, true)));
        }
    }
    return out;
}

DepthImage occlude(const DepthImage& img, CounterRng& rng) {
    const std::int64_t area =
        static_cast<std::int64_t>(img.width) * img.height / 4;
    if (area < 1) throw ParamOutOfRangeError("occlude needs an image of at least 4 pixels");

    // Rectangles with exact area: enumerate divisor pairs that fit, then take
    // the one whose aspect is closest (in log space) to the sampled target.
    const double target_aspect = rng.uniform(0.5, 2.0);
    std::int64_t best_w = 0, best_h = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::int64_t w = 1; w * w <= area; ++w) {
        if (area % w != 0) continue;
        const std::int64_t h = area / w;
        for (const auto& [rw, rh] : {std::pair{w, h}, std::pair{h, w}}) {
            if (rw > img.width || rh > img.height) continue;
            const double err = std::abs(std::log(static_cast<double>(rw) / rh) -
                                        std::log(target_aspect));
            if (err < best_err) {
                best_err = err;
                best_w = rw;
                best_h = rh;
            }
        }
    }
    if (best_w == 0) {
        // No exact-area rectangle fits (possible only for degenerate strip
        // images); take the largest full-width block not exceeding the area.
        best_w = std::min<std::int64_t>(img.width, area);
        best_h = std::min<std::int64_t>(img.height, std::max<std::int64_t>(1, area / best_w));
    }
    const int x0 = static_cast<int>(rng.uniform_int(0, img.width - static_cast<int>(best_w)));
    const int y0 = static_cast<int>(rng.uniform_int(0, img.height - static_cast<int>(best_h)));
    DepthImage out = img;
    for (int y = y0; y < y0 + best_h; ++y) {
        for (int x = x0; x < x0 + best_w; ++x) out.at(x, y) = kBackgroundGray;
    }
    return out;
}

DepthImage zscale_shift(const DepthImage& img, double alpha, double beta,
                        const AugmentPolicy& policy) {
    if (alpha < policy.z_alpha_range[0] || alpha > policy.z_alpha_range[1]) {
        throw ParamOutOfRangeError("zscale alpha " + std::to_string(alpha) + " outside policy range");
    }
    if (beta < policy.z_beta_range[0] || beta > policy.z_beta_range[1]) {
        throw ParamOutOfRangeError("zshift beta " + std::to_string(beta) + " outside policy range");
    }
    DepthImage out = img;
    for (auto& g : out.gray) {
        if (g == kBackgroundGray) continue;
        const double v = std::round(alpha * (g - 128.0) + 128.0 + beta);
        g = static_cast<std::uint8_t>(std::clamp(v, 0.0, 254.0));
    }
    return out;
}

DepthImage substitute_background(const DepthImage& img, CounterRng& rng) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::uint8_t g : img.gray) {
        if (g != kBackgroundGray) {
            sum += g;
            ++count;
        }
    }
    if (count == 0) throw NoObjectPixelsError("background substitution needs an object pixel");
    const double mean = sum / count;
    const int lo = static_cast<int>(std::floor(mean)) + 1;
    if (lo > 254) return img;  // object already at the far limit, nothing farther exists
    const std::uint8_t value = static_cast<std::uint8_t>(rng.uniform_int(lo, 254));
    DepthImage out = img;
    for (auto& g : out.gray) {
        if (g == kBackgroundGray) g = value;
    }
    return out;
}

DepthImage add_grain(const DepthImage& img, int amplitude, CounterRng& rng) {
    if (amplitude < 0) throw ParamOutOfRangeError("grain amplitude must be >= 0");
    DepthImage out = img;
    for (auto& g : out.gray) {
        const int noise = static_cast<int>(rng.uniform_int(-amplitude, amplitude));
        g = static_cast<std::uint8_t>(std::clamp(g + noise, 0, 255));
    }
    return out;
}

DepthImage shear(const DepthImage& img, double factor, const AugmentPolicy& policy) {
    if (std::abs(factor) > policy.shear_max) {
        throw ParamOutOfRangeError("shear factor " + std::to_string(factor) +
                                   " exceeds shear_max " + std::to_string(policy.shear_max));
    }
    DepthImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double offset = factor * ((y + 0.5) - img.height / 2.0);
        for (int x = 0; x < img.width; ++x) {
            const double sx = x - offset;
            out.at(x, y) = clamp_gray(std::round(sample_bilinear(img, sx, y, false)));
        }
    }
    return out;
}

DepthImage augment_pipeline(const DepthImage& img, const AugmentPolicy& policy, CounterRng& rng) {
    validate_policy(policy);
    DepthImage cur = img;

    if (CounterRng sub = rng.derive("background"); sub.next_double() < policy.background_prob) {
        cur = substitute_background(cur, sub);
    }
    if (CounterRng sub = rng.derive("zscale"); sub.next_double() < policy.zshift_prob) {
        const double alpha = sub.uniform(policy.z_alpha_range[0], policy.z_alpha_range[1]);
        const double beta = sub.uniform(policy.z_beta_range[0], policy.z_beta_range[1]);
        cur = zscale_shift(cur, alpha, beta, policy);
    }
    if (CounterRng sub = rng.derive("shear"); sub.next_double() < policy.shear_prob) {
        cur = shear(cur, sub.uniform(-policy.shear_max, policy.shear_max), policy);
    }
    if (CounterRng sub = rng.derive("occlude"); sub.next_double() < policy.occlude_prob) {
        cur = occlude(cur, sub);
    }
    if (CounterRng sub = rng.derive("grain"); sub.next_double() < policy.noise_prob) {
        cur = add_grain(cur, policy.noise_amplitude, sub);
    }

    CounterRng sub = rng.derive("crop");
    const int base = std::min(cur.width, cur.height);
    const double frac = sub.uniform(policy.crop_min_frac, 1.0);
    const int side = std::clamp(static_cast<int>(std::ceil(frac * base)), 1, base);
    Rect rect;
    rect.w = side;
    rect.h = side;
    rect.x = static_cast<int>(sub.uniform_int(0, cur.width - side));
    rect.y = static_cast<int>(sub.uniform_int(0, cur.height - side));
    return crop(cur, rect, policy.input_size, policy.input_size);
}

}  // namespace depthforge
