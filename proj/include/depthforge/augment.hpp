#pragma once

#include <array>
#include <stdexcept>

#include "depthforge/image.hpp"
#include "depthforge/rng.hpp"

namespace depthforge {

class RectOutOfBoundsError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class ParamOutOfRangeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class NoObjectPixelsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

// Training-time augmentation knobs. Probabilities gate each stage; the final
// crop-and-rescale to input_size always runs.
struct AugmentPolicy {
    double crop_min_frac = 0.85;
    double occlude_prob = 0.0;
    double background_prob = 0.0;
    double noise_prob = 0.0;
    double shear_prob = 0.0;
    double zshift_prob = 0.0;
    int noise_amplitude = 10;
    double shear_max = 0.15;
    std::array<double, 2> z_alpha_range{0.8, 1.2};
    std::array<double, 2> z_beta_range{-20.0, 20.0};
    int input_size = 64;  // network input resolution (square)
};

// Throws ParamOutOfRangeError on probabilities outside [0,1],
// crop_min_frac outside (0,1], negative amplitudes, or inverted ranges.
void validate_policy(const AugmentPolicy& policy);

// Crops rect out of img and rescales to out_w x out_h with bilinear
// interpolation. Same-size full-image rect reproduces the input exactly.
DepthImage crop(const DepthImage& img, Rect rect, int out_w, int out_h);

// Fills an axis-aligned rectangle of area exactly floor(W*H/4) with the
// background value (aspect ratio drawn in [0.5,2], placement uniform).
DepthImage occlude(const DepthImage& img, CounterRng& rng);

// Object pixels (gray < 255) -> clamp(round(alpha*(g-128)+128+beta), 0, 254);
// background pixels stay 255.
DepthImage zscale_shift(const DepthImage& img, double alpha, double beta,
                        const AugmentPolicy& policy);

// Replaces every background pixel with one value drawn uniformly from the
// integers strictly greater than the mean object gray, up to 254.
DepthImage substitute_background(const DepthImage& img, CounterRng& rng);

// Adds independent integer uniform noise in [-amplitude, amplitude] to every
// pixel, clamped to [0,255].
DepthImage add_grain(const DepthImage& img, int amplitude, CounterRng& rng);

// Horizontal shear x' = x + factor*(y - H/2), bilinear, out-of-source fill 255.
DepthImage shear(const DepthImage& img, double factor, const AugmentPolicy& policy);

// Fixed stage order: background substitution, zscale_shift, shear, occlude,
// grain, crop. Each stage draws its gate and parameters from its own derived
// substream, so toggling one probability never shifts another stage's draws.
DepthImage augment_pipeline(const DepthImage& img, const AugmentPolicy& policy, CounterRng& rng);

}  // namespace depthforge
