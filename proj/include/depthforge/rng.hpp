#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace depthforge {

// SplitMix64 finalizer. Bijective on 64-bit words.
inline uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// FNV-1a, used to fold stream names into RNG keys.
inline uint64_t hash64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Counter-based RNG: draw i of a stream is mix64(key + i*gamma), a pure
// function of (key, i). Derived streams are keyed independently, so the
// draw count of one stream never shifts another. This is what makes
// per-sample / per-model seeding stable under any thread count.
class CounterRng {
public:
    CounterRng() : key_(0) {}
    explicit CounterRng(uint64_t seed) : key_(mix64(seed ^ 0x6A09E667F3BCC908ull)) {}

    CounterRng derive(uint64_t stream) const {
        CounterRng r;
        r.key_ = mix64(key_ ^ mix64(stream + 0x9E3779B97F4A7C15ull));
        return r;
    }
    CounterRng derive(std::string_view name) const { return derive(hash64(name)); }

    uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ull;
        return mix64(key_ + counter_);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Unbiased integer in [0, n), Lemire's multiply-shift with rejection.
    uint64_t next_below(uint64_t n) {
        if (n <= 1) return 0;
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // Integer uniform on [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Standard normal via Box-Muller; consumes two draws per call.
    double normal() {
        double u1 = next_double();
        const double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace depthforge
