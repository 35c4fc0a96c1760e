#include "depthforge/sampler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace depthforge {

RenderPlan sample_configs(const std::string& model_id, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");
    RenderPlan plan;
    plan.model_id = model_id;
    plan.seed = seed;
    plan.configs.reserve(static_cast<size_t>(count));
    CounterRng model_rng = CounterRng(seed).derive(model_id);
    for (int i = 0; i < count; ++i) {
        CounterRng rng = model_rng.derive(static_cast<std::uint64_t>(i));
        CameraConfig cfg;
        cfg.distance = rng.uniform(1.8, 3.5);
        cfg.fov_deg = rng.uniform(30.0, 60.0);
        const double z = rng.uniform(-1.0, 1.0);
        const double az = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        cfg.sphere_dir = normalized(Vec3{r * std::cos(az), r * std::sin(az), z});
        for (auto& s : cfg.morph.axis_scales) s = rng.uniform(0.92, 1.08);
        plan.configs.push_back(cfg);
    }
    return plan;
}

Hash64 perceptual_hash(const DepthImage& img) {
    constexpr int kCols = 9, kRows = 8;
    if (img.width < kCols || img.height < kRows) {
        throw ImageTooSmallError("perceptual hash needs at least 9x8 pixels, got " +
                                 std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    // Box average over the cell [floor(c*W/9), floor((c+1)*W/9)) x same for rows.
    double cell[kRows][kCols];
    for (int r = 0; r < kRows; ++r) {
        const int y0 = r * img.height / kRows;
        const int y1 = (r + 1) * img.height / kRows;
        for (int c = 0; c < kCols; ++c) {
            const int x0 = c * img.width / kCols;
            const int x1 = (c + 1) * img.width / kCols;
            double sum = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) sum += img.at(x, y);
            }
            cell[r][c] = sum / (static_cast<double>(y1 - y0) * (x1 - x0));
        }
    }
    Hash64 h;
    int bit = 0;
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c + 1 < kCols; ++c, ++bit) {
            if (cell[r][c] < cell[r][c + 1]) h.bits |= std::uint64_t{1} << bit;
        }
    }
    return h;
}

DedupResult dedup(const std::vector<Hash64>& hashes, int threshold) {
    if (threshold < 0) throw std::invalid_argument("dedup threshold must be >= 0");
    DedupResult out;
    std::vector<Hash64> kept_hashes;
    for (size_t i = 0; i < hashes.size(); ++i) {
        bool dup = false;
        for (const Hash64& k : kept_hashes) {
            if (hamming(hashes[i], k) <= threshold) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            out.kept.push_back(i);
            kept_hashes.push_back(hashes[i]);
        }
    }
    out.near_duplicate_fraction =
        hashes.empty() ? 0.0
                       : static_cast<double>(hashes.size() - out.kept.size()) / hashes.size();
    return out;
}

std::string dedup_report_csv(const std::vector<DedupReportRow>& rows) {
    std::ostringstream out;
    out << "model_id,total,kept,near_duplicate_fraction\n";
    for (const auto& r : rows) {
        out << r.model_id << ',' << r.total << ',' << r.kept << ',';
        char frac[32];
        std::snprintf(frac, sizeof(frac), "%.6f", r.near_duplicate_fraction);
        out << frac << '\n';
    }
    return out.str();
}

}  // namespace depthforge
