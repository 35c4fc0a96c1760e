#include "depthforge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

#include "depthforge/rng.hpp"

namespace depthforge {

using nlohmann::json;

bool operator==(const SampleRecord& a, const SampleRecord& b) {
    auto cfg_eq = [](const std::optional<CameraConfig>& x, const std::optional<CameraConfig>& y) {
        if (x.has_value() != y.has_value()) return false;
        if (!x) return true;
        return x->distance == y->distance && x->fov_deg == y->fov_deg &&
               x->sphere_dir.x == y->sphere_dir.x && x->sphere_dir.y == y->sphere_dir.y &&
               x->sphere_dir.z == y->sphere_dir.z &&
               x->morph.axis_scales == y->morph.axis_scales;
    };
    return a.path == b.path && a.class_label == b.class_label && a.model_id == b.model_id &&
           a.frame_index == b.frame_index && a.modality == b.modality && cfg_eq(a.config, b.config);
}

void validate_record(const SampleRecord& rec) {
    if (rec.class_label.empty()) throw ValidationError("record has empty class_label");
    if (rec.path.empty()) throw ValidationError("record has empty path");
    if (rec.modality != "depth" && rec.modality != "rgb") {
        throw ValidationError("unknown modality: " + rec.modality);
    }
}

namespace {

json record_to_json(const SampleRecord& rec) {
    json j;
    j["path"] = rec.path;
    j["class_label"] = rec.class_label;
    j["model_id"] = rec.model_id;
    j["frame_index"] = rec.frame_index;
    j["modality"] = rec.modality;
    if (rec.config) {
        const CameraConfig& c = *rec.config;
        j["config"] = {{"distance", c.distance},
                       {"fov_deg", c.fov_deg},
                       {"sphere_dir", {c.sphere_dir.x, c.sphere_dir.y, c.sphere_dir.z}},
                       {"morph", c.morph.axis_scales}};
    }
    return j;
}

SampleRecord record_from_json(const json& j) {
    SampleRecord rec;
    rec.path = j.at("path").get<std::string>();
    rec.class_label = j.at("class_label").get<std::string>();
    rec.model_id = j.at("model_id").get<std::string>();
    rec.frame_index = j.at("frame_index").get<int>();
    rec.modality = j.at("modality").get<std::string>();
    if (j.contains("config")) {
        const json& c = j.at("config");
        CameraConfig cfg;
        cfg.distance = c.at("distance").get<double>();
        cfg.fov_deg = c.at("fov_deg").get<double>();
        const auto dir = c.at("sphere_dir");
        cfg.sphere_dir = {dir.at(0).get<double>(), dir.at(1).get<double>(),
                          dir.at(2).get<double>()};
        const auto morph = c.at("morph");
        for (int i = 0; i < 3; ++i) cfg.morph.axis_scales[i] = morph.at(i).get<double>();
        rec.config = cfg;
    }
    return rec;
}

}  // namespace

ManifestWriter::ManifestWriter(const std::filesystem::path& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc), path_(path) {
    if (!out_) throw IoError("cannot open manifest for writing: " + path.string());
}

void ManifestWriter::append(const SampleRecord& rec) {
    validate_record(rec);
    out_ << record_to_json(rec).dump() << '\n';
    if (!out_) throw IoError("manifest write failed: " + path_.string());
}

void ManifestWriter::flush() {
    out_.flush();
}

std::vector<SampleRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    std::vector<SampleRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(json::parse(line)));
            validate_record(records.back());
        } catch (const ManifestParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ManifestParseError(lineno, e.what());
        }
    }
    return records;
}

DepthImage minmax_normalize(const DepthImage& img) {
    if (img.gray.empty()) throw ValidationError("cannot normalize an empty image");
    const auto [lo_it, hi_it] = std::minmax_element(img.gray.begin(), img.gray.end());
    const int lo = *lo_it, hi = *hi_it;
    DepthImage out(img.width, img.height);
    if (hi == lo) {
        std::fill(out.gray.begin(), out.gray.end(), std::uint8_t{0});
        return out;
    }
    for (size_t i = 0; i < img.gray.size(); ++i) {
        const double v = (img.gray[i] - lo) * 255.0 / (hi - lo);
        out.gray[i] = static_cast<std::uint8_t>(std::floor(v + 0.5));
    }
    return out;
}

namespace {

Split split_leave_instance_out(const std::vector<SampleRecord>& manifest, const SplitSpec& spec) {
    std::map<std::string, std::set<std::string>> instances;
    for (const auto& rec : manifest) instances[rec.class_label].insert(rec.model_id);

    std::map<std::string, std::string> held_out;
    for (const auto& [cls, ids] : instances) {
        const auto pinned = spec.test_instances.find(cls);
        if (pinned != spec.test_instances.end()) {
            if (!ids.contains(pinned->second)) {
                throw ValidationError("pinned test instance " + pinned->second +
                                      " not present in class " + cls);
            }
            held_out[cls] = pinned->second;
            continue;
        }
        if (ids.size() < 2) {
            throw SingleInstanceClassError("class " + cls +
                                           " has a single instance, cannot hold one out");
        }
        std::vector<std::string> sorted(ids.begin(), ids.end());
        CounterRng rng = CounterRng(spec.seed).derive(cls);
        held_out[cls] = sorted[rng.next_below(sorted.size())];
    }

    Split split;
    for (const auto& rec : manifest) {
        if (held_out.at(rec.class_label) == rec.model_id) {
            split.test.push_back(rec);
        } else {
            split.train.push_back(rec);
        }
    }
    return split;
}

Split split_frame_subsample(const std::vector<SampleRecord>& manifest, const SplitSpec& spec) {
    if (spec.subsample_stride < 1) throw ValidationError("subsample_stride must be >= 1");
    Split split;
    for (const auto& rec : manifest) {
        if (rec.frame_index % spec.subsample_stride == 0) {
            split.test.push_back(rec);
        } else {
            split.train.push_back(rec);
        }
    }
    return split;
}

Split split_fixed_list(const std::vector<SampleRecord>& manifest, const SplitSpec& spec) {
    std::ifstream in(spec.fixed_list_path);
    if (!in) throw IoError("cannot open split list: " + spec.fixed_list_path.string());
    std::set<std::pair<std::string, std::string>> test_pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("split list line lacks a comma: " + line);
        }
        test_pairs.emplace(line.substr(0, comma), line.substr(comma + 1));
    }
    Split split;
    for (const auto& rec : manifest) {
        if (test_pairs.contains({rec.class_label, rec.model_id})) {
            split.test.push_back(rec);
        } else {
            split.train.push_back(rec);
        }
    }
    return split;
}

}  // namespace

Split make_splits(const std::vector<SampleRecord>& manifest, const SplitSpec& spec) {
    switch (spec.protocol) {
        case SplitProtocol::leave_instance_out:
            return split_leave_instance_out(manifest, spec);
        case SplitProtocol::frame_subsample:
            return split_frame_subsample(manifest, spec);
        case SplitProtocol::fixed_list:
            return split_fixed_list(manifest, spec);
    }
    throw ValidationError("unknown split protocol");
}

std::vector<SampleRecord> ingest_directory(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        throw IoError("ingest root is not a directory: " + root.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<SampleRecord> records;
    for (const auto& path : files) {
        const std::string name = path.filename().string();
        std::string modality;
        std::string stem;
        if (name.ends_with("_depth.png")) {
            modality = "depth";
            stem = name.substr(0, name.size() - 10);
        } else if (name.ends_with("_rgb.png")) {
            modality = "rgb";
            stem = name.substr(0, name.size() - 8);
        } else {
            continue;
        }
        const auto rel = std::filesystem::relative(path, root);
        std::vector<std::string> parts;
        for (const auto& p : rel) parts.push_back(p.string());
        if (parts.size() != 3) continue;  // expect <class>/<instance>/<file>

        int frame = 0;
        const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), frame);
        if (ec != std::errc{} || ptr != stem.data() + stem.size()) {
            throw ValidationError("cannot parse frame index from " + name);
        }
        SampleRecord rec;
        rec.path = path.string();
        rec.class_label = parts[0];
        rec.model_id = parts[1];
        rec.frame_index = frame;
        rec.modality = modality;
        records.push_back(rec);
    }
    return records;
}

}  // namespace depthforge
