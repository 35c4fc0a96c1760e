#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depthforge/augment.hpp"
#include "depthforge/trainer.hpp"

namespace depthforge {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(what + " (field: " + field + ")"), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

// Ordered key=value document with [section] headers. Comments (#) and blank
// lines are allowed in files and dropped on parse; parse(serialize(doc))
// reproduces doc exactly.
struct ConfigDoc {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections;

    const std::string* find(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
};

ConfigDoc parse_config(const std::string& text);
ConfigDoc load_config(const std::filesystem::path& path);
std::string serialize_config(const ConfigDoc& doc);

// Everything the pipeline drivers need. The seed is mandatory and global;
// every stage derives its own stream from it.
struct PipelineConfig {
    std::filesystem::path models_dir = "models";
    std::filesystem::path output_dir = "out";
    int resolution = 128;
    int count = 480;
    int dedup_threshold = 4;
    AugmentPolicy augment;
    std::string net_spec = "mini_depth_net";
    TrainConfig train;  // train.seed mirrors the global seed
    std::string protocol = "leave_instance_out";
    int subsample_stride = 5;
    std::string fixed_list;
    int cv_folds = 3;
    std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> p_grid = {1.25, 1.5, 2.0};
    std::string layer = "pool_last";
    std::string preproc = "raw";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

// Builds the typed config from a parsed document. Unknown keys and malformed
// values raise ConfigError naming the offending section.key; a missing
// pipeline.seed is an error (reproducibility must be explicit).
PipelineConfig pipeline_config_from_doc(const ConfigDoc& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
ConfigDoc pipeline_config_to_doc(const PipelineConfig& cfg);

}  // namespace depthforge
