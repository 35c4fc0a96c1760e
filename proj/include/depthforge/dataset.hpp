#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthforge/camera.hpp"
#include "depthforge/image.hpp"

namespace depthforge {

class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class ManifestParseError : public std::runtime_error {
  public:
    ManifestParseError(size_t line, const std::string& what)
        : std::runtime_error("manifest line " + std::to_string(line) + ": " + what),
          line_(line) {}
    size_t line() const { return line_; }

  private:
    size_t line_;
};

class SingleInstanceClassError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SampleRecord {
    std::string path;
    std::string class_label;
    std::string model_id;
    int frame_index = 0;
    std::string modality = "depth";  // "depth" or "rgb"
    std::optional<CameraConfig> config;
};

bool operator==(const SampleRecord& a, const SampleRecord& b);

// Validates one record (non-empty class, known modality); ValidationError otherwise.
void validate_record(const SampleRecord& rec);

// Append-order JSON-lines manifest writer.
class ManifestWriter {
  public:
    explicit ManifestWriter(const std::filesystem::path& path, bool append = false);
    void append(const SampleRecord& rec);
    void flush();

  private:
    std::ofstream out_;
    std::filesystem::path path_;
};

std::vector<SampleRecord> load_manifest(const std::filesystem::path& path);

// Linear map of [min, max] gray to [0, 255], rounding half up; a constant
// image maps to all 0. Idempotent.
DepthImage minmax_normalize(const DepthImage& img);

enum class SplitProtocol { leave_instance_out, frame_subsample, fixed_list };

struct SplitSpec {
    SplitProtocol protocol = SplitProtocol::leave_instance_out;
    // Pinned held-out instance per class; classes not listed get one chosen by seed.
    std::map<std::string, std::string> test_instances;
    int subsample_stride = 5;
    std::uint64_t seed = 0;
    std::filesystem::path fixed_list_path;  // fixed_list protocol: "class,model_id" per line
};

struct Split {
    std::vector<SampleRecord> train;
    std::vector<SampleRecord> test;
};

// leave_instance_out: one model per class to test (SingleInstanceClassError if
// a class has fewer than two). frame_subsample: frame_index % stride == 0 to
// test. fixed_list: pairs listed in the file to test.
Split make_splits(const std::vector<SampleRecord>& manifest, const SplitSpec& spec);

// Scans root for <class>/<instance>/<frame>_depth.png (or _rgb.png) files and
// builds records in sorted path order. frame_index is the integer stem prefix.
std::vector<SampleRecord> ingest_directory(const std::filesystem::path& root);

}  // namespace depthforge
