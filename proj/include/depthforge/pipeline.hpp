#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depthforge/config.hpp"
#include "depthforge/eval.hpp"

namespace depthforge {

// One CAD model discovered under models_dir. Nested layout
// <models_dir>/<class>/<name>.obj gives the class label; flat .obj files are
// their own class.
struct ModelEntry {
    std::string class_label;
    std::string model_id;
    std::filesystem::path path;
};

std::vector<ModelEntry> discover_models(const std::filesystem::path& models_dir);

struct GenStats {
    size_t models = 0;
    size_t rendered = 0;
    size_t kept = 0;
    double near_duplicate_fraction = 0.0;
};

// Renders the sampled config space for every model, drops near-duplicates,
// and writes renders/<class>/<model>/<frame>_depth.png plus manifest.jsonl
// and dedup_report.csv under output_dir. Byte-identical on rerun.
GenStats run_gen(const PipelineConfig& cfg);

// Same sampling and hashing as gen but nothing is rendered to disk; returns
// the CSV and writes dedup_report.csv.
std::string run_dedup_report(const PipelineConfig& cfg, int threshold);

struct TrainOutput {
    TrainCurve curve;
    std::vector<std::string> class_names;
};

// Trains the net on the training half of the split; writes weights.bin,
// train_curve.csv and classes.txt.
TrainOutput run_train(const PipelineConfig& cfg);

// Features for every manifest row in manifest order; writes
// features_<layer>_<preproc>.bin holding "features" [n,d] and "labels" [n].
void run_extract(const PipelineConfig& cfg, const std::string& layer, const std::string& preproc);

// Single-cell evaluation (config layer and preproc): SVM on extracted
// features, C chosen by CV on train only. Writes eval_report.csv/.json and
// per_class.png.
AblationCell run_eval(const PipelineConfig& cfg);

// Full layer x preprocessing grid. Writes ablation_report.csv/.json.
AblationGrid run_ablate(const PipelineConfig& cfg);

// Two-modality fusion: the config layer's features under raw and minmax
// preprocessing, single-modality SVMs vs the p-norm MKL fusion. Pass
// p_override/c_override > 0 to pin the hyperparameters instead of CV.
// Writes fusion_report.csv/.json.
FusionResult run_fuse(const PipelineConfig& cfg, double p_override = 0.0,
                      double c_override = 0.0);

struct DemoResult {
    GenStats gen;
    double final_train_accuracy = 0.0;
    double svm_c = 1.0;
    double test_accuracy = 0.0;
    size_t train_samples = 0;
    size_t test_samples = 0;
};

// The end-to-end toy benchmark: writes 5 primitive classes x 8 morphed
// instances as OBJ files, renders 60 configs each, trains MiniDepthNet with
// the step schedule, fits a linear SVM on pool_last features and evaluates on
// the held-out instances. Everything lands under out_dir, headline numbers in
// final_report.csv.
DemoResult run_demo(const std::filesystem::path& out_dir, std::uint64_t seed);

// The config the demo runs with, exposed so tests can rerun pieces of it.
PipelineConfig demo_config(const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace depthforge
