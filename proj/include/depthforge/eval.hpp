#pragma once

#include <optional>
#include <string>
#include <vector>

#include "depthforge/crossval.hpp"
#include "depthforge/mkl.hpp"
#include "depthforge/net.hpp"
#include "depthforge/svm.hpp"
#include "depthforge/trainer.hpp"

namespace depthforge {

class LengthMismatchError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class EmptyError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class AlignmentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct EvalReport {
    double overall_accuracy = 0.0;
    std::vector<std::string> class_names;
    std::vector<int> support;  // per class
    // Absent classes (support 0) have no defined accuracy and stay nullopt.
    std::vector<std::optional<double>> per_class_accuracy;
    std::vector<std::vector<int>> confusion;  // row = true class, col = predicted
    std::string fingerprint;
};

// predictions and labels are class indices into class_names.
EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    const std::vector<std::string>& class_names, std::string fingerprint = "");

struct AblationCell {
    std::string layer;
    Preproc preproc = Preproc::raw;
    double chosen_c = 1.0;
    EvalReport report;
};

struct AblationGrid {
    std::vector<AblationCell> cells;
};

// For each (layer, preprocessing) cell: extract features, pick C by CV on the
// training rows only, fit the SVM, evaluate on test. Duplicate layers are
// dropped with a warning. Feature rows are L2-normalized before the SVM.
AblationGrid run_ablation(const Net<float>& net, const std::vector<TrainSample>& train,
                          const std::vector<TrainSample>& test,
                          const std::vector<std::string>& class_names,
                          const std::vector<std::string>& layers,
                          const std::vector<Preproc>& preprocs,
                          const std::vector<double>& c_grid, int cv_folds, std::uint64_t seed);

struct FusionResult {
    EvalReport first_only;
    EvalReport second_only;
    EvalReport fused;
    double chosen_p = 2.0;
    double chosen_c_fused = 1.0;
    double chosen_c_first = 1.0;
    double chosen_c_second = 1.0;
};

// Two aligned feature sets over the same samples: single-modality SVMs and the
// MKL fusion, all trained on train_idx and evaluated on test_idx.
FusionResult run_fusion_eval(const FeatureMatrix& first, const FeatureMatrix& second,
                             const std::vector<int>& labels,
                             const std::vector<size_t>& train_idx,
                             const std::vector<size_t>& test_idx,
                             const std::vector<std::string>& class_names,
                             const std::vector<double>& p_grid,
                             const std::vector<double>& c_grid, int cv_folds,
                             std::uint64_t seed, int online_iters = 100, int batch_iters = 300);

// Feature extraction over many images with a worker pool; row order follows
// the input order regardless of the job count.
FeatureMatrix extract_feature_matrix(const Net<float>& net, const std::vector<TrainSample>& samples,
                                     const std::string& layer, Preproc pre);

// CSV: layer,preproc,modality,accuracy (one row per report).
struct ReportRow {
    std::string layer;
    std::string preproc;
    std::string modality;
    double accuracy = 0.0;
};
std::string report_csv(const std::vector<ReportRow>& rows);

// Full report as JSON: fingerprint, overall, per-class (null when undefined),
// confusion matrix.
std::string report_json(const EvalReport& report);

// Horizontal-axis bar chart of per-class accuracies.
void save_class_accuracy_chart(const EvalReport& report, const std::filesystem::path& path);

}  // namespace depthforge
