#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace depthforge {

class DimMismatchError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class BadCError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class SingleClassError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Row-major n x d feature matrix (doubles: the solvers need the headroom).
struct FeatureMatrix {
    size_t n = 0;
    size_t d = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(size_t rows, size_t cols) : n(rows), d(cols), data(rows * cols, 0.0) {}

    double* row(size_t i) { return data.data() + i * d; }
    const double* row(size_t i) const { return data.data() + i * d; }
    double& at(size_t i, size_t j) { return data[i * d + j]; }
    double at(size_t i, size_t j) const { return data[i * d + j]; }
};

// Scales each row to unit L2 norm (zero rows stay zero).
FeatureMatrix l2_normalize_rows(const FeatureMatrix& X);

// One-vs-rest linear classifiers. The bias is learned as a weight on an
// implicit constant-1 feature, so it is L2-regularized like the rest of w.
struct SvmModel {
    std::vector<int> classes;             // distinct labels, ascending
    std::vector<std::vector<double>> w;   // per class, length d
    std::vector<double> b;                // per class
    double C = 1.0;
};

// L1-hinge dual coordinate descent per class, run until the largest projected
// dual gradient falls below tol. Throws BadCError / SingleClassError.
SvmModel train_linear_svm(const FeatureMatrix& X, const std::vector<int>& labels, double C,
                          double tol = 1e-7, int max_passes = 20000);

// Model-selection-grade stopping used by the cross-validation and report
// harness. Prediction accuracy on held-out data saturates long before the
// dual converges, so grid search and report models stop much earlier than
// the oracle-grade defaults above (same spirit as liblinear's eps=0.1).
inline constexpr double kHarnessTol = 1e-3;
inline constexpr int kHarnessMaxPasses = 1000;

// Per-class decision values w_c . x + b_c.
std::vector<double> svm_scores(const SvmModel& model, const double* x, size_t d);

// argmax of scores; ties broken by the lowest class index.
int svm_predict_one(const SvmModel& model, const double* x, size_t d);
std::vector<int> svm_predict(const SvmModel& model, const FeatureMatrix& X);

// Binary L1-SVM dual objective e'a - a'YQYa/2 for the augmented-bias problem,
// exposed for solver verification.
double svm_dual_objective(const FeatureMatrix& X, const std::vector<int>& y_pm1,
                          const std::vector<double>& alpha);

// Dual variables of the one-vs-rest subproblems from the last train call are
// not retained in the model; this helper solves a single binary problem and
// returns (alpha, w_augmented) for oracle tests.
struct BinarySvmSolution {
    std::vector<double> alpha;
    std::vector<double> w;  // length d+1, last entry is the bias weight
};
BinarySvmSolution solve_binary_svm(const FeatureMatrix& X, const std::vector<int>& y_pm1,
                                   double C, double tol = 1e-7, int max_passes = 20000);

}  // namespace depthforge
