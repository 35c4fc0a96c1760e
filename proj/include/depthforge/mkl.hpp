#pragma once

#include <filesystem>
#include <vector>

#include "depthforge/svm.hpp"

namespace depthforge {

class BadHyperparamError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }
    const double* row(size_t i) const { return data.data() + i * cols; }
};

// G[i][j] = <a_i, b_j> after per-row L2 normalization; square results are
// trace-normalized to n. Throws DimMismatchError when feature dims differ.
Matrix linear_kernel(const FeatureMatrix& A, const FeatureMatrix& B);

// One gram per modality over the same n training samples.
struct KernelSet {
    std::vector<Matrix> grams;
    std::vector<int> labels;
};

// Checks shapes and symmetry (1e-8). Positive semidefiniteness is a property
// of correctly built grams and is asserted in tests, not here.
void validate_kernel_set(const KernelSet& kset);

struct MklModel {
    std::vector<double> beta;                 // M weights, ||beta||_p = 1
    std::vector<int> classes;                 // ascending
    std::vector<std::vector<double>> alpha;   // per class, n dual vars
    std::vector<int> train_labels;            // n
    double p = 2.0;
    double C = 1.0;
    int online_iters = 100;
    int batch_iters = 300;
    std::vector<double> objective_curve;      // batch-phase dual objective per alternation
};

// Alternating p-norm MKL on K(beta) = sum_m beta_m G_m + 1 (the +1 is the
// bias kernel, matching the linear solver's constant-feature bias):
// stochastic warm-start passes (online_iters), then exact alternations of
// dual solve and closed-form update beta_m proportional to gamma_m^(1/(p-1)),
// gamma_m = alpha' Y G_m Y alpha, renormalized to ||beta||_p = 1. A
// backtracking step toward the previous beta keeps the recorded objective
// non-increasing; alternations stop at batch_iters or objective change < 1e-6.
MklModel train_mkl(const KernelSet& kset, double p, double C, int online_iters = 100,
                   int batch_iters = 300);

// Cross grams: one per modality, n_test x n_train, built with linear_kernel
// against the training features. Ties broken by the lowest class index.
std::vector<int> mkl_predict(const MklModel& model, const std::vector<Matrix>& cross_grams);
std::vector<std::vector<double>> mkl_scores(const MklModel& model,
                                            const std::vector<Matrix>& cross_grams);

// Square gram cache: 8-byte magic "DFGRAM1\0", uint32 n, then n*n little-
// endian doubles.
void save_gram(const Matrix& gram, const std::filesystem::path& path);
Matrix load_gram(const std::filesystem::path& path);

}  // namespace depthforge
