#pragma once

#include <cstdint>
#include <vector>

#include "depthforge/mkl.hpp"
#include "depthforge/svm.hpp"

namespace depthforge {

class TooFewSamplesError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// k index sets, stratified by class (each class's samples are shuffled by the
// seed and dealt round-robin), covering [0, n) exactly once.
std::vector<std::vector<size_t>> stratified_folds(const std::vector<int>& labels, int k,
                                                  std::uint64_t seed);

struct SvmCvResult {
    double C = 1.0;
    double mean_accuracy = 0.0;
};

// Grid search over C by k-fold CV; ties resolved toward the smallest C.
SvmCvResult cross_validate_svm(const FeatureMatrix& X, const std::vector<int>& labels,
                               const std::vector<double>& c_grid, int k, std::uint64_t seed);

struct MklCvResult {
    double p = 2.0;
    double C = 1.0;
    double mean_accuracy = 0.0;
};

// Grid search over (p, C) for the fused classifier. Grams are subset per fold
// from the full training grams. Ties: smallest C, then smallest p.
MklCvResult cross_validate_mkl(const std::vector<Matrix>& grams, const std::vector<int>& labels,
                               const std::vector<double>& p_grid,
                               const std::vector<double>& c_grid, int k, std::uint64_t seed,
                               int online_iters = 100, int batch_iters = 300);

}  // namespace depthforge
