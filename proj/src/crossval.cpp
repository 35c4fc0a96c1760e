#include "depthforge/crossval.hpp"

#include <algorithm>
#include <map>

#include "depthforge/log.hpp"
#include "depthforge/rng.hpp"

namespace depthforge {

std::vector<std::vector<size_t>> stratified_folds(const std::vector<int>& labels, int k,
                                                  std::uint64_t seed) {
    if (k < 2) throw TooFewSamplesError("need at least 2 folds");
    if (labels.size() < static_cast<size_t>(k)) {
        throw TooFewSamplesError("fewer samples than folds");
    }
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<std::vector<size_t>> folds(k);
    size_t offset = 0;  // stagger classes so small classes spread over folds
    for (auto& [cls, idxs] : by_class) {
        CounterRng rng = CounterRng(seed).derive("folds").derive(static_cast<std::uint64_t>(cls));
        rng.shuffle(idxs);
        for (size_t i = 0; i < idxs.size(); ++i) {
            folds[(offset + i) % k].push_back(idxs[i]);
        }
        offset += idxs.size();
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

namespace {

FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<size_t>& idx) {
    FeatureMatrix out(idx.size(), X.d);
    for (size_t i = 0; i < idx.size(); ++i) {
        std::copy(X.row(idx[i]), X.row(idx[i]) + X.d, out.row(i));
    }
    return out;
}

Matrix take_block(const Matrix& g, const std::vector<size_t>& rows,
                  const std::vector<size_t>& cols) {
    Matrix out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < cols.size(); ++j) out.at(i, j) = g.at(rows[i], cols[j]);
    }
    return out;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    size_t correct = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) ++correct;
    }
    return pred.empty() ? 0.0 : static_cast<double>(correct) / pred.size();
}

}  // namespace

SvmCvResult cross_validate_svm(const FeatureMatrix& X, const std::vector<int>& labels,
                               const std::vector<double>& c_grid, int k, std::uint64_t seed) {
    if (c_grid.empty()) throw TooFewSamplesError("empty C grid");
    const auto folds = stratified_folds(labels, k, seed);

    std::vector<double> cs = c_grid;
    std::sort(cs.begin(), cs.end());
    SvmCvResult best;
    best.mean_accuracy = -1.0;
    for (const double c : cs) {
        double acc_sum = 0.0;
        for (int f = 0; f < k; ++f) {
            std::vector<size_t> train_idx, test_idx = folds[f];
            for (int g = 0; g < k; ++g) {
                if (g == f) continue;
                train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
            }
            std::vector<int> train_y, test_y;
            for (size_t i : train_idx) train_y.push_back(labels[i]);
            for (size_t i : test_idx) test_y.push_back(labels[i]);
            const SvmModel model = train_linear_svm(take_rows(X, train_idx), train_y, c,
                                                    kHarnessTol, kHarnessMaxPasses);
            acc_sum += accuracy(svm_predict(model, take_rows(X, test_idx)), test_y);
        }
        const double mean = acc_sum / k;
        if (mean > best.mean_accuracy + 1e-12) {
            best.mean_accuracy = mean;
            best.C = c;
        }
    }
    log_debug("svm cv picked C=" + std::to_string(best.C) + " acc=" +
              std::to_string(best.mean_accuracy));
    return best;
}

MklCvResult cross_validate_mkl(const std::vector<Matrix>& grams, const std::vector<int>& labels,
                               const std::vector<double>& p_grid,
                               const std::vector<double>& c_grid, int k, std::uint64_t seed,
                               int online_iters, int batch_iters) {
    if (p_grid.empty() || c_grid.empty()) throw TooFewSamplesError("empty parameter grid");
    const auto folds = stratified_folds(labels, k, seed);

    std::vector<double> cs = c_grid, ps = p_grid;
    std::sort(cs.begin(), cs.end());
    std::sort(ps.begin(), ps.end());
    MklCvResult best;
    best.mean_accuracy = -1.0;
    for (const double c : cs) {
        for (const double p : ps) {
            double acc_sum = 0.0;
            for (int f = 0; f < k; ++f) {
                std::vector<size_t> train_idx, test_idx = folds[f];
                for (int g = 0; g < k; ++g) {
                    if (g == f) continue;
                    train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
                }
                KernelSet kset;
                for (const Matrix& g : grams) kset.grams.push_back(take_block(g, train_idx, train_idx));
                for (size_t i : train_idx) kset.labels.push_back(labels[i]);
                const MklModel model = train_mkl(kset, p, c, online_iters, batch_iters);
                std::vector<Matrix> cross;
                for (const Matrix& g : grams) cross.push_back(take_block(g, test_idx, train_idx));
                std::vector<int> test_y;
                for (size_t i : test_idx) test_y.push_back(labels[i]);
                acc_sum += accuracy(mkl_predict(model, cross), test_y);
            }
            const double mean = acc_sum / k;
            // Grid walked in (C asc, p asc) order, so strict improvement
            // implements the smallest-C-then-smallest-p tie break.
            if (mean > best.mean_accuracy + 1e-12) {
                best.mean_accuracy = mean;
                best.C = c;
                best.p = p;
            }
        }
    }
    log_debug("mkl cv picked p=" + std::to_string(best.p) + " C=" + std::to_string(best.C) +
              " acc=" + std::to_string(best.mean_accuracy));
    return best;
}

}  // namespace depthforge
