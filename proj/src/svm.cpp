#include "depthforge/svm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "depthforge/log.hpp"
#include "depthforge/parallel.hpp"

namespace depthforge {

FeatureMatrix l2_normalize_rows(const FeatureMatrix& X) {
    FeatureMatrix out = X;
    for (size_t i = 0; i < out.n; ++i) {
        double* row = out.row(i);
        double s = 0.0;
        for (size_t j = 0; j < out.d; ++j) s += row[j] * row[j];
        if (s <= 0.0) continue;
        const double inv = 1.0 / std::sqrt(s);
        for (size_t j = 0; j < out.d; ++j) row[j] *= inv;
    }
    return out;
}

BinarySvmSolution solve_binary_svm(const FeatureMatrix& X, const std::vector<int>& y,
                                   double C, double tol, int max_passes) {
    if (y.size() != X.n) throw DimMismatchError("label count does not match feature rows");
    if (!(C > 0.0)) throw BadCError("C must be positive, got " + std::to_string(C));
    const size_t n = X.n, d = X.d;

    // Augmented problem: x~ = [x; 1], w~ = [w; b]. Q_ii = |x_i|^2 + 1.
    std::vector<double> qd(n);
    for (size_t i = 0; i < n; ++i) {
        const double* row = X.row(i);
        double s = 1.0;
        for (size_t j = 0; j < d; ++j) s += row[j] * row[j];
        qd[i] = s;
    }

    BinarySvmSolution sol;
    sol.alpha.assign(n, 0.0);
    sol.w.assign(d + 1, 0.0);
    for (int pass = 0; pass < max_passes; ++pass) {
        double max_pg = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double* row = X.row(i);
            double score = sol.w[d];
            for (size_t j = 0; j < d; ++j) score += sol.w[j] * row[j];
            const double g = y[i] * score - 1.0;
            double pg = g;
            if (sol.alpha[i] <= 0.0) {
                pg = std::min(g, 0.0);
            } else if (sol.alpha[i] >= C) {
                pg = std::max(g, 0.0);
            }
            max_pg = std::max(max_pg, std::abs(pg));
            if (pg == 0.0) continue;
            const double next = std::clamp(sol.alpha[i] - g / qd[i], 0.0, C);
            const double delta = next - sol.alpha[i];
            if (delta == 0.0) continue;
            sol.alpha[i] = next;
            const double step = delta * y[i];
            for (size_t j = 0; j < d; ++j) sol.w[j] += step * row[j];
            sol.w[d] += step;
        }
        if (max_pg < tol) return sol;
    }
    log_debug("svm solver hit the pass cap before reaching tol");
    return sol;
}

double svm_dual_objective(const FeatureMatrix& X, const std::vector<int>& y,
                          const std::vector<double>& alpha) {
    const size_t n = X.n, d = X.d;
    std::vector<double> w(d + 1, 0.0);
    double sum_alpha = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double step = alpha[i] * y[i];
        const double* row = X.row(i);
        for (size_t j = 0; j < d; ++j) w[j] += step * row[j];
        w[d] += step;
        sum_alpha += alpha[i];
    }
    double quad = 0.0;
    for (double v : w) quad += v * v;
    return sum_alpha - 0.5 * quad;
}

SvmModel train_linear_svm(const FeatureMatrix& X, const std::vector<int>& labels, double C,
                          double tol, int max_passes) {
    if (labels.size() != X.n) throw DimMismatchError("label count does not match feature rows");
    if (!(C > 0.0)) throw BadCError("C must be positive, got " + std::to_string(C));
    const std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw SingleClassError("need at least 2 classes");

    SvmModel model;
    model.C = C;
    model.classes.assign(distinct.begin(), distinct.end());
    const size_t k = model.classes.size();
    model.w.resize(k);
    model.b.resize(k);
    // The one-vs-rest problems are independent; each writes only its own slot,
    // so the result does not depend on the worker count.
    parallel_for_each(k, [&](size_t c) {
        std::vector<int> y(labels.size());
        for (size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == model.classes[c] ? 1 : -1;
        BinarySvmSolution sol = solve_binary_svm(X, y, C, tol, max_passes);
        model.b[c] = sol.w.back();
        sol.w.pop_back();
        model.w[c] = std::move(sol.w);
    });
    return model;
}

std::vector<double> svm_scores(const SvmModel& model, const double* x, size_t d) {
    std::vector<double> scores(model.classes.size());
    for (size_t c = 0; c < model.classes.size(); ++c) {
        if (model.w[c].size() != d) {
            throw DimMismatchError("feature dim " + std::to_string(d) + " does not match model " +
                                   std::to_string(model.w[c].size()));
        }
        double s = model.b[c];
        for (size_t j = 0; j < d; ++j) s += model.w[c][j] * x[j];
        scores[c] = s;
    }
    return scores;
}

int svm_predict_one(const SvmModel& model, const double* x, size_t d) {
    const std::vector<double> scores = svm_scores(model, x, d);
    size_t best = 0;
    for (size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) best = c;
    }
    return model.classes[best];
}

std::vector<int> svm_predict(const SvmModel& model, const FeatureMatrix& X) {
    std::vector<int> out(X.n);
    for (size_t i = 0; i < X.n; ++i) out[i] = svm_predict_one(model, X.row(i), X.d);
    return out;
}

}  // namespace depthforge
