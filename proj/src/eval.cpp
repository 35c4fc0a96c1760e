#include "depthforge/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depthforge/log.hpp"
#include "depthforge/parallel.hpp"
#include "depthforge/png_io.hpp"

namespace depthforge {

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    const std::vector<std::string>& class_names, std::string fingerprint) {
    if (predictions.size() != labels.size()) {
        throw LengthMismatchError("got " + std::to_string(predictions.size()) +
                                  " predictions for " + std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw EmptyError("nothing to evaluate");
    const int k = static_cast<int>(class_names.size());
    EvalReport rep;
    rep.class_names = class_names;
    rep.fingerprint = std::move(fingerprint);
    rep.support.assign(k, 0);
    rep.confusion.assign(k, std::vector<int>(k, 0));
    size_t correct = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k || predictions[i] < 0 || predictions[i] >= k) {
            throw LengthMismatchError("class index outside [0, " + std::to_string(k) + ")");
        }
        ++rep.confusion[labels[i]][predictions[i]];
        ++rep.support[labels[i]];
        if (labels[i] == predictions[i]) ++correct;
    }
    rep.overall_accuracy = static_cast<double>(correct) / labels.size();
    rep.per_class_accuracy.assign(k, std::nullopt);
    for (int c = 0; c < k; ++c) {
        if (rep.support[c] > 0) {
            rep.per_class_accuracy[c] =
                static_cast<double>(rep.confusion[c][c]) / rep.support[c];
        }
    }
    return rep;
}

FeatureMatrix extract_feature_matrix(const Net<float>& net, const std::vector<TrainSample>& samples,
                                     const std::string& layer, Preproc pre) {
    if (samples.empty()) throw EmptyError("no samples to extract features from");
    // Probe the tap once for the dimension (and to fail fast on bad names).
    Net<float> probe(net);
    const FeatureVector first = extract_features(probe, samples[0].img, layer, pre);
    FeatureMatrix X(samples.size(), first.dim());
    std::copy(first.values.begin(), first.values.end(), X.row(0));
    parallel_for(samples.size() - 1, [&](size_t begin, size_t end) {
        Net<float> local(net);  // forward caches are per-worker
        for (size_t i = begin; i < end; ++i) {
            const FeatureVector fv = extract_features(local, samples[i + 1].img, layer, pre);
            std::copy(fv.values.begin(), fv.values.end(), X.row(i + 1));
        }
    });
    return X;
}

namespace {

std::vector<int> labels_of(const std::vector<TrainSample>& samples) {
    std::vector<int> out(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) out[i] = samples[i].label;
    return out;
}

const char* preproc_name(Preproc p) {
    return p == Preproc::raw ? "raw" : "minmax";
}

// Model classes are label values; map predictions back to class indices.
std::vector<int> predict_indices(const SvmModel& model, const FeatureMatrix& X) {
    return svm_predict(model, X);
}

}  // namespace

AblationGrid run_ablation(const Net<float>& net, const std::vector<TrainSample>& train,
                          const std::vector<TrainSample>& test,
                          const std::vector<std::string>& class_names,
                          const std::vector<std::string>& layers,
                          const std::vector<Preproc>& preprocs,
                          const std::vector<double>& c_grid, int cv_folds, std::uint64_t seed) {
    if (train.empty() || test.empty()) throw EmptyError("ablation needs train and test samples");
    std::vector<std::string> unique_layers;
    for (const auto& l : layers) {
        if (std::find(unique_layers.begin(), unique_layers.end(), l) != unique_layers.end()) {
            log_error("warning: duplicate layer '" + l + "' in ablation axis, dropping repeat");
            continue;
        }
        unique_layers.push_back(l);
    }

    const std::vector<int> train_y = labels_of(train);
    const std::vector<int> test_y = labels_of(test);
    AblationGrid grid;
    for (const auto& layer : unique_layers) {
        for (const Preproc pre : preprocs) {
            const FeatureMatrix train_x =
                l2_normalize_rows(extract_feature_matrix(net, train, layer, pre));
            const FeatureMatrix test_x =
                l2_normalize_rows(extract_feature_matrix(net, test, layer, pre));
            const SvmCvResult cv = cross_validate_svm(train_x, train_y, c_grid, cv_folds, seed);
            const SvmModel model =
                train_linear_svm(train_x, train_y, cv.C, kHarnessTol, kHarnessMaxPasses);
            AblationCell cell;
            cell.layer = layer;
            cell.preproc = pre;
            cell.chosen_c = cv.C;
            cell.report = evaluate(predict_indices(model, test_x), test_y, class_names,
                                   "layer=" + layer + " preproc=" + preproc_name(pre) +
                                       " modality=depth seed=" + std::to_string(seed));
            grid.cells.push_back(std::move(cell));
            log_info("ablation " + layer + "/" + preproc_name(pre) + " acc " +
                     std::to_string(grid.cells.back().report.overall_accuracy));
        }
    }
    return grid;
}

FusionResult run_fusion_eval(const FeatureMatrix& first, const FeatureMatrix& second,
                             const std::vector<int>& labels,
                             const std::vector<size_t>& train_idx,
                             const std::vector<size_t>& test_idx,
                             const std::vector<std::string>& class_names,
                             const std::vector<double>& p_grid,
                             const std::vector<double>& c_grid, int cv_folds,
                             std::uint64_t seed, int online_iters, int batch_iters) {
    if (first.n != second.n || first.n != labels.size()) {
        throw AlignmentError("modalities cover " + std::to_string(first.n) + " and " +
                             std::to_string(second.n) + " samples for " +
                             std::to_string(labels.size()) + " labels");
    }
    if (test_idx.empty()) throw EmptyError("empty test split");
    if (train_idx.empty()) throw EmptyError("empty train split");
    {
        std::set<size_t> train_set(train_idx.begin(), train_idx.end());
        for (size_t i : test_idx) {
            if (train_set.contains(i)) {
                throw AlignmentError("sample " + std::to_string(i) +
                                     " appears in both train and test");
            }
        }
    }

    auto take = [](const FeatureMatrix& X, const std::vector<size_t>& idx) {
        FeatureMatrix out(idx.size(), X.d);
        for (size_t i = 0; i < idx.size(); ++i) {
            std::copy(X.row(idx[i]), X.row(idx[i]) + X.d, out.row(i));
        }
        return out;
    };
    std::vector<int> train_y, test_y;
    for (size_t i : train_idx) train_y.push_back(labels[i]);
    for (size_t i : test_idx) test_y.push_back(labels[i]);

    FusionResult result;
    const FeatureMatrix modalities[2] = {l2_normalize_rows(first), l2_normalize_rows(second)};
    EvalReport* singles[2] = {&result.first_only, &result.second_only};
    double* chosen_c[2] = {&result.chosen_c_first, &result.chosen_c_second};
    const char* names[2] = {"first", "second"};
    for (int m = 0; m < 2; ++m) {
        const FeatureMatrix train_x = take(modalities[m], train_idx);
        const FeatureMatrix test_x = take(modalities[m], test_idx);
        const SvmCvResult cv = cross_validate_svm(train_x, train_y, c_grid, cv_folds, seed);
        *chosen_c[m] = cv.C;
        const SvmModel model =
            train_linear_svm(train_x, train_y, cv.C, kHarnessTol, kHarnessMaxPasses);
        *singles[m] = evaluate(predict_indices(model, test_x), test_y, class_names,
                               std::string("modality=") + names[m] +
                                   " seed=" + std::to_string(seed));
    }

    std::vector<Matrix> train_grams, cross_grams;
    for (int m = 0; m < 2; ++m) {
        const FeatureMatrix train_x = take(modalities[m], train_idx);
        const FeatureMatrix test_x = take(modalities[m], test_idx);
        train_grams.push_back(linear_kernel(train_x, train_x));
        cross_grams.push_back(linear_kernel(test_x, train_x));
    }
    const MklCvResult cv = cross_validate_mkl(train_grams, train_y, p_grid, c_grid, cv_folds,
                                              seed, online_iters, batch_iters);
    result.chosen_p = cv.p;
    result.chosen_c_fused = cv.C;
    KernelSet kset;
    kset.grams = train_grams;
    kset.labels = train_y;
    const MklModel model = train_mkl(kset, cv.p, cv.C, online_iters, batch_iters);
    result.fused = evaluate(mkl_predict(model, cross_grams), test_y, class_names,
                            "modality=fused p=" + std::to_string(cv.p) +
                                " seed=" + std::to_string(seed));
    return result;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "layer,preproc,modality,accuracy\n";
    for (const auto& r : rows) {
        char acc[32];
        std::snprintf(acc, sizeof(acc), "%.6f", r.accuracy);
        out << r.layer << ',' << r.preproc << ',' << r.modality << ',' << acc << '\n';
    }
    return out.str();
}

std::string report_json(const EvalReport& report) {
    nlohmann::json j;
    j["fingerprint"] = report.fingerprint;
    j["overall_accuracy"] = report.overall_accuracy;
    j["class_names"] = report.class_names;
    j["support"] = report.support;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& a : report.per_class_accuracy) {
        if (a) {
            per.push_back(*a);
        } else {
            per.push_back(nullptr);
        }
    }
    j["per_class_accuracy"] = per;
    j["confusion"] = report.confusion;
    return j.dump(2) + "\n";
}

void save_class_accuracy_chart(const EvalReport& report, const std::filesystem::path& path) {
    const int k = static_cast<int>(report.class_names.size());
    const int bar_w = 28, gap = 12, margin = 24, plot_h = 200;
    const int width = margin * 2 + k * bar_w + (k - 1) * gap;
    const int height = plot_h + margin * 2;
    RgbImage img(width, height, 255, 255, 255);
    for (int x = margin; x < width - margin; ++x) {
        img.set(x, margin + plot_h, 40, 40, 40);  // baseline
    }
    for (int c = 0; c < k; ++c) {
        if (!report.per_class_accuracy[c]) continue;
        const int h = static_cast<int>(std::lround(*report.per_class_accuracy[c] * plot_h));
        const int x0 = margin + c * (bar_w + gap);
        for (int y = margin + plot_h - h; y < margin + plot_h; ++y) {
            for (int x = x0; x < x0 + bar_w; ++x) img.set(x, y, 38, 70, 140);
        }
    }
    save_png_rgb8(img, path);
}

}  // namespace depthforge
