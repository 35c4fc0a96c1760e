#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "depthforge/config.hpp"
#include "depthforge/log.hpp"
#include "depthforge/parallel.hpp"
#include "depthforge/pipeline.hpp"

namespace {

// Flag overrides layered on top of the (optional) config file. The seed must
// come from one of the two: there is no implicit default.
struct CliArgs {
    std::string config_path;
    std::string models_dir;
    std::string out_dir;
    int count = 0;
    std::uint64_t seed = 0;
    bool has_models = false, has_out = false, has_count = false, has_seed = false;
};

depthforge::PipelineConfig resolve_config(const CliArgs& args) {
    depthforge::PipelineConfig cfg;
    if (!args.config_path.empty()) cfg = depthforge::load_pipeline_config(args.config_path);
    if (args.has_models) cfg.models_dir = args.models_dir;
    if (args.has_out) cfg.output_dir = args.out_dir;
    if (args.has_count) cfg.count = args.count;
    if (args.has_seed) {
        cfg.seed = args.seed;
        cfg.seed_set = true;
        cfg.train.seed = args.seed;
    }
    if (!cfg.seed_set) {
        throw depthforge::ConfigError("pipeline.seed",
                                      "seed is required: set it in the config or pass --seed");
    }
    return cfg;
}

void add_common(CLI::App* sub, CliArgs& args) {
    sub->add_option("--config", args.config_path, "pipeline config file");
    sub->add_option("--out", args.out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { args.has_out = true; });
    sub->add_option("--seed", args.seed, "global seed (overrides config)")
        ->each([&](const std::string&) { args.has_seed = true; });
}

}  // namespace

int main(int argc, char** argv) {
    using namespace depthforge;

    CLI::App app{"depthforge: render depth images from CAD models, learn depth features, "
                 "evaluate layer ablations and modality fusion"};
    app.require_subcommand(1);
    app.fallthrough();
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker pool size (outputs do not depend on it)")
        ->check(CLI::Range(1, 256));

    CliArgs args;

    CLI::App* gen = app.add_subcommand("gen", "render the config space and write the manifest");
    add_common(gen, args);
    gen->add_option("--models", args.models_dir, "directory of .obj models")
        ->each([&](const std::string&) { args.has_models = true; });
    gen->add_option("--count", args.count, "configs per model")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { args.has_count = true; });

    int threshold = -1;
    CLI::App* dedup = app.add_subcommand(
        "dedup-report", "near-duplicate statistics per model (renders nothing to disk)");
    add_common(dedup, args);
    dedup->add_option("--models", args.models_dir, "directory of .obj models")
        ->each([&](const std::string&) { args.has_models = true; });
    dedup->add_option("--count", args.count, "configs per model")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { args.has_count = true; });
    dedup->add_option("--threshold", threshold, "Hamming distance threshold")
        ->check(CLI::Range(0, 64));

    CLI::App* train = app.add_subcommand("train", "train the net on the training split");
    add_common(train, args);

    std::string layer = "pool_last";
    std::string preproc = "raw";
    CLI::App* extract = app.add_subcommand("extract", "write features for every manifest row");
    add_common(extract, args);
    extract->add_option("--layer", layer, "feature tap name")->required();
    extract->add_option("--preproc", preproc, "depth preprocessing")
        ->check(CLI::IsMember({"raw", "minmax"}));

    CLI::App* eval = app.add_subcommand("eval", "SVM evaluation of the configured layer");
    add_common(eval, args);

    CLI::App* ablate = app.add_subcommand("ablate", "layer x preprocessing ablation grid");
    add_common(ablate, args);

    double fuse_p = 0.0, fuse_c = 0.0;
    CLI::App* fuse = app.add_subcommand("fuse", "two-modality MKL fusion (raw + minmax features)");
    add_common(fuse, args);
    fuse->add_option("--p", fuse_p, "pin the MKL norm p (> 1) instead of CV")
        ->check(CLI::Range(1.0001, 16.0));
    fuse->add_option("--C", fuse_c, "pin the SVM C instead of CV")->check(CLI::PositiveNumber);

    std::string demo_out = "demo_out";
    std::uint64_t demo_seed = 0;
    CLI::App* demo = app.add_subcommand("demo", "end-to-end 5-primitive benchmark from scratch");
    demo->add_option("--out", demo_out, "output directory");
    demo->add_option("--seed", demo_seed, "global seed")->required();

    std::string active = "depthforge";
    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 2;
        }
        set_jobs(jobs);

        if (gen->parsed()) {
            active = "gen";
            run_gen(resolve_config(args));
        } else if (dedup->parsed()) {
            active = "dedup-report";
            const PipelineConfig cfg = resolve_config(args);
            const std::string csv =
                run_dedup_report(cfg, threshold >= 0 ? threshold : cfg.dedup_threshold);
            std::fputs(csv.c_str(), stdout);
        } else if (train->parsed()) {
            active = "train";
            run_train(resolve_config(args));
        } else if (extract->parsed()) {
            active = "extract";
            run_extract(resolve_config(args), layer, preproc);
        } else if (eval->parsed()) {
            active = "eval";
            run_eval(resolve_config(args));
        } else if (ablate->parsed()) {
            active = "ablate";
            run_ablate(resolve_config(args));
        } else if (fuse->parsed()) {
            active = "fuse";
            run_fuse(resolve_config(args), fuse_p, fuse_c);
        } else if (demo->parsed()) {
            active = "demo";
            const DemoResult res = run_demo(demo_out, demo_seed);
            std::printf("demo: test accuracy %.4f (%zu train / %zu test samples)\n",
                        res.test_accuracy, res.train_samples, res.test_samples);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "depthforge %s: config error: %s\n", active.c_str(), e.what());
        return 2;
    } catch (const UnknownLayerError& e) {
        std::fprintf(stderr, "depthforge %s: %s\n", active.c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "depthforge %s: %s\n", active.c_str(), e.what());
        return 1;
    }
}
