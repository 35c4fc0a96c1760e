#include <filesystem>
#include <fstream>
#include <set>

#include "depthforge/dataset.hpp"
#include "doctest.h"

using namespace depthforge;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "depthforge_dataset_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

SampleRecord make_record(const std::string& cls, const std::string& model, int frame) {
    SampleRecord rec;
    rec.path = "renders/" + cls + "/" + model + "/" + std::to_string(frame) + "_depth.png";
    rec.class_label = cls;
    rec.model_id = model;
    rec.frame_index = frame;
    return rec;
}

}  // namespace

TEST_CASE("manifest round trip preserves records including camera configs") {
    const auto dir = fresh_dir("roundtrip");
    const auto path = dir / "manifest.jsonl";

    SampleRecord plain = make_record("box", "box_0", 3);
    SampleRecord with_cfg = make_record("cone", "cone_2", 17);
    CameraConfig cfg;
    cfg.distance = 2.125;
    cfg.fov_deg = 51.5;
    cfg.sphere_dir = normalized({0.25, -0.8, 0.5});
    cfg.morph.axis_scales = {0.95, 1.04, 1.0};
    with_cfg.config = cfg;
    with_cfg.modality = "rgb";

    {
        ManifestWriter writer(path);
        writer.append(plain);
        writer.append(with_cfg);
        writer.flush();
    }
    const auto records = load_manifest(path);
    REQUIRE(records.size() == 2);
    CHECK(records[0] == plain);
    CHECK(records[1] == with_cfg);
}

TEST_CASE("manifest writer append mode extends an existing file") {
    const auto dir = fresh_dir("append");
    const auto path = dir / "manifest.jsonl";
    {
        ManifestWriter writer(path);
        writer.append(make_record("a", "a0", 0));
    }
    {
        ManifestWriter writer(path, /*append=*/true);
        writer.append(make_record("a", "a1", 1));
    }
    CHECK(load_manifest(path).size() == 2);
    {
        ManifestWriter writer(path);  // truncate mode starts over
        writer.append(make_record("b", "b0", 0));
    }
    CHECK(load_manifest(path).size() == 1);
}

TEST_CASE("manifest parse errors carry the line number") {
    const auto dir = fresh_dir("badline");
    const auto path = dir / "manifest.jsonl";
    {
        ManifestWriter writer(path);
        writer.append(make_record("a", "a0", 0));
    }
    {
        std::ofstream out(path, std::ios::app);
        out << "{ this is not json\n";
    }
    CHECK_THROWS_AS(load_manifest(path), ManifestParseError);
    try {
        load_manifest(path);
    } catch (const ManifestParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_manifest(dir / "missing.jsonl"), IoError);
}

TEST_CASE("record validation catches empty fields and unknown modalities") {
    SampleRecord rec = make_record("box", "box_0", 0);
    CHECK_NOTHROW(validate_record(rec));
    SampleRecord no_class = rec;
    no_class.class_label.clear();
    CHECK_THROWS_AS(validate_record(no_class), ValidationError);
    SampleRecord no_path = rec;
    no_path.path.clear();
    CHECK_THROWS_AS(validate_record(no_path), ValidationError);
    SampleRecord bad_mod = rec;
    bad_mod.modality = "thermal";
    CHECK_THROWS_AS(validate_record(bad_mod), ValidationError);
}

TEST_CASE("minmax normalization maps endpoints exactly and is idempotent") {
    DepthImage img(3, 1);
    img.at(0, 0) = 10;
    img.at(1, 0) = 20;
    img.at(2, 0) = 30;
    const DepthImage out = minmax_normalize(img);
    CHECK(out.at(0, 0) == 0);
    CHECK(out.at(1, 0) == 128);  // (20-10)*255/20 = 127.5, rounded half up
    CHECK(out.at(2, 0) == 255);
    CHECK(minmax_normalize(out).gray == out.gray);

    DepthImage constant(4, 4, 200);
    const DepthImage flat = minmax_normalize(constant);
    for (auto g : flat.gray) CHECK(g == 0);

    DepthImage already(2, 1);
    already.at(0, 0) = 0;
    already.at(1, 0) = 255;
    CHECK(minmax_normalize(already).gray == already.gray);

    CHECK_THROWS_AS(minmax_normalize(DepthImage{}), ValidationError);
}

TEST_CASE("leave-instance-out holds out exactly one whole instance per class") {
    std::vector<SampleRecord> manifest;
    for (const std::string cls : {"box", "cone"}) {
        for (int inst = 0; inst < 3; ++inst) {
            for (int frame = 0; frame < 4; ++frame) {
                manifest.push_back(make_record(cls, cls + "_" + std::to_string(inst), frame));
            }
        }
    }
    SplitSpec spec;
    spec.protocol = SplitProtocol::leave_instance_out;
    spec.seed = 42;
    const Split split = make_splits(manifest, spec);
    CHECK(split.train.size() + split.test.size() == manifest.size());
    CHECK(split.test.size() == 8);  // one instance (4 frames) per class

    // The test set holds complete instances: no model_id straddles the split.
    std::set<std::string> test_models, train_models;
    for (const auto& r : split.test) test_models.insert(r.model_id);
    for (const auto& r : split.train) train_models.insert(r.model_id);
    CHECK(test_models.size() == 2);
    for (const auto& m : test_models) CHECK(!train_models.contains(m));

    // Deterministic per seed.
    const Split again = make_splits(manifest, spec);
    CHECK(again.test.size() == split.test.size());
    for (size_t i = 0; i < split.test.size(); ++i) CHECK(again.test[i] == split.test[i]);
}

TEST_CASE("leave-instance-out honors pinned test instances") {
    std::vector<SampleRecord> manifest;
    for (int inst = 0; inst < 3; ++inst) {
        manifest.push_back(make_record("box", "box_" + std::to_string(inst), 0));
        manifest.push_back(make_record("cone", "cone_" + std::to_string(inst), 0));
    }
    SplitSpec spec;
    spec.protocol = SplitProtocol::leave_instance_out;
    spec.test_instances = {{"box", "box_2"}, {"cone", "cone_0"}};
    const Split split = make_splits(manifest, spec);
    REQUIRE(split.test.size() == 2);
    std::set<std::string> held;
    for (const auto& r : split.test) held.insert(r.model_id);
    CHECK(held == std::set<std::string>{"box_2", "cone_0"});

    SplitSpec bad = spec;
    bad.test_instances = {{"box", "box_9"}};
    CHECK_THROWS_AS(make_splits(manifest, bad), ValidationError);
}

TEST_CASE("leave-instance-out refuses single-instance classes") {
    std::vector<SampleRecord> manifest = {make_record("box", "box_0", 0),
                                          make_record("box", "box_1", 0),
                                          make_record("lonely", "only", 0)};
    SplitSpec spec;
    spec.protocol = SplitProtocol::leave_instance_out;
    CHECK_THROWS_AS(make_splits(manifest, spec), SingleInstanceClassError);
}

TEST_CASE("frame subsampling sends every stride-th frame to test") {
    std::vector<SampleRecord> manifest;
    for (int frame = 0; frame < 12; ++frame) manifest.push_back(make_record("box", "b0", frame));
    SplitSpec spec;
    spec.protocol = SplitProtocol::frame_subsample;
    spec.subsample_stride = 5;
    const Split split = make_splits(manifest, spec);
    REQUIRE(split.test.size() == 3);  // frames 0, 5, 10
    CHECK(split.test[0].frame_index == 0);
    CHECK(split.test[1].frame_index == 5);
    CHECK(split.test[2].frame_index == 10);
    CHECK(split.train.size() == 9);

    SplitSpec bad = spec;
    bad.subsample_stride = 0;
    CHECK_THROWS_AS(make_splits(manifest, bad), ValidationError);
}

TEST_CASE("fixed-list split reads class,model pairs from a file") {
    const auto dir = fresh_dir("fixedlist");
    const auto list = dir / "test_models.txt";
    {
        std::ofstream out(list);
        out << "box,box_1\n\ncone,cone_0\n";
    }
    std::vector<SampleRecord> manifest;
    for (int inst = 0; inst < 2; ++inst) {
        for (int frame = 0; frame < 2; ++frame) {
            manifest.push_back(make_record("box", "box_" + std::to_string(inst), frame));
            manifest.push_back(make_record("cone", "cone_" + std::to_string(inst), frame));
        }
    }
    SplitSpec spec;
    spec.protocol = SplitProtocol::fixed_list;
    spec.fixed_list_path = list;
    const Split split = make_splits(manifest, spec);
    CHECK(split.test.size() == 4);
    for (const auto& r : split.test) {
        CHECK(((r.class_label == "box" && r.model_id == "box_1") ||
               (r.class_label == "cone" && r.model_id == "cone_0")));
    }

    SplitSpec missing = spec;
    missing.fixed_list_path = dir / "nope.txt";
    CHECK_THROWS_AS(make_splits(manifest, missing), IoError);

    const auto malformed = dir / "broken.txt";
    {
        std::ofstream out(malformed);
        out << "box box_1\n";
    }
    SplitSpec bad = spec;
    bad.fixed_list_path = malformed;
    CHECK_THROWS_AS(make_splits(manifest, bad), ValidationError);
}

TEST_CASE("directory ingestion builds sorted records from the render layout") {
    const auto dir = fresh_dir("ingest");
    fs::create_directories(dir / "box" / "box_0");
    fs::create_directories(dir / "cone" / "cone_1");
    auto touch = [](const fs::path& p) { std::ofstream(p) << "x"; };
    touch(dir / "box" / "box_0" / "0_depth.png");
    touch(dir / "box" / "box_0" / "2_depth.png");
    touch(dir / "box" / "box_0" / "2_rgb.png");
    touch(dir / "cone" / "cone_1" / "11_depth.png");
    touch(dir / "README.txt");                       // ignored: not a sample
    touch(dir / "box" / "notes_depth.png");          // ignored: wrong depth level
    fs::create_directories(dir / "box" / "box_0" / "extra");
    touch(dir / "box" / "box_0" / "extra" / "1_depth.png");  // ignored: too deep

    const auto records = ingest_directory(dir);
    REQUIRE(records.size() == 4);
    CHECK(records[0].class_label == "box");
    CHECK(records[0].model_id == "box_0");
    CHECK(records[0].frame_index == 0);
    CHECK(records[0].modality == "depth");
    CHECK(records[1].frame_index == 2);
    CHECK(records[1].modality == "depth");
    CHECK(records[2].frame_index == 2);
    CHECK(records[2].modality == "rgb");
    CHECK(records[3].class_label == "cone");
    CHECK(records[3].frame_index == 11);

    touch(dir / "box" / "box_0" / "x7_depth.png");
    CHECK_THROWS_AS(ingest_directory(dir), ValidationError);
    CHECK_THROWS_AS(ingest_directory(dir / "missing"), IoError);
}
