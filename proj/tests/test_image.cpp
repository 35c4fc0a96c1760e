#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "depthforge/image.hpp"
#include "depthforge/png_io.hpp"
#include "doctest.h"

using namespace depthforge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "depthforge_image_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("depth quantization maps min to 0, max to 230, background to 255") {
    DepthBuffer buf(4, 1);
    buf.at(0, 0) = 2.0f;
    buf.at(1, 0) = 3.0f;
    buf.at(2, 0) = 2.5f;
    // pixel (3,0) stays +inf = background
    const DepthImage img = depth_to_image(buf);
    CHECK(img.width == 4);
    CHECK(img.height == 1);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 0) == 230);
    CHECK(img.at(2, 0) == 115);  // round(230 * 0.5)
    CHECK(img.at(3, 0) == kBackgroundGray);
}

TEST_CASE("depth quantization rounds to nearest gray level") {
    DepthBuffer buf(3, 1);
    buf.at(0, 0) = 0.0f;
    buf.at(1, 0) = 1.0f;
    buf.at(2, 0) = 0.3f;
    const DepthImage img = depth_to_image(buf);
    CHECK(img.at(2, 0) == 69);  // round(230 * 0.3) = round(69.0)
}

TEST_CASE("constant-depth object quantizes to 0 (nearest), not mid gray") {
    DepthBuffer buf(2, 2);
    buf.at(0, 0) = 1.5f;
    buf.at(1, 1) = 1.5f;
    const DepthImage img = depth_to_image(buf);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 1) == 0);
    CHECK(img.at(1, 0) == kBackgroundGray);
    CHECK(img.at(0, 1) == kBackgroundGray);
}

TEST_CASE("all-background buffer is rejected") {
    DepthBuffer buf(8, 8);
    CHECK_THROWS_AS(depth_to_image(buf), AllBackgroundError);
}

TEST_CASE("object gray never collides with the background code") {
    // The top of the object range (230) stays well away from 255 so a
    // classifier can always separate silhouette from background.
    DepthBuffer buf(2, 1);
    buf.at(0, 0) = 1.0f;
    buf.at(1, 0) = 100.0f;
    const DepthImage img = depth_to_image(buf);
    CHECK(img.at(1, 0) == kObjectGrayMax);
    CHECK(kObjectGrayMax < kBackgroundGray);
}

TEST_CASE("depth buffer dump round trip preserves every float including inf") {
    DepthBuffer buf(3, 2);
    buf.at(0, 0) = 1.25f;
    buf.at(2, 1) = 1e-6f;
    buf.at(1, 0) = 4097.5f;
    const auto path = temp_dir() / "roundtrip.dfdepth";
    save_depth_buffer(buf, path);
    const DepthBuffer back = load_depth_buffer(path);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    REQUIRE(back.depth.size() == buf.depth.size());
    for (size_t i = 0; i < buf.depth.size(); ++i) {
        if (std::isinf(buf.depth[i])) {
            CHECK(std::isinf(back.depth[i]));
        } else {
            CHECK(back.depth[i] == buf.depth[i]);
        }
    }
}

TEST_CASE("depth buffer load rejects missing file and bad magic") {
    CHECK_THROWS_AS(load_depth_buffer(temp_dir() / "does_not_exist.dfdepth"), IoError);
    const auto path = temp_dir() / "bad_magic.dfdepth";
    {
        std::FILE* f = std::fopen(path.string().c_str(), "wb");
        REQUIRE(f != nullptr);
        std::fputs("NOTDEPTH", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_depth_buffer(path), IoError);
}

TEST_CASE("png gray8 save/load round trip is lossless") {
    DepthImage img(5, 3);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 5; ++x) {
            img.at(x, y) = static_cast<std::uint8_t>(40 * y + 7 * x);
        }
    }
    const auto path = temp_dir() / "gray.png";
    save_png_gray8(img, path);
    const DepthImage back = load_png_gray8(path);
    REQUIRE(back.width == 5);
    REQUIRE(back.height == 3);
    CHECK(back.gray == img.gray);
}

TEST_CASE("png load of a missing file reports the path") {
    const auto path = temp_dir() / "nope.png";
    CHECK_THROWS_AS(load_png_gray8(path), IoError);
    try {
        load_png_gray8(path);
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("nope.png") != std::string::npos);
    }
}

TEST_CASE("rgb chart save produces a readable png") {
    RgbImage img(4, 4, 250, 250, 250);
    img.set(1, 1, 200, 30, 30);
    const auto path = temp_dir() / "chart.png";
    save_png_rgb8(img, path);
    const DepthImage gray = load_png_gray8(path);
    CHECK(gray.width == 4);
    CHECK(gray.height == 4);
    // The red pixel converts to a darker gray than the background.
    CHECK(gray.at(1, 1) < gray.at(0, 0));
}
