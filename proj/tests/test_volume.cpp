#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "c2f/rng.hpp"
#include "c2f/volume.hpp"
#include "c2f/volume_io.hpp"
#include "support.hpp"

using namespace c2f;

namespace {

Volume3D counting_volume(Dims3 dims) {
    std::vector<float> data(dims.voxel_count());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<float>(i);
    }
    return Volume3D(dims, {}, std::move(data));
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "c2f_volume_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("degenerate 1x1x1 volume slices to its single value on any axis") {
    Volume3D v({1, 1, 1}, {}, {7.0f});
    for (Axis axis : kAllAxes) {
        Slice2D s = slice(v, axis, 0);
        CHECK(s.height() == 1);
        CHECK(s.width() == 1);
        CHECK(s.at(0, 0) == 7.0f);
    }
}

TEST_CASE("axial slices of a 2x2x2 volume partition its voxels") {
    Volume3D v = counting_volume({2, 2, 2});
    Slice2D s0 = slice(v, Axis::Axial, 0);
    Slice2D s1 = slice(v, Axis::Axial, 1);

    // Oracle: enumerate voxels and partition by axial index.
    std::multiset<float> expect0, expect1;
    for (int w = 0; w < 2; ++w) {
        for (int h = 0; h < 2; ++h) {
            expect0.insert(v.at(w, h, 0));
            expect1.insert(v.at(w, h, 1));
        }
    }
    std::multiset<float> got0(s0.data().begin(), s0.data().end());
    std::multiset<float> got1(s1.data().begin(), s1.data().end());
    CHECK(got0 == expect0);
    CHECK(got1 == expect1);

    std::set<float> all(s0.data().begin(), s0.data().end());
    all.insert(s1.data().begin(), s1.data().end());
    CHECK(all.size() == 8);
}

TEST_CASE("each axis family covers every voxel exactly once") {
    Volume3D v = counting_volume({3, 4, 5});
    for (Axis axis : kAllAxes) {
        std::multiset<float> seen;
        for (int i = 0; i < v.dims().extent(axis); ++i) {
            Slice2D s = slice(v, axis, i);
            seen.insert(s.data().begin(), s.data().end());
        }
        CHECK(seen.size() == v.dims().voxel_count());
        std::multiset<float> expected(v.data().begin(), v.data().end());
        CHECK(seen == expected);
    }
}

TEST_CASE("slice then stack is the identity on all three axes") {
    rng::Stream s(11);
    Volume3D v = testsupport::random_volume({4, 5, 6}, s);
    for (Axis axis : kAllAxes) {
        std::vector<Slice2D> slices;
        for (int i = 0; i < v.dims().extent(axis); ++i) {
            slices.push_back(slice(v, axis, i));
        }
        Volume3D back = stack_volume(slices, axis, v.spacing());
        REQUIRE(back.dims() == v.dims());
        CHECK(std::memcmp(back.data().data(), v.data().data(),
                          v.data().size() * sizeof(float)) == 0);
    }
}

TEST_CASE("slice convention: coronal HxL, sagittal WxL, axial WxH") {
    Volume3D v = counting_volume({3, 4, 5});
    Slice2D cor = slice(v, Axis::Coronal, 1);
    CHECK(cor.height() == 4);
    CHECK(cor.width() == 5);
    CHECK(cor.at(2, 3) == v.at(1, 2, 3));

    Slice2D sag = slice(v, Axis::Sagittal, 2);
    CHECK(sag.height() == 3);
    CHECK(sag.width() == 5);
    CHECK(sag.at(1, 4) == v.at(1, 2, 4));

    Slice2D axi = slice(v, Axis::Axial, 3);
    CHECK(axi.height() == 3);
    CHECK(axi.width() == 4);
    CHECK(axi.at(2, 1) == v.at(2, 1, 3));
}

TEST_CASE("slice index out of range names the axis and extent") {
    Volume3D v = counting_volume({2, 3, 4});
    try {
        slice(v, Axis::Sagittal, 3);
        FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
        std::string msg = e.what();
        CHECK(msg.find("sagittal") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);
    }
}

TEST_CASE("stack of a single 1x1 slice gives a 1x1x1 volume") {
    Slice2D s(Axis::Axial, 0, 1, 1, {3.5f});
    Volume3D v = stack_volume({s}, Axis::Axial);
    CHECK(v.dims() == Dims3{1, 1, 1});
    CHECK(v.at(0, 0, 0) == 3.5f);
}

TEST_CASE("stack rejects mismatched widths and index gaps") {
    Slice2D a(Axis::Axial, 0, 2, 2, std::vector<float>(4, 0.0f));
    Slice2D wrong_width(Axis::Axial, 1, 2, 3, std::vector<float>(6, 0.0f));
    CHECK_THROWS_AS(stack_volume({a, wrong_width}, Axis::Axial),
                    std::invalid_argument);

    Slice2D gap(Axis::Axial, 2, 2, 2, std::vector<float>(4, 0.0f));
    CHECK_THROWS_AS(stack_volume({a, gap}, Axis::Axial),
                    std::invalid_argument);

    Slice2D other_axis(Axis::Coronal, 1, 2, 2, std::vector<float>(4, 0.0f));
    CHECK_THROWS_AS(stack_volume({a, other_axis}, Axis::Axial),
                    std::invalid_argument);
}

TEST_CASE("mask invariants are enforced at construction") {
    CHECK_THROWS_AS(Mask3D({1, 1, 2}, MaskMode::Binary, {0.0f, 0.5f}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Mask3D({1, 1, 2}, MaskMode::Probability, {0.0f, 1.5f}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Volume3D({2, 2, 2}, {}, std::vector<float>(7, 0.0f)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Volume3D({2, 2, 2}, {1.0, 0.0, 1.0},
                             std::vector<float>(8, 0.0f)),
                    std::invalid_argument);
    Mask3D ok({1, 1, 2}, MaskMode::Probability, {0.25f, 1.0f});
    CHECK(ok.foreground_count() == 1);
}

TEST_CASE("binarize thresholds at 0.5 inclusive") {
    Mask3D p({1, 1, 4}, MaskMode::Probability, {0.0f, 0.49f, 0.5f, 1.0f});
    Mask3D b = binarize(p);
    CHECK(b.mode() == MaskMode::Binary);
    CHECK(b.data()[0] == 0.0f);
    CHECK(b.data()[1] == 0.0f);
    CHECK(b.data()[2] == 1.0f);
    CHECK(b.data()[3] == 1.0f);
}

TEST_CASE("minimal header and payload read back as a valid volume") {
    auto dir = temp_dir();
    {
        std::ofstream h(dir / "tiny.json");
        h << R"({"dims":[1,1,1],"dtype":"f32","spacing":[1,1,1],)"
          << R"("kind":"intensity"})";
        float value = 4.25f;
        std::ofstream r(dir / "tiny.raw", std::ios::binary);
        r.write(reinterpret_cast<const char*>(&value), sizeof(value));
    }
    Volume3D v = read_volume(dir / "tiny.json");
    CHECK(v.dims() == Dims3{1, 1, 1});
    CHECK(v.at(0, 0, 0) == 4.25f);
}

TEST_CASE("short payload reports expected vs actual size") {
    auto dir = temp_dir();
    {
        std::ofstream h(dir / "short.json");
        h << R"({"dims":[1,1,1],"dtype":"f32","spacing":[1,1,1],)"
          << R"("kind":"intensity"})";
        std::ofstream r(dir / "short.raw", std::ios::binary);
        r.write("x", 1);
    }
    try {
        read_volume(dir / "short.json");
        FAIL("expected VolumeFormatError");
    } catch (const VolumeFormatError& e) {
        std::string msg = e.what();
        CHECK(msg.find("1 bytes") != std::string::npos);
        CHECK(msg.find("expected 4") != std::string::npos);
    }
}

TEST_CASE("header errors name the offending field") {
    auto dir = temp_dir();
    auto write_header = [&](const char* body) {
        std::ofstream h(dir / "bad.json");
        h << body;
        std::ofstream r(dir / "bad.raw", std::ios::binary);
        float f = 0.0f;
        r.write(reinterpret_cast<const char*>(&f), sizeof(f));
    };

    write_header(R"({"dims":[1,1],"dtype":"f32","spacing":[1,1,1],"kind":"intensity"})");
    CHECK_THROWS_WITH_AS(read_volume(dir / "bad.json"),
                         doctest::Contains("dims"), VolumeFormatError);

    write_header(R"({"dims":[1,1,1],"dtype":"f64","spacing":[1,1,1],"kind":"intensity"})");
    CHECK_THROWS_WITH_AS(read_volume(dir / "bad.json"),
                         doctest::Contains("dtype"), VolumeFormatError);

    write_header(R"({"dims":[1,1,1],"dtype":"f32","spacing":[1,1,1],"kind":"banana"})");
    CHECK_THROWS_WITH_AS(read_volume(dir / "bad.json"),
                         doctest::Contains("kind"), VolumeFormatError);

    write_header(R"({"dims":[1,1,1],"dtype":"f32","kind":"intensity"})");
    CHECK_THROWS_WITH_AS(read_volume(dir / "bad.json"),
                         doctest::Contains("spacing"), VolumeFormatError);
}

TEST_CASE("volume write/read round-trip is bit-exact") {
    auto dir = temp_dir();
    rng::Stream s(23);
    Volume3D v = testsupport::random_volume({8, 8, 8}, s);
    write_volume(v, dir / "rt");
    Volume3D back = read_volume(dir / "rt");
    CHECK(back.dims() == v.dims());
    CHECK(back.spacing() == v.spacing());
    CHECK(std::memcmp(back.data().data(), v.data().data(),
                      v.data().size() * sizeof(float)) == 0);
}

TEST_CASE("mask round-trips keep dtype and mode") {
    auto dir = temp_dir();
    rng::Stream s(29);
    Mask3D binary = testsupport::random_binary_mask({5, 6, 7}, s);
    write_mask(binary, dir / "mask_b");
    Mask3D b = read_mask(dir / "mask_b");
    CHECK(b.mode() == MaskMode::Binary);
    CHECK(std::memcmp(b.data().data(), binary.data().data(),
                      binary.data().size() * sizeof(float)) == 0);

    Mask3D prob({2, 2, 2}, MaskMode::Probability,
                testsupport::random_unit(8, s));
    write_mask(prob, dir / "mask_p");
    Mask3D p = read_mask(dir / "mask_p");
    CHECK(p.mode() == MaskMode::Probability);
    CHECK(std::memcmp(p.data().data(), prob.data().data(),
                      prob.data().size() * sizeof(float)) == 0);

    // a mask header is not an intensity volume
    CHECK_THROWS_AS(read_volume(dir / "mask_b"), VolumeFormatError);
}
