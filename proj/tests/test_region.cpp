#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <vector>

#include "c2f/region.hpp"
#include "c2f/rng.hpp"
#include "c2f/volume.hpp"
#include "support.hpp"

using namespace c2f;

namespace {

Slice2D binary_slice(int h, int w, const std::vector<float>& data,
                     Axis axis = Axis::Axial, int index = 0) {
    return Slice2D(axis, index, h, w, data);
}

// Brute-force oracle: scan all foreground pixels for the extremes.
std::optional<Region2D> bbox_oracle(const Slice2D& s) {
    std::optional<Region2D> box;
    for (int r = 0; r < s.height(); ++r) {
        for (int c = 0; c < s.width(); ++c) {
            if (s.at(r, c) == 0.0f) continue;
            if (!box) {
                box = Region2D{s.axis(), s.index(), r, r, c, c};
            } else {
                box->top = std::min(box->top, r);
                box->bottom = std::max(box->bottom, r);
                box->left = std::min(box->left, c);
                box->right = std::max(box->right, c);
            }
        }
    }
    return box;
}

bool any_foreground_in(const Slice2D& s, int top, int bottom, int left,
                       int right) {
    for (int r = top; r <= bottom; ++r) {
        for (int c = left; c <= right; ++c) {
            if (s.at(r, c) != 0.0f) return true;
        }
    }
    return false;
}

} // namespace

TEST_CASE("min_bbox handles full, single-pixel and empty slices") {
    Slice2D full = binary_slice(3, 4, std::vector<float>(12, 1.0f));
    auto box = min_bbox(full);
    REQUIRE(box.has_value());
    CHECK(*box == Region2D{Axis::Axial, 0, 0, 2, 0, 3});

    std::vector<float> one(30, 0.0f);
    one[2 * 6 + 4] = 1.0f; // (r=2, c=4) in a 5x6 slice
    auto single = min_bbox(binary_slice(5, 6, one));
    REQUIRE(single.has_value());
    CHECK(*single == Region2D{Axis::Axial, 0, 2, 2, 4, 4});

    CHECK(!min_bbox(binary_slice(4, 4, std::vector<float>(16, 0.0f)))
               .has_value());
}

TEST_CASE("min_bbox is minimal and covering on random slices") {
    rng::Stream s(31);
    for (int trial = 0; trial < 100; ++trial) {
        int h = 1 + s.below(32), w = 1 + s.below(32);
        Slice2D mask = binary_slice(
            h, w,
            testsupport::random_binary(static_cast<std::size_t>(h) * w, s,
                                       0.1));
        auto box = min_bbox(mask);
        auto expect = bbox_oracle(mask);
        REQUIRE(box.has_value() == expect.has_value());
        if (!box) continue;
        CHECK(*box == *expect);
        // covering: nothing outside; minimal: every edge touches foreground
        CHECK(!any_foreground_in(mask, 0, box->top - 1, 0, w - 1));
        CHECK(any_foreground_in(mask, box->top, box->top, box->left,
                                box->right));
        CHECK(any_foreground_in(mask, box->bottom, box->bottom, box->left,
                                box->right));
        CHECK(any_foreground_in(mask, box->top, box->bottom, box->left,
                                box->left));
        CHECK(any_foreground_in(mask, box->top, box->bottom, box->right,
                                box->right));
    }
}

TEST_CASE("expand with a fixed frame, with and without clamping") {
    Region2D box{Axis::Axial, 0, 40, 60, 40, 60};
    Region2D grown = expand(box, MarginSpec::fixed(30), 512, 512);
    CHECK(grown == Region2D{Axis::Axial, 0, 10, 90, 10, 90});

    Region2D corner{Axis::Axial, 0, 0, 5, 0, 5};
    Region2D clamped = expand(corner, MarginSpec::fixed(30), 512, 512);
    CHECK(clamped == Region2D{Axis::Axial, 0, 0, 35, 0, 35});
}

TEST_CASE("expand is monotone and idempotent at zero margin") {
    rng::Stream s(37);
    MarginSpec margins = MarginSpec::random_uniform(0, 60, 99);
    for (int trial = 0; trial < 100; ++trial) {
        int h = 16 + s.below(100), w = 16 + s.below(100);
        int top = s.below(h), bottom = top + s.below(h - top);
        int left = s.below(w), right = left + s.below(w - left);
        Region2D r{Axis::Coronal, static_cast<int>(s.below(500)), top, bottom,
                   left, right};
        Region2D grown = expand(r, margins, h, w);
        CHECK(grown.top <= r.top);
        CHECK(grown.bottom >= r.bottom);
        CHECK(grown.left <= r.left);
        CHECK(grown.right >= r.right);
        CHECK(expand(r, MarginSpec::fixed(0), h, w) == r);
    }
}

TEST_CASE("random margins are uniform on {0..60} with mean 30") {
    MarginSpec margins = MarginSpec::random_uniform(0, 60, 4242);
    const int draws = 10000;
    double side_sum[4] = {0, 0, 0, 0};
    int lo = 100, hi = -1;
    for (int i = 0; i < draws; ++i) {
        auto m = margins.draw(Axis::Axial, i);
        for (int side = 0; side < 4; ++side) {
            side_sum[side] += m[side];
            lo = std::min(lo, m[side]);
            hi = std::max(hi, m[side]);
        }
    }
    for (double sum : side_sum) {
        CHECK(sum / draws == doctest::Approx(30.0).epsilon(1.0 / 30.0));
    }
    CHECK(lo == 0);
    CHECK(hi == 60);

    // identical key -> identical draw; different sides independent-ish
    CHECK(margins.draw(Axis::Axial, 7) == margins.draw(Axis::Axial, 7));
    CHECK(margins.draw(Axis::Axial, 7) != margins.draw(Axis::Axial, 8));
}

TEST_CASE("crop and paste round-trip inside the region") {
    rng::Stream s(41);
    for (int trial = 0; trial < 50; ++trial) {
        int h = 8 + s.below(24), w = 8 + s.below(24);
        std::vector<float> data =
            testsupport::random_unit(static_cast<std::size_t>(h) * w, s);
        Slice2D full(Axis::Sagittal, 3, h, w, data);
        int top = s.below(h), bottom = top + s.below(h - top);
        int left = s.below(w), right = left + s.below(w - left);
        Region2D region{Axis::Sagittal, 3, top, bottom, left, right};

        Slice2D patch = crop(full, region);
        CHECK(patch.row_origin() == top);
        CHECK(patch.col_origin() == left);
        Slice2D canvas = paste(region, patch, h, w);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                bool inside = r >= top && r <= bottom && c >= left && c <= right;
                CHECK(canvas.at(r, c) == (inside ? full.at(r, c) : 0.0f));
            }
        }
    }
}

TEST_CASE("paste of a full-slice region is the identity") {
    rng::Stream s(43);
    Slice2D full(Axis::Axial, 0, 6, 7, testsupport::random_unit(42, s));
    Region2D whole{Axis::Axial, 0, 0, 5, 0, 6};
    Slice2D crop_full = crop(full, whole);
    Slice2D back = paste(whole, crop_full, 6, 7);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 7; ++c) CHECK(back.at(r, c) == full.at(r, c));
    }
}

TEST_CASE("paste places a 1x1 region and rejects dim mismatches") {
    Region2D cell{Axis::Axial, 0, 2, 2, 3, 3};
    Slice2D value(Axis::Axial, 0, 1, 1, {1.0f});
    Slice2D canvas = paste(cell, value, 5, 5);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) {
            CHECK(canvas.at(r, c) == ((r == 2 && c == 3) ? 1.0f : 0.0f));
        }
    }
    Slice2D wrong(Axis::Axial, 0, 2, 1, {1.0f, 1.0f});
    CHECK_THROWS_AS(paste(cell, wrong, 5, 5), std::invalid_argument);
}

TEST_CASE("transform_r with a full mask and zero margins crops whole slices") {
    Dims3 dims{4, 5, 6};
    rng::Stream s(47);
    Volume3D vol = testsupport::random_volume(dims, s);
    Mask3D mask(dims, MaskMode::Binary,
                std::vector<float>(dims.voxel_count(), 1.0f));

    TransformResult tr = transform_r(vol, mask, MarginSpec::fixed(0));
    CHECK(tr.regions.count() == static_cast<std::size_t>(4 + 5 + 6));
    for (const CropSample& sample : tr.crops) {
        auto [rows, cols] = dims.plane_dims(sample.region.axis);
        CHECK(sample.region.top == 0);
        CHECK(sample.region.left == 0);
        CHECK(sample.region.bottom == rows - 1);
        CHECK(sample.region.right == cols - 1);
        Slice2D expect = slice(vol, sample.region.axis, sample.region.index);
        CHECK(sample.patch.data().size() == expect.data().size());
        for (std::size_t i = 0; i < expect.data().size(); ++i) {
            CHECK(sample.patch.data()[i] == expect.data()[i]);
        }
    }
}

TEST_CASE("transform_r of a single voxel emits one clamped region per axis") {
    Dims3 dims{64, 64, 64};
    rng::Stream s(53);
    Volume3D vol = testsupport::random_volume(dims, s);
    std::vector<float> mask_data(dims.voxel_count(), 0.0f);
    const int w0 = 10, h0 = 40, l0 = 33;
    mask_data[dims.index(w0, h0, l0)] = 1.0f;
    Mask3D mask(dims, MaskMode::Binary, mask_data);

    TransformResult tr = transform_r(vol, mask, MarginSpec::fixed(30));
    CHECK(tr.regions.count() == 3);
    CHECK(tr.crops.size() == 3);

    // The voxel's in-plane position per view.
    struct Expect {
        Axis axis;
        int index, r, c;
    };
    const Expect expects[3] = {{Axis::Coronal, w0, h0, l0},
                               {Axis::Sagittal, h0, w0, l0},
                               {Axis::Axial, l0, w0, h0}};
    for (const auto& e : expects) {
        const auto& region = tr.regions.at(e.axis, e.index);
        REQUIRE(region.has_value());
        CHECK(region->top == std::max(0, e.r - 30));
        CHECK(region->bottom == std::min(63, e.r + 30));
        CHECK(region->left == std::max(0, e.c - 30));
        CHECK(region->right == std::min(63, e.c + 30));
        CHECK(region->height() <= 61);
        CHECK(region->width() <= 61);
    }
}

TEST_CASE("transform_r signals a fully empty mask") {
    Dims3 dims{3, 3, 3};
    rng::Stream s(59);
    Volume3D vol = testsupport::random_volume(dims, s);
    CHECK_THROWS_AS(transform_r(vol, Mask3D::zeros(dims), MarginSpec::fixed(5)),
                    EmptyMaskError);
}

TEST_CASE("region set serializes to JSON and back") {
    Dims3 dims{8, 9, 10};
    RegionSet set(dims);
    set.set(Region2D{Axis::Coronal, 2, 1, 5, 0, 8});
    set.set(Region2D{Axis::Axial, 7, 3, 4, 2, 6});
    RegionSet back = RegionSet::from_json(set.to_json(), dims);
    CHECK(back.count() == 2);
    CHECK(*back.at(Axis::Coronal, 2) == *set.at(Axis::Coronal, 2));
    CHECK(*back.at(Axis::Axial, 7) == *set.at(Axis::Axial, 7));
    CHECK(!back.at(Axis::Sagittal, 0).has_value());
}

TEST_CASE("training slice filter uses an inclusive pixel threshold") {
    // One axial slice with 99 foreground pixels, one with exactly 100.
    Dims3 dims{16, 16, 3};
    std::vector<float> data(dims.voxel_count(), 0.0f);
    int placed = 0;
    for (int w = 0; w < 16 && placed < 99; ++w) {
        for (int h = 0; h < 16 && placed < 99; ++h, ++placed) {
            data[dims.index(w, h, 0)] = 1.0f;
        }
    }
    placed = 0;
    for (int w = 0; w < 16 && placed < 100; ++w) {
        for (int h = 0; h < 16 && placed < 100; ++h, ++placed) {
            data[dims.index(w, h, 2)] = 1.0f;
        }
    }
    Mask3D mask(dims, MaskMode::Binary, data);

    auto picked = select_training_slices(mask, Axis::Axial);
    CHECK(picked == std::vector<int>{2});

    CHECK(select_training_slices(Mask3D::zeros(dims), Axis::Axial).empty());

    // Brute force cross-check for an arbitrary threshold.
    rng::Stream s(61);
    Mask3D random_mask = testsupport::random_binary_mask({8, 8, 8}, s, 0.3);
    for (Axis axis : kAllAxes) {
        auto got = select_training_slices(random_mask, axis, 20);
        std::vector<int> expect;
        for (int i = 0; i < 8; ++i) {
            int count = 0;
            Slice2D sl = slice(random_mask, axis, i);
            for (float v : sl.data()) count += v != 0.0f;
            if (count >= 20) expect.push_back(i);
        }
        CHECK(got == expect);
    }
}
